#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "poetrat/cli.hpp"
#include "poetrat/error.hpp"

namespace py = pybind11;
using namespace poetrat;

namespace {

BleuTokenizer tokenizer_from(const std::string& name) {
    if (name == "whitespace") return BleuTokenizer::Whitespace;
    if (name == "character") return BleuTokenizer::Character;
    throw Error(Errc::ConfigError, "unknown tokenizer \"" + name + "\"");
}

py::dict bleu_dict(const BleuReport& report) {
    py::dict d;
    d["bleu"] = std::vector<double>(report.bleu.begin(), report.bleu.end());
    d["precisions"] = std::vector<double>(report.precisions.begin(), report.precisions.end());
    d["brevity_penalty"] = report.brevity_penalty;
    d["candidate_len"] = report.candidate_len;
    d["reference_len"] = report.reference_len;
    return d;
}

py::dict trace_dict(const RatTrace& trace) {
    py::dict retrieval;
    retrieval["entry_poem_id"] = trace.retrieval.entry_poem_id;
    retrieval["score"] = trace.retrieval.score;
    retrieval["exact"] = trace.retrieval.exact;

    py::list candidates;
    for (const CandidateTranslation& c : trace.candidates) {
        py::dict item;
        item["view"] = view_kind_name(c.view_kind);
        item["text"] = c.text;
        candidates.append(item);
    }

    py::dict d;
    d["retrieval"] = retrieval;
    d["candidates"] = candidates;
    d["voter_raw"] = trace.voter_raw;
    d["final"] = trace.final;
    d["call_count"] = trace.call_count;
    d["warnings"] = trace.warnings;
    return d;
}

/// Shared setup for the scripted translation entry points. The mock
/// script keeps the bindings runnable with no network or API key.
struct ScriptedRun {
    GatewayBundle bundle;
    PromptSet prompts;
    Poem poem;

    ScriptedRun(const std::filesystem::path& poems_path, const std::string& poem_id,
                const std::filesystem::path& prompts_dir, const std::filesystem::path& mock_script,
                const std::string& model) {
        CliConfig cfg;
        cfg.model = model;
        cfg.prompts_dir = prompts_dir.string();
        cfg.mock_script = mock_script.string();
        bundle = make_gateway(cfg);
        prompts = PromptSet::load(prompts_dir);
        for (Poem& p : load_poems(poems_path)) {
            if (p.id == poem_id) {
                poem = std::move(p);
                return;
            }
        }
        throw Error(Errc::NotFound, "no poem with id '" + poem_id + "' in " + poems_path.string());
    }
};

}  // namespace

PYBIND11_MODULE(_poetrat, m) {
    m.doc() = "Retrieval-augmented translation of classical Chinese poetry: core operations";

    py::register_exception<Error>(m, "PoetratError");

    m.def("dice_similarity", &dice_similarity, py::arg("a"), py::arg("b"),
          "Dice coefficient over character-bigram multisets of the normalized texts.");
    m.def("normalize_poem_text", &normalize_poem_text, py::arg("text"));
    m.def("fill_template", &fill_template, py::arg("template"), py::arg("slots"),
          "Fill {name} slots; unknown or unused slots raise PoetratError.");

    m.def("scorecard_avg", &scorecard_avg, py::arg("bm"), py::arg("bs"), py::arg("bf"),
          "Mean of the three rubric scores, one decimal, half away from zero.");
    m.def("pearson", &pearson, py::arg("xs"), py::arg("ys"));
    m.def("spearman", &spearman, py::arg("xs"), py::arg("ys"));
    m.def("kendall", &kendall, py::arg("xs"), py::arg("ys"));
    m.def("accuracy", &accuracy, py::arg("verdicts"));
    m.def(
        "corpus_bleu",
        [](const std::vector<std::string>& candidates, const std::vector<std::string>& references,
           const std::string& tokenizer) { return bleu_dict(corpus_bleu(candidates, references, tokenizer_from(tokenizer))); },
        py::arg("candidates"), py::arg("references"), py::arg("tokenizer") = "whitespace",
        "Corpus BLEU-1..4 with clipped precisions and brevity penalty, scaled to 0..100.");

    py::class_<KnowledgeBase>(m, "KnowledgeBase")
        .def_static(
            "from_jsonl",
            [](const std::filesystem::path& path) {
                return KnowledgeBase::build(load_knowledge_entries(path).entries);
            },
            py::arg("path"))
        .def(
            "retrieve",
            [](const KnowledgeBase& kb, const std::string& poem_text, double threshold) {
                RetrievalResult r = kb.retrieve(poem_text, threshold);
                py::dict d;
                d["poem_id"] = r.entry.poem_id;
                d["ordinal"] = r.ordinal;
                d["score"] = r.score;
                d["exact"] = r.exact;
                return d;
            },
            py::arg("poem_text"), py::arg("threshold") = 0.2)
        .def("__len__", &KnowledgeBase::size);

    m.def(
        "rat_translate",
        [](const std::filesystem::path& poems_path, const std::string& poem_id,
           const std::filesystem::path& kb_path, const std::filesystem::path& prompts_dir,
           const std::filesystem::path& mock_script, const std::string& model) {
            ScriptedRun run(poems_path, poem_id, prompts_dir, mock_script, model);
            KnowledgeBase kb = KnowledgeBase::build(load_knowledge_entries(kb_path).entries);
            RunContext ctx(*run.bundle.gateway, run.prompts, model);
            RatResult result = run_rat(ctx, run.poem, kb);
            py::dict d;
            d["final"] = result.final;
            d["trace"] = trace_dict(result.trace);
            return d;
        },
        py::arg("poems_path"), py::arg("poem_id"), py::arg("kb_path"), py::arg("prompts_dir"),
        py::arg("mock_script"), py::arg("model") = "gpt-3.5-turbo",
        "Full retrieve/select/translate/vote/extract run against a scripted transport.");

    m.def(
        "zero_shot_translate",
        [](const std::filesystem::path& poems_path, const std::string& poem_id,
           const std::filesystem::path& prompts_dir, const std::filesystem::path& mock_script,
           const std::string& model) {
            ScriptedRun run(poems_path, poem_id, prompts_dir, mock_script, model);
            RunContext ctx(*run.bundle.gateway, run.prompts, model);
            return run_zero_shot(ctx, run.poem);
        },
        py::arg("poems_path"), py::arg("poem_id"), py::arg("prompts_dir"), py::arg("mock_script"),
        py::arg("model") = "gpt-3.5-turbo");
}
