#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "poetrat/cli.hpp"
#include "poetrat/error.hpp"

namespace {

poetrat::BleuTokenizer parse_tokenizer(const std::string& name) {
    if (name == "whitespace") return poetrat::BleuTokenizer::Whitespace;
    if (name == "character") return poetrat::BleuTokenizer::Character;
    throw poetrat::Error(poetrat::Errc::ConfigError, "unknown tokenizer \"" + name + "\"");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace poetrat;

    CLI::App app{"poetrat: retrieval-augmented translation of classical Chinese poetry, with evaluation tooling"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value config file (flags and environment override it)");

    CliConfig cfg;
    app.add_option("--model", cfg.model, "chat model for translation calls")
        ->envname("POETRAT_MODEL")
        ->capture_default_str();
    app.add_option("--judge-model", cfg.judge_model, "model for judge and selection calls (defaults to --model)")
        ->envname("POETRAT_JUDGE_MODEL");
    app.add_option("--seed", cfg.seed, "seed for randomized orderings")->envname("POETRAT_SEED")->capture_default_str();
    app.add_option("--temperature", cfg.temperature, "sampling temperature for translation calls")
        ->capture_default_str();
    app.add_option("--retrieval-threshold", cfg.retrieval_threshold, "minimum Dice score for a knowledge hit")
        ->capture_default_str();
    app.add_option("--max-parallel", cfg.max_parallel, "maximum concurrent endpoint calls")
        ->envname("POETRAT_MAX_PARALLEL")
        ->capture_default_str();
    app.add_option("--cache-dir", cfg.cache_dir, "directory for the on-disk response cache")
        ->envname("POETRAT_CACHE_DIR");
    app.add_option("--mock", cfg.mock_script, "scripted mock transport (JSON rules file); no network used");
    app.add_option("--endpoint", cfg.endpoint_url, "chat-completions endpoint URL")
        ->envname("POETRAT_ENDPOINT")
        ->capture_default_str();
    app.add_option("--prompts", cfg.prompts_dir, "directory holding the prompt template assets")
        ->envname("POETRAT_PROMPTS")
        ->capture_default_str();
    app.add_flag("--resume", cfg.resume, "skip poems already present in the output file");

    std::filesystem::path stats_poems, stats_csv;
    CLI::App* stats = app.add_subcommand("stats", "corpus statistics per dynasty");
    stats->add_option("--poems", stats_poems, "poems.jsonl")->required();
    stats->add_option("--csv", stats_csv, "also write the report as CSV to this path");

    TranslateArgs targs;
    CLI::App* translate = app.add_subcommand("translate", "translate a corpus with one method");
    translate->add_option("--poems", targs.poems_path, "poems.jsonl")->required();
    translate->add_option("--kb", targs.kb_path, "knowledge.jsonl (rat and single_view methods)");
    translate->add_option("--method", targs.method,
                          "rat | zero_shot | five_shot | rerank | single_view:<kind>")
        ->capture_default_str();
    translate->add_option("--exemplars", targs.exemplars_path, "fiveshot.jsonl (five_shot method)");
    translate->add_option("--out", targs.runs_path, "output run records")->capture_default_str();

    JudgeArgs jargs;
    CLI::App* judge = app.add_subcommand("judge", "score run outputs with the BM/BS/BF rubrics");
    judge->add_option("--runs", jargs.runs_path, "runs.jsonl from translate")->required();
    judge->add_option("--out", jargs.scored_path, "output scored records")->capture_default_str();
    judge->add_option("--csv", jargs.csv_path, "also write the report as CSV to this path");

    BleuArgs bargs;
    std::string bleu_tokenizer = "whitespace";
    CLI::App* bleu = app.add_subcommand("bleu", "corpus BLEU of run outputs against references");
    bleu->add_option("--runs", bargs.runs_path, "runs.jsonl")->required();
    bleu->add_option("--poems", bargs.poems_path, "poems.jsonl with reference_lines")->required();
    bleu->add_option("--tokenizer", bleu_tokenizer, "whitespace | character")->capture_default_str();
    bleu->add_option("--csv", bargs.csv_path, "also write the report as CSV to this path");

    CorrelateArgs cargs;
    CLI::App* correlate = app.add_subcommand("correlate", "correlate judge scores with human annotations");
    correlate->add_option("--runs", cargs.scored_runs_path, "scored_runs.jsonl from judge")->required();
    correlate->add_option("--annotations", cargs.annotations_path, "annotations.jsonl")->required();
    correlate->add_option("--csv", cargs.csv_path, "also write the report as CSV to this path");

    ProbeArgs pargs;
    CLI::App* probe = app.add_subcommand("probe", "data contamination probe from title+author");
    probe->add_option("--poems", pargs.poems_path, "poems.jsonl")->required();
    probe->add_option("--csv", pargs.csv_path, "also write the report as CSV to this path");

    AdequacyArgs aargs;
    CLI::App* adequacy = app.add_subcommand("adequacy", "sentence-level adequacy accuracy of run outputs");
    adequacy->add_option("--triplets", aargs.triplets_path, "triplets.jsonl")->required();
    adequacy->add_option("--runs", aargs.runs_path, "runs.jsonl holding the candidate translations")->required();
    adequacy->add_option("--csv", aargs.csv_path, "also write the report as CSV to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    CommandIo io{std::cout, std::cerr};
    try {
        if (stats->parsed()) return cmd_stats(cfg, stats_poems, stats_csv, io);
        if (bleu->parsed()) {
            bargs.tokenizer = parse_tokenizer(bleu_tokenizer);
            return cmd_bleu(cfg, bargs, io);
        }
        if (correlate->parsed()) return cmd_correlate(cfg, cargs, io);

        PromptSet prompts = PromptSet::load(cfg.prompts_dir);
        GatewayBundle bundle = make_gateway(cfg);
        if (translate->parsed()) return cmd_translate(cfg, *bundle.gateway, prompts, targs, io);
        if (judge->parsed()) return cmd_judge(cfg, *bundle.gateway, prompts, jargs, io);
        if (probe->parsed()) return cmd_probe(cfg, *bundle.gateway, prompts, pargs, io);
        if (adequacy->parsed()) return cmd_adequacy(cfg, *bundle.gateway, prompts, aargs, io);
    } catch (const Error& err) {
        std::cerr << "error: " << errc_name(err.code()) << ": " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 2;
}
