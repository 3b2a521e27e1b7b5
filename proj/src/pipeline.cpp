#include "poetrat/pipeline.hpp"

#include <future>
#include <utility>

#include "poetrat/error.hpp"
#include "poetrat/jsonl.hpp"
#include "poetrat/text.hpp"

namespace poetrat {

ChatResponse RunContext::complete(std::string prompt, std::optional<double> temp_override,
                                  std::optional<std::string> model_override, std::optional<int> sample_tag) {
    ChatRequest request;
    request.model = model_override.value_or(model);
    request.temperature = temp_override.value_or(temperature);
    request.messages.push_back({Role::User, std::move(prompt)});
    request.max_tokens = max_tokens;
    request.sample_tag = sample_tag;
    calls.fetch_add(1);
    ChatResponse response = gateway.complete(request);
    if (response.from_cache) cache_hits.fetch_add(1);
    return response;
}

std::vector<FewShotExemplar> load_exemplars(const std::filesystem::path& path) {
    std::vector<FewShotExemplar> out;
    jsonl::for_each_record(path, [&](const nlohmann::json& record, int line_no) {
        for (const char* key : {"source", "target"}) {
            if (!record.contains(key) || !record[key].is_string() || record[key].get<std::string>().empty()) {
                throw Error(Errc::MalformedRecord,
                            "exemplar line " + std::to_string(line_no) + ": missing or empty '" + key + "'");
            }
        }
        out.push_back({record["source"].get<std::string>(), record["target"].get<std::string>()});
    });
    return out;
}

std::string select_knowledge(RunContext& ctx, const std::string& source_poem, const KnowledgeView& view) {
    if (!view.discourse_level) {
        throw Error(Errc::Contract, std::string("select_knowledge on non-discourse view ") + view_kind_name(view.kind));
    }
    if (text::trim(view.text).empty()) {
        throw Error(Errc::Contract, std::string("select_knowledge on empty view ") + view_kind_name(view.kind));
    }
    std::string prompt = fill_template(ctx.prompts.selector, {{"text", source_poem}, {"rag context", view.text}});
    return ctx.complete(std::move(prompt)).content;
}

CandidateTranslation translate_with_view(RunContext& ctx, const Poem& poem, const KnowledgeView& view) {
    if (text::trim(view.text).empty()) {
        throw Error(Errc::Contract, std::string("translate_with_view on empty view ") + view_kind_name(view.kind));
    }
    std::string prompt = fill_template(ctx.prompts.translator, {{"translate type", poem.poem_type},
                                                                {"rag context", view.text},
                                                                {"text", poem.source_text()}});
    return {view.kind, ctx.complete(std::move(prompt)).content};
}

std::string vote(RunContext& ctx, const std::string& source_poem, const std::vector<CandidateTranslation>& candidates) {
    if (candidates.empty()) {
        throw Error(Errc::Contract, "vote with zero candidates");
    }
    if (candidates.size() == 1) {
        return candidates.front().text;
    }
    std::map<std::string, std::string> slots = {{"src_text", source_poem}};
    std::array<std::string, 6> by_kind;
    by_kind.fill("N/A");
    for (const auto& candidate : candidates) {
        by_kind[static_cast<size_t>(candidate.view_kind)] = candidate.text;
    }
    for (size_t i = 0; i < by_kind.size(); ++i) {
        slots["s" + std::to_string(i + 1)] = by_kind[i];
    }
    std::string prompt = fill_template(ctx.prompts.voter, slots);
    try {
        return ctx.complete(std::move(prompt)).content;
    } catch (const Error& err) {
        if (err.code() != Errc::EmptyCompletion) throw;
        // Empty vote: back off to the strongest single-view candidate.
        for (const auto& candidate : candidates) {
            if (candidate.view_kind == ViewKind::ModernChineseTranslation) {
                ctx.warnings.push_back("voter returned empty; using the modern_chinese_translation candidate");
                return candidate.text;
            }
        }
        ctx.warnings.push_back("voter returned empty; using the first candidate");
        return candidates.front().text;
    }
}

std::string extract_final(RunContext& ctx, const std::string& source_poem, const std::string& voter_output) {
    if (voter_output.empty()) {
        throw Error(Errc::Contract, "extract_final on empty voter output");
    }
    std::string prompt = fill_template(ctx.prompts.extractor, {{"target text", voter_output}, {"text", source_poem}});
    try {
        return text::trim(ctx.complete(std::move(prompt)).content);
    } catch (const Error& err) {
        if (err.code() != Errc::EmptyCompletion) throw;
        ctx.warnings.push_back("extractor returned empty; keeping the voter output verbatim");
        return voter_output;
    }
}

namespace {

RetrievalResult retrieve_for(RunContext& ctx, const Poem& poem, const KnowledgeBase& kb) {
    try {
        return kb.retrieve(poem.source_text(), ctx.retrieval_threshold);
    } catch (const Error& err) {
        if (err.code() != Errc::NotFound) throw;
        throw Error(Errc::NotFound, "no knowledge entry for poem '" + poem.id + "': " + err.what());
    }
}

}  // namespace

RatResult run_rat(RunContext& ctx, const Poem& poem, const KnowledgeBase& kb) {
    const int calls_before = ctx.calls.load();
    const size_t warnings_before = ctx.warnings.size();
    const std::string source = poem.source_text();

    RatTrace trace;
    RetrievalResult retrieval = retrieve_for(ctx, poem, kb);
    trace.retrieval = {retrieval.entry.poem_id, retrieval.score, retrieval.exact};

    std::vector<KnowledgeView> views = views_of(retrieval.entry);
    std::vector<bool> available(views.size());
    for (size_t i = 0; i < views.size(); ++i) {
        available[i] = !text::trim(views[i].text).empty();
    }

    // Selector fan-out over the discourse-level views; joined in view
    // order so selector_outputs is deterministic.
    std::vector<std::pair<size_t, std::future<std::string>>> selector_jobs;
    for (size_t i = 0; i < views.size(); ++i) {
        if (!available[i] || !views[i].discourse_level) continue;
        selector_jobs.emplace_back(i, std::async(std::launch::async, [&ctx, &source, &views, i] {
                                       return select_knowledge(ctx, source, views[i]);
                                   }));
    }
    for (auto& [index, job] : selector_jobs) {
        std::string selected = job.get();
        trace.selector_outputs[views[index].kind] = selected;
        views[index].text = std::move(selected);
    }

    // Translator fan-out over every available view, in view order. An
    // empty completion drops just that candidate.
    std::vector<std::pair<size_t, std::future<CandidateTranslation>>> translator_jobs;
    for (size_t i = 0; i < views.size(); ++i) {
        if (!available[i]) continue;
        translator_jobs.emplace_back(i, std::async(std::launch::async, [&ctx, &poem, &views, i] {
                                         return translate_with_view(ctx, poem, views[i]);
                                     }));
    }
    for (auto& [index, job] : translator_jobs) {
        try {
            trace.candidates.push_back(job.get());
        } catch (const Error& err) {
            if (err.code() != Errc::EmptyCompletion) throw;
            ctx.warnings.push_back(std::string("translator returned empty for view ") +
                                   view_kind_name(views[index].kind) + "; candidate dropped");
        }
    }
    if (trace.candidates.empty()) {
        throw Error(Errc::ViewUnavailable, "no usable knowledge views for poem '" + poem.id + "'");
    }

    trace.voter_raw = vote(ctx, source, trace.candidates);
    trace.final = extract_final(ctx, source, trace.voter_raw);
    trace.call_count = ctx.calls.load() - calls_before;
    trace.warnings.assign(ctx.warnings.begin() + static_cast<std::ptrdiff_t>(warnings_before), ctx.warnings.end());
    return {trace.final, std::move(trace)};
}

std::string run_single_view(RunContext& ctx, const Poem& poem, const KnowledgeBase& kb, ViewKind kind) {
    const std::string source = poem.source_text();
    RetrievalResult retrieval = retrieve_for(ctx, poem, kb);
    std::vector<KnowledgeView> views = views_of(retrieval.entry);
    KnowledgeView& view = views[static_cast<size_t>(kind)];
    if (text::trim(view.text).empty()) {
        throw Error(Errc::ViewUnavailable,
                    std::string("view ") + view_kind_name(kind) + " unavailable for poem '" + poem.id + "'");
    }
    if (view.discourse_level) {
        view.text = select_knowledge(ctx, source, view);
    }
    CandidateTranslation candidate = translate_with_view(ctx, poem, view);
    return extract_final(ctx, source, candidate.text);
}

std::string run_zero_shot(RunContext& ctx, const Poem& poem) {
    std::string prompt = fill_template(ctx.prompts.zero_shot, {{"text", poem.source_text()}});
    return ctx.complete(std::move(prompt), 0.0).content;
}

std::string run_five_shot(RunContext& ctx, const Poem& poem, const std::vector<FewShotExemplar>& exemplars) {
    if (exemplars.size() != 5) {
        throw Error(Errc::ExemplarCount, "expected 5 exemplars, got " + std::to_string(exemplars.size()));
    }
    std::map<std::string, std::string> slots = {{"text", poem.source_text()}};
    for (size_t i = 0; i < exemplars.size(); ++i) {
        slots["source" + std::to_string(i + 1)] = exemplars[i].source;
        slots["target" + std::to_string(i + 1)] = exemplars[i].target;
    }
    std::string prompt = fill_template(ctx.prompts.five_shot, slots);
    return ctx.complete(std::move(prompt), 0.0).content;
}

std::string run_rerank(RunContext& ctx, const Poem& poem, const std::string& judge_model) {
    const std::string prompt = fill_template(ctx.prompts.zero_shot, {{"text", poem.source_text()}});
    std::array<std::string, 4> candidates;
    candidates[0] = ctx.complete(prompt, 0.0).content;
    for (int sample = 1; sample <= 3; ++sample) {
        candidates[static_cast<size_t>(sample)] = ctx.complete(prompt, 0.3, {}, sample).content;
    }

    std::map<std::string, std::string> slots = {{"src_text", poem.source_text()}};
    for (size_t i = 0; i < candidates.size(); ++i) {
        slots["c" + std::to_string(i + 1)] = candidates[i];
    }
    std::string selection_prompt = fill_template(ctx.prompts.rerank_select, slots);

    constexpr int kParseRetries = 2;
    std::string last_reply;
    for (int attempt = 0; attempt <= kParseRetries; ++attempt) {
        last_reply = ctx.complete(selection_prompt, 0.0, judge_model).content;
        int choice = text::first_integer(last_reply);
        if (choice >= 1 && choice <= 4) {
            return candidates[static_cast<size_t>(choice - 1)];
        }
    }
    throw Error(Errc::UnparseableChoice, "rerank selector gave no index 1-4: \"" + last_reply + "\"");
}

ProbeResult contamination_probe(RunContext& ctx, const std::string& title, const std::string& author,
                                ProbeLanguage language, const std::string& reference) {
    if (reference.empty()) {
        throw Error(Errc::Contract, "contamination probe needs a non-empty reference");
    }
    const bool source_side = language == ProbeLanguage::Source;
    const std::string& tmpl = source_side ? ctx.prompts.probe_source : ctx.prompts.probe_target;
    std::string prompt = fill_template(tmpl, {{"title", title}, {"author", author}});
    ProbeResult result;
    result.generated = ctx.complete(std::move(prompt), 0.0).content;
    result.bleu = corpus_bleu({result.generated}, {reference},
                              source_side ? BleuTokenizer::Character : BleuTokenizer::Whitespace);
    return result;
}

}  // namespace poetrat
