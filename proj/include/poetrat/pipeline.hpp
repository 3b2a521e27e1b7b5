#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poetrat/corpus.hpp"
#include "poetrat/gateway.hpp"
#include "poetrat/metrics.hpp"
#include "poetrat/prompts.hpp"
#include "poetrat/retrieval.hpp"

namespace poetrat {

struct CandidateTranslation {
    ViewKind view_kind;
    std::string text;
};

struct RetrievalSummary {
    std::string entry_poem_id;
    double score = 0.0;
    bool exact = false;
};

struct RatTrace {
    RetrievalSummary retrieval;
    std::map<ViewKind, std::string> selector_outputs;  // discourse-level kinds only
    std::vector<CandidateTranslation> candidates;      // fixed view-kind order
    std::string voter_raw;
    std::string final;
    int call_count = 0;
    std::vector<std::string> warnings;
};

/// Everything one pipeline run needs: the gateway, the prompt assets,
/// model settings, and a per-run call counter. Ops never mutate their
/// poem/knowledge arguments.
struct RunContext {
    Gateway& gateway;
    const PromptSet& prompts;
    std::string model;
    double temperature = 0.0;
    std::optional<int> max_tokens;
    double retrieval_threshold = 0.2;

    std::atomic<int> calls{0};
    std::atomic<int> cache_hits{0};
    std::vector<std::string> warnings;

    RunContext(Gateway& gw, const PromptSet& p, std::string model_name)
        : gateway(gw), prompts(p), model(std::move(model_name)) {}

    ChatResponse complete(std::string prompt, std::optional<double> temp_override = {},
                          std::optional<std::string> model_override = {}, std::optional<int> sample_tag = {});
};

struct FewShotExemplar {
    std::string source;
    std::string target;
};

std::vector<FewShotExemplar> load_exemplars(const std::filesystem::path& path);

/// Selector: excerpt the view text down to what matters for this poem.
/// Only discourse-level views go through it.
std::string select_knowledge(RunContext& ctx, const std::string& source_poem, const KnowledgeView& view);

/// Translator: one candidate per knowledge view.
CandidateTranslation translate_with_view(RunContext& ctx, const Poem& poem, const KnowledgeView& view);

/// Voter: one call comparing all candidates, slots in fixed view-kind
/// order with "N/A" for absent ones. A single candidate bypasses the
/// call entirely.
std::string vote(RunContext& ctx, const std::string& source_poem, const std::vector<CandidateTranslation>& candidates);

/// Extractor: strip the voter output down to the translation.
std::string extract_final(RunContext& ctx, const std::string& source_poem, const std::string& voter_output);

struct RatResult {
    std::string final;
    RatTrace trace;
};

/// Full RAT: retrieve, select, translate per view, vote, extract.
RatResult run_rat(RunContext& ctx, const Poem& poem, const KnowledgeBase& kb);

/// Single-knowledge ablation: selector (if discourse-level), translator,
/// extractor; no voter.
std::string run_single_view(RunContext& ctx, const Poem& poem, const KnowledgeBase& kb, ViewKind kind);

std::string run_zero_shot(RunContext& ctx, const Poem& poem);

std::string run_five_shot(RunContext& ctx, const Poem& poem, const std::vector<FewShotExemplar>& exemplars);

/// Baseline at temperature 0 plus three samples at 0.3, then one
/// selection call to `judge_model` that must answer with an index 1-4.
std::string run_rerank(RunContext& ctx, const Poem& poem, const std::string& judge_model);

enum class ProbeLanguage { Source, Target };

struct ProbeResult {
    std::string generated;
    BleuReport bleu;
};

/// Asks the model for the poem (or its translation) from title+author
/// alone and BLEU-scores the output against the reference.
ProbeResult contamination_probe(RunContext& ctx, const std::string& title, const std::string& author,
                                ProbeLanguage language, const std::string& reference);

}  // namespace poetrat
