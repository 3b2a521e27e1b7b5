#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "poetrat/corpus.hpp"
#include "poetrat/gateway.hpp"
#include "poetrat/prompts.hpp"

namespace poetrat {

enum class Criterion { BM, BS, BF };

const char* criterion_name(Criterion c);

struct JudgeScore {
    Criterion criterion = Criterion::BM;
    int value = 0;  // 1..5
    std::string raw_reply;
};

struct ScoreCard {
    JudgeScore bm;
    JudgeScore bs;
    JudgeScore bf;
    double avg = 0.0;  // mean of the three, one decimal, half away from zero
};

enum class BleuTokenizer { Whitespace, Character };

struct BleuReport {
    std::array<double, 4> bleu = {0, 0, 0, 0};        // BLEU-1..4, 0..100
    std::array<double, 4> precisions = {0, 0, 0, 0};  // clipped n-gram precisions, 0..1
    double brevity_penalty = 1.0;
    int64_t candidate_len = 0;
    int64_t reference_len = 0;
};

struct CorrelationReport {
    double pearson_r = 0.0;
    double spearman_rho = 0.0;
    double kendall_tau = 0.0;
    size_t n = 0;
};

/// Settings shared by all judge-style calls.
struct JudgeOptions {
    std::string model;
    double temperature = 0.0;
    int parse_retries = 2;  // extra attempts after the first call
};

/// One rubric call: fills the criterion prompt, parses the first
/// integer of the reply, retries the call on unparseable or
/// out-of-range replies. Throws UnparseableScore after the retries.
JudgeScore judge(Gateway& gw, const PromptSet& prompts, const JudgeOptions& options, const std::string& source,
                 const std::string& translation, Criterion criterion);

/// BM, BS, BF in that order, then the rounded average.
ScoreCard score_card(Gateway& gw, const PromptSet& prompts, const JudgeOptions& options, const std::string& source,
                     const std::string& translation);

double scorecard_avg(int bm, int bs, int bf);

/// Corpus BLEU-1..4: clipped modified n-gram precision summed over the
/// corpus, geometric mean over orders 1..n, brevity penalty
/// exp(1 - r/c) when c < r. No smoothing; a zero precision zeroes the
/// score. One reference per candidate.
BleuReport corpus_bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                       BleuTokenizer tokenizer);

/// Sample Pearson r. Throws DegenerateInput on n < 2 or zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// Pearson on fractional (average) ranks.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Kendall tau-b by exhaustive pair enumeration.
double kendall(const std::vector<double>& xs, const std::vector<double>& ys);

/// Presents t_c/t_e as labels A/B in an order derived from
/// (seed, triplet id); returns 1 iff the model picks the label holding
/// the correct contrast. Parse rule: first standalone occurrence of
/// either label in the reply.
int adequacy_judge(Gateway& gw, const PromptSet& prompts, const JudgeOptions& options, const AdequacyTriplet& triplet,
                   const std::string& candidate, uint64_t seed);

/// 100 x mean, one decimal. Throws EmptyInput.
double accuracy(const std::vector<int>& verdicts);

/// Hook for externally hosted learned metrics (COMET-style): POSTs
/// {"candidate","reference","source"} to a local endpoint and expects
/// {"score": <number>} back. No scorer ships with the library.
class ExternalScorerClient {
public:
    explicit ExternalScorerClient(std::string endpoint_url);
    double score(const std::string& candidate, const std::string& reference, const std::string& source) const;

private:
    std::string endpoint_url_;
};

}  // namespace poetrat
