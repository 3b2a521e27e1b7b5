#include "poetrat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "poetrat/error.hpp"
#include "poetrat/text.hpp"

#ifdef POETRAT_WITH_HTTP
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#endif

namespace poetrat {

const char* criterion_name(Criterion c) {
    switch (c) {
        case Criterion::BM: return "BM";
        case Criterion::BS: return "BS";
        case Criterion::BF: return "BF";
    }
    return "BM";
}

namespace {

const std::string& criterion_template(const PromptSet& prompts, Criterion c) {
    switch (c) {
        case Criterion::BM: return prompts.judge_bm;
        case Criterion::BS: return prompts.judge_bs;
        case Criterion::BF: return prompts.judge_bf;
    }
    return prompts.judge_bm;
}

ChatRequest single_user_request(const JudgeOptions& options, std::string prompt) {
    ChatRequest req;
    req.model = options.model;
    req.temperature = options.temperature;
    req.messages.push_back(ChatMessage{Role::User, std::move(prompt)});
    return req;
}

}  // namespace

JudgeScore judge(Gateway& gw, const PromptSet& prompts, const JudgeOptions& options, const std::string& source,
                 const std::string& translation, Criterion criterion) {
    if (source.empty() || translation.empty()) {
        throw Error(Errc::Contract, "judge needs non-empty source and translation");
    }
    std::string prompt = fill_template(criterion_template(prompts, criterion),
                                       {{"source", source}, {"translation", translation}});
    std::string last_reply;
    for (int attempt = 0; attempt <= options.parse_retries; ++attempt) {
        ChatResponse r = gw.complete(single_user_request(options, prompt));
        last_reply = r.content;
        int value = text::first_integer(r.content);
        if (value >= 1 && value <= 5) {
            return JudgeScore{criterion, value, r.content};
        }
    }
    throw Error(Errc::UnparseableScore, last_reply);
}

double scorecard_avg(int bm, int bs, int bf) {
    return text::round1((bm + bs + bf) / 3.0);
}

ScoreCard score_card(Gateway& gw, const PromptSet& prompts, const JudgeOptions& options, const std::string& source,
                     const std::string& translation) {
    ScoreCard card;
    card.bm = judge(gw, prompts, options, source, translation, Criterion::BM);
    card.bs = judge(gw, prompts, options, source, translation, Criterion::BS);
    card.bf = judge(gw, prompts, options, source, translation, Criterion::BF);
    card.avg = scorecard_avg(card.bm.value, card.bs.value, card.bf.value);
    return card;
}

namespace {

std::vector<std::string> bleu_tokens(const std::string& s, BleuTokenizer tokenizer) {
    return tokenizer == BleuTokenizer::Whitespace ? text::split_whitespace(s) : text::split_characters(s);
}

std::string join_gram(const std::vector<std::string>& tokens, size_t start, size_t n) {
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        if (i) out += '\x1f';
        out += tokens[start + i];
    }
    return out;
}

}  // namespace

BleuReport corpus_bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                       BleuTokenizer tokenizer) {
    if (candidates.empty()) throw Error(Errc::EmptyInput, "no candidate sentences");
    if (candidates.size() != references.size()) {
        throw Error(Errc::LengthMismatch, std::to_string(candidates.size()) + " candidates vs " +
                                              std::to_string(references.size()) + " references");
    }

    std::array<int64_t, 4> matched = {0, 0, 0, 0};
    std::array<int64_t, 4> total = {0, 0, 0, 0};
    int64_t cand_len = 0;
    int64_t ref_len = 0;

    for (size_t i = 0; i < candidates.size(); ++i) {
        auto cand = bleu_tokens(candidates[i], tokenizer);
        auto ref = bleu_tokens(references[i], tokenizer);
        cand_len += static_cast<int64_t>(cand.size());
        ref_len += static_cast<int64_t>(ref.size());
        for (size_t n = 1; n <= 4; ++n) {
            if (cand.size() < n) break;
            std::unordered_map<std::string, int64_t> ref_counts;
            if (ref.size() >= n) {
                for (size_t k = 0; k + n <= ref.size(); ++k) ++ref_counts[join_gram(ref, k, n)];
            }
            std::unordered_map<std::string, int64_t> cand_counts;
            for (size_t k = 0; k + n <= cand.size(); ++k) ++cand_counts[join_gram(cand, k, n)];
            for (const auto& [gram, count] : cand_counts) {
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) matched[n - 1] += std::min(count, it->second);
            }
            total[n - 1] += static_cast<int64_t>(cand.size() - n + 1);
        }
    }

    BleuReport report;
    report.candidate_len = cand_len;
    report.reference_len = ref_len;
    for (size_t n = 0; n < 4; ++n) {
        report.precisions[n] = total[n] > 0 ? static_cast<double>(matched[n]) / static_cast<double>(total[n]) : 0.0;
    }
    report.brevity_penalty =
        (cand_len >= ref_len) ? 1.0
                              : (cand_len > 0 ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len))
                                              : 0.0);
    for (size_t n = 0; n < 4; ++n) {
        double log_sum = 0.0;
        bool zero = false;
        for (size_t k = 0; k <= n; ++k) {
            if (report.precisions[k] <= 0.0) {
                zero = true;
                break;
            }
            log_sum += std::log(report.precisions[k]);
        }
        report.bleu[n] = zero ? 0.0 : 100.0 * report.brevity_penalty * std::exp(log_sum / static_cast<double>(n + 1));
    }
    return report;
}

namespace {

void check_correlation_input(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        throw Error(Errc::LengthMismatch,
                    std::to_string(xs.size()) + " xs vs " + std::to_string(ys.size()) + " ys");
    }
    if (xs.size() < 2) throw Error(Errc::DegenerateInput, "need at least 2 samples");
}

double variance_sum(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s;
}

std::vector<double> fractional_ranks(const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    check_correlation_input(xs, ys);
    double n = static_cast<double>(xs.size());
    double mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double var_x = variance_sum(xs, mean_x);
    double var_y = variance_sum(ys, mean_y);
    if (var_x == 0.0 || var_y == 0.0) throw Error(Errc::DegenerateInput, "zero variance input");
    double cov = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) cov += (xs[i] - mean_x) * (ys[i] - mean_y);
    return cov / std::sqrt(var_x * var_y);
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    check_correlation_input(xs, ys);
    return pearson(fractional_ranks(xs), fractional_ranks(ys));
}

double kendall(const std::vector<double>& xs, const std::vector<double>& ys) {
    check_correlation_input(xs, ys);
    int64_t concordant = 0;
    int64_t discordant = 0;
    int64_t ties_x = 0;
    int64_t ties_y = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        for (size_t j = i + 1; j < xs.size(); ++j) {
            double dx = xs[i] - xs[j];
            double dy = ys[i] - ys[j];
            if (dx == 0.0 && dy == 0.0) {
                ++ties_x;
                ++ties_y;
            } else if (dx == 0.0) {
                ++ties_x;
            } else if (dy == 0.0) {
                ++ties_y;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    int64_t n = static_cast<int64_t>(xs.size());
    int64_t n0 = n * (n - 1) / 2;
    double denom = std::sqrt(static_cast<double>(n0 - ties_x)) * std::sqrt(static_cast<double>(n0 - ties_y));
    if (denom == 0.0) throw Error(Errc::DegenerateInput, "all pairs tied");
    return static_cast<double>(concordant - discordant) / denom;
}

namespace {

/// 64-bit FNV-1a; stable label-order derivation across platforms.
uint64_t fnv1a(const std::string& s, uint64_t seed) {
    uint64_t h = 14695981039346656037ull ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// First standalone 'A' or 'B' (no adjacent alphanumerics) in the reply.
char first_label(const std::string& reply) {
    auto alnum = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    };
    for (size_t i = 0; i < reply.size(); ++i) {
        if (reply[i] != 'A' && reply[i] != 'B') continue;
        bool left_ok = i == 0 || !alnum(reply[i - 1]);
        bool right_ok = i + 1 == reply.size() || !alnum(reply[i + 1]);
        if (left_ok && right_ok) return reply[i];
    }
    return 0;
}

}  // namespace

int adequacy_judge(Gateway& gw, const PromptSet& prompts, const JudgeOptions& options, const AdequacyTriplet& triplet,
                   const std::string& candidate, uint64_t seed) {
    if (candidate.empty()) throw Error(Errc::Contract, "adequacy_judge needs a non-empty candidate");
    bool correct_is_a = (fnv1a(triplet.id, seed) & 1ull) == 0;
    const std::string& option_a = correct_is_a ? triplet.correct : triplet.erroneous;
    const std::string& option_b = correct_is_a ? triplet.erroneous : triplet.correct;
    std::string prompt = fill_template(prompts.adequacy, {{"source", triplet.source},
                                                          {"candidate", candidate},
                                                          {"option_a", option_a},
                                                          {"option_b", option_b}});
    std::string last_reply;
    for (int attempt = 0; attempt <= options.parse_retries; ++attempt) {
        ChatResponse r = gw.complete(single_user_request(options, prompt));
        last_reply = r.content;
        char label = first_label(r.content);
        if (label == 'A') return correct_is_a ? 1 : 0;
        if (label == 'B') return correct_is_a ? 0 : 1;
    }
    throw Error(Errc::UnparseableChoice, last_reply);
}

double accuracy(const std::vector<int>& verdicts) {
    if (verdicts.empty()) throw Error(Errc::EmptyInput, "no verdicts");
    double sum = 0.0;
    for (int v : verdicts) sum += v ? 1.0 : 0.0;
    return text::round1(100.0 * sum / static_cast<double>(verdicts.size()));
}

ExternalScorerClient::ExternalScorerClient(std::string endpoint_url) : endpoint_url_(std::move(endpoint_url)) {
    if (endpoint_url_.empty()) throw Error(Errc::ConfigError, "scorer endpoint_url not set");
}

double ExternalScorerClient::score(const std::string& candidate, const std::string& reference,
                                   const std::string& source) const {
#ifndef POETRAT_WITH_HTTP
    (void)candidate;
    (void)reference;
    (void)source;
    throw Error(Errc::Transport, "built without HTTP support");
#else
    auto split = endpoint_url_.find('/', endpoint_url_.find("//") + 2);
    std::string base = split == std::string::npos ? endpoint_url_ : endpoint_url_.substr(0, split);
    std::string path = split == std::string::npos ? "/" : endpoint_url_.substr(split);
    httplib::Client client(base);
    nlohmann::json body = {{"candidate", candidate}, {"reference", reference}, {"source", source}};
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw Error(Errc::Transport, "scorer endpoint failed: " +
                                         (res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error())));
    }
    try {
        return nlohmann::json::parse(res->body).at("score").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Transport, std::string("bad scorer reply: ") + e.what());
    }
#endif
}

}  // namespace poetrat
