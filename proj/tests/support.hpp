#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#ifndef POETRAT_SOURCE_DIR
#error "POETRAT_SOURCE_DIR must be defined by the build"
#endif

namespace support {

inline std::filesystem::path source_dir() { return POETRAT_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return source_dir() / "tests" / "fixtures" / name; }
inline std::filesystem::path golden(const std::string& name) { return source_dir() / "tests" / "golden" / name; }
inline std::filesystem::path prompts_dir() { return source_dir() / "prompts"; }

/// Fresh directory under the system tmp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("poetrat_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

// --- Independent corpus BLEU oracle -----------------------------------
// Brute-force counting, written against the textbook definition, kept
// deliberately separate from the library implementation.

struct OracleBleu {
    std::array<double, 4> bleu = {0, 0, 0, 0};
    std::array<double, 4> precisions = {0, 0, 0, 0};
    double brevity_penalty = 1.0;
    long long candidate_len = 0;
    long long reference_len = 0;
};

inline std::vector<std::string> oracle_ws_tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

/// ASCII-only character tokens (oracle inputs are generated ASCII).
inline std::vector<std::string> oracle_char_tokens(const std::string& s) {
    std::vector<std::string> tokens;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        tokens.emplace_back(1, c);
    }
    return tokens;
}

inline OracleBleu oracle_corpus_bleu(const std::vector<std::vector<std::string>>& cands,
                                     const std::vector<std::vector<std::string>>& refs) {
    OracleBleu out;
    std::array<long long, 4> matched = {0, 0, 0, 0};
    std::array<long long, 4> total = {0, 0, 0, 0};
    for (size_t p = 0; p < cands.size(); ++p) {
        out.candidate_len += static_cast<long long>(cands[p].size());
        out.reference_len += static_cast<long long>(refs[p].size());
        for (int n = 1; n <= 4; ++n) {
            std::map<std::vector<std::string>, long long> cand_counts, ref_counts;
            for (size_t i = 0; i + n <= cands[p].size(); ++i) {
                cand_counts[{cands[p].begin() + i, cands[p].begin() + i + n}]++;
            }
            for (size_t i = 0; i + n <= refs[p].size(); ++i) {
                ref_counts[{refs[p].begin() + i, refs[p].begin() + i + n}]++;
            }
            for (const auto& [gram, count] : cand_counts) {
                auto it = ref_counts.find(gram);
                matched[n - 1] += std::min(count, it == ref_counts.end() ? 0LL : it->second);
                total[n - 1] += count;
            }
        }
    }
    for (int n = 0; n < 4; ++n) {
        out.precisions[n] = total[n] > 0 ? static_cast<double>(matched[n]) / static_cast<double>(total[n]) : 0.0;
    }
    if (out.candidate_len == 0) {
        out.brevity_penalty = 0.0;
    } else if (out.candidate_len < out.reference_len) {
        out.brevity_penalty =
            std::exp(1.0 - static_cast<double>(out.reference_len) / static_cast<double>(out.candidate_len));
    } else {
        out.brevity_penalty = 1.0;
    }
    for (int n = 1; n <= 4; ++n) {
        double log_sum = 0;
        bool zero = false;
        for (int k = 0; k < n; ++k) {
            if (out.precisions[k] <= 0.0) {
                zero = true;
                break;
            }
            log_sum += std::log(out.precisions[k]);
        }
        out.bleu[n - 1] = zero ? 0.0 : 100.0 * out.brevity_penalty * std::exp(log_sum / n);
    }
    return out;
}

/// Random space-joined sentence over a tiny vocabulary.
inline std::string random_sentence(std::mt19937& rng, int max_len, int vocab) {
    std::uniform_int_distribution<int> len_dist(1, max_len);
    std::uniform_int_distribution<int> tok_dist(0, vocab - 1);
    int len = len_dist(rng);
    std::string s;
    for (int i = 0; i < len; ++i) {
        if (i) s += ' ';
        s += "t" + std::to_string(tok_dist(rng));
    }
    return s;
}

// --- Independent Dice oracle ------------------------------------------

inline std::map<std::pair<char32_t, char32_t>, long long> oracle_bigrams(const std::vector<char32_t>& cps) {
    std::map<std::pair<char32_t, char32_t>, long long> grams;
    for (size_t i = 0; i + 2 <= cps.size(); ++i) grams[{cps[i], cps[i + 1]}]++;
    return grams;
}

inline double oracle_dice(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
    auto ga = oracle_bigrams(a);
    auto gb = oracle_bigrams(b);
    long long na = 0, nb = 0, shared = 0;
    for (const auto& [g, c] : ga) na += c;
    for (const auto& [g, c] : gb) nb += c;
    for (const auto& [g, c] : ga) {
        auto it = gb.find(g);
        if (it != gb.end()) shared += std::min(c, it->second);
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(shared) / static_cast<double>(na + nb);
}

}  // namespace support
