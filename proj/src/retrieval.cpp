#include "poetrat/retrieval.hpp"

#include <algorithm>

#include "poetrat/error.hpp"
#include "poetrat/text.hpp"

namespace poetrat {

const char* view_kind_name(ViewKind kind) {
    switch (kind) {
        case ViewKind::HistoricalBackground: return "historical_background";
        case ViewKind::DynastyName: return "dynasty_name";
        case ViewKind::ModernChineseTranslation: return "modern_chinese_translation";
        case ViewKind::AuthorIntroduction: return "author_introduction";
        case ViewKind::ModernChineseAnalysis: return "modern_chinese_analysis";
        case ViewKind::PoetryType: return "poetry_type";
    }
    return "poetry_type";
}

ViewKind parse_view_kind(const std::string& name) {
    for (ViewKind kind : kAllViewKinds) {
        if (name == view_kind_name(kind)) return kind;
    }
    throw Error(Errc::ConfigError, "unknown knowledge view \"" + name + "\"");
}

bool is_discourse_level(ViewKind kind) {
    return kind == ViewKind::HistoricalBackground || kind == ViewKind::AuthorIntroduction ||
           kind == ViewKind::ModernChineseAnalysis;
}

std::string normalize_poem_text(const std::string& s) {
    return text::strip_punct_and_space(s);
}

namespace {

std::unordered_map<std::string, int> bigram_multiset(const std::string& normalized, size_t* total) {
    std::unordered_map<std::string, int> counts;
    auto cps = text::decode_utf8(normalized);
    size_t n = cps.size() >= 2 ? cps.size() - 1 : 0;
    for (size_t i = 0; i < n; ++i) {
        ++counts[text::encode_utf8({cps[i], cps[i + 1]})];
    }
    if (total) *total = n;
    return counts;
}

double dice_from_multisets(const std::unordered_map<std::string, int>& a, size_t a_total,
                           const std::unordered_map<std::string, int>& b, size_t b_total) {
    if (a_total == 0 && b_total == 0) return 1.0;
    if (a_total == 0 || b_total == 0) return 0.0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    size_t overlap = 0;
    for (const auto& [gram, count] : small) {
        auto it = large.find(gram);
        if (it != large.end()) overlap += static_cast<size_t>(std::min(count, it->second));
    }
    return 2.0 * static_cast<double>(overlap) / static_cast<double>(a_total + b_total);
}

}  // namespace

double dice_similarity(const std::string& a, const std::string& b) {
    size_t a_total = 0;
    size_t b_total = 0;
    auto ma = bigram_multiset(normalize_poem_text(a), &a_total);
    auto mb = bigram_multiset(normalize_poem_text(b), &b_total);
    return dice_from_multisets(ma, a_total, mb, b_total);
}

KnowledgeBase KnowledgeBase::build(std::vector<KnowledgeEntry> entries) {
    KnowledgeBase kb;
    kb.entries_ = std::move(entries);
    kb.entry_index_.resize(kb.entries_.size());
    for (size_t i = 0; i < kb.entries_.size(); ++i) {
        std::string normalized = normalize_poem_text(kb.entries_[i].poem_text);
        auto [it, inserted] = kb.exact_index_.emplace(normalized, i);
        if (!inserted) throw Error(Errc::DuplicatePoemText, normalized);
        kb.entry_index_[i].bigram_counts = bigram_multiset(normalized, &kb.entry_index_[i].total_bigrams);
        for (const auto& [gram, count] : kb.entry_index_[i].bigram_counts) {
            (void)count;
            kb.bigram_index_[gram].push_back(i);
        }
    }
    // Entries are inserted in ascending ordinal order, so the posting
    // lists are already sorted and duplicate-free.
    return kb;
}

RetrievalResult KnowledgeBase::retrieve(const std::string& poem_text, double threshold) const {
    if (empty()) throw Error(Errc::NotFound, "knowledge base is empty");
    std::string normalized = normalize_poem_text(poem_text);
    if (auto it = exact_index_.find(normalized); it != exact_index_.end()) {
        return RetrievalResult{entries_[it->second], it->second, 1.0, true};
    }

    size_t query_total = 0;
    auto query_counts = bigram_multiset(normalized, &query_total);
    std::vector<char> seen(entries_.size(), 0);
    std::vector<size_t> candidates;
    for (const auto& [gram, count] : query_counts) {
        (void)count;
        auto it = bigram_index_.find(gram);
        if (it == bigram_index_.end()) continue;
        for (size_t ordinal : it->second) {
            if (!seen[ordinal]) {
                seen[ordinal] = 1;
                candidates.push_back(ordinal);
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());

    double best_score = -1.0;
    size_t best_ordinal = 0;
    for (size_t ordinal : candidates) {
        double score = dice_from_multisets(query_counts, query_total, entry_index_[ordinal].bigram_counts,
                                           entry_index_[ordinal].total_bigrams);
        if (score > best_score) {
            best_score = score;
            best_ordinal = ordinal;
        }
    }
    if (best_score < threshold) {
        throw Error(Errc::NotFound, "best retrieval score " + std::to_string(std::max(best_score, 0.0)) +
                                        " below threshold " + std::to_string(threshold));
    }
    return RetrievalResult{entries_[best_ordinal], best_ordinal, best_score, false};
}

std::vector<KnowledgeView> views_of(const KnowledgeEntry& entry) {
    auto text_of = [&](ViewKind kind) -> const std::string& {
        switch (kind) {
            case ViewKind::HistoricalBackground: return entry.historical_background;
            case ViewKind::DynastyName: return entry.dynasty_name;
            case ViewKind::ModernChineseTranslation: return entry.modern_chinese_translation;
            case ViewKind::AuthorIntroduction: return entry.author_introduction;
            case ViewKind::ModernChineseAnalysis: return entry.modern_chinese_analysis;
            case ViewKind::PoetryType: return entry.poetry_type;
        }
        return entry.poetry_type;
    };
    std::vector<KnowledgeView> views;
    views.reserve(kAllViewKinds.size());
    for (ViewKind kind : kAllViewKinds) {
        views.push_back(KnowledgeView{kind, text_of(kind), is_discourse_level(kind)});
    }
    return views;
}

}  // namespace poetrat
