#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "poetrat/corpus.hpp"

namespace poetrat {

enum class ViewKind {
    HistoricalBackground,
    DynastyName,
    ModernChineseTranslation,
    AuthorIntroduction,
    ModernChineseAnalysis,
    PoetryType,
};

inline constexpr std::array<ViewKind, 6> kAllViewKinds = {
    ViewKind::HistoricalBackground, ViewKind::DynastyName,     ViewKind::ModernChineseTranslation,
    ViewKind::AuthorIntroduction,   ViewKind::ModernChineseAnalysis, ViewKind::PoetryType,
};

const char* view_kind_name(ViewKind kind);           // snake_case, stable
ViewKind parse_view_kind(const std::string& name);   // throws ConfigError
bool is_discourse_level(ViewKind kind);

struct KnowledgeView {
    ViewKind kind;
    std::string text;
    bool discourse_level = false;
};

struct RetrievalResult {
    KnowledgeEntry entry;
    size_t ordinal = 0;
    double score = 0.0;
    bool exact = false;
};

/// Dice coefficient over character-bigram multisets of the normalized
/// texts. 1.0 iff the multisets are equal; two empty texts count equal.
double dice_similarity(const std::string& a, const std::string& b);

/// Retrieval normalization: whitespace and punctuation stripped, no
/// case mapping.
std::string normalize_poem_text(const std::string& s);

class KnowledgeBase {
public:
    KnowledgeBase() = default;

    /// Throws DuplicatePoemText if two entries normalize identically.
    static KnowledgeBase build(std::vector<KnowledgeEntry> entries);

    /// Exact hit on normalized text wins with score 1.0; otherwise the
    /// best Dice score among entries sharing at least one bigram, ties
    /// to the lowest ordinal. Throws NotFound below `threshold`.
    RetrievalResult retrieve(const std::string& poem_text, double threshold = 0.2) const;

    const std::vector<KnowledgeEntry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

private:
    struct EntryIndex {
        std::unordered_map<std::string, int> bigram_counts;
        size_t total_bigrams = 0;
    };

    std::vector<KnowledgeEntry> entries_;
    std::vector<EntryIndex> entry_index_;
    std::unordered_map<std::string, size_t> exact_index_;
    std::unordered_map<std::string, std::vector<size_t>> bigram_index_;  // sorted, unique
};

/// Fans one entry out into the six views, in kAllViewKinds order.
std::vector<KnowledgeView> views_of(const KnowledgeEntry& entry);

}  // namespace poetrat
