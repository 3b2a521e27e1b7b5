#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace poetrat {

enum class Dynasty { Tang, Song, Yuan, Other };

const char* dynasty_name(Dynasty d);
Dynasty parse_dynasty(const std::string& name);  // throws MalformedRecord

/// One classical poem with aligned source lines and (optional)
/// reference translation lines.
struct Poem {
    std::string id;
    std::string title;
    std::string author;
    Dynasty dynasty = Dynasty::Other;
    std::vector<std::string> source_lines;
    std::vector<std::string> reference_lines;
    std::string poem_type;

    std::string source_text() const;     // lines joined by '\n'
    std::string reference_text() const;  // lines joined by '\n'

    bool operator==(const Poem&) const = default;
};

/// Sentence-level contrast item (s, t_c, t_e).
struct AdequacyTriplet {
    std::string id;
    std::string source;
    std::string correct;
    std::string erroneous;
    std::string ambiguous_span;

    bool operator==(const AdequacyTriplet&) const = default;
};

/// Six knowledge fields attached to one poem. Empty string means the
/// view is unavailable downstream.
struct KnowledgeEntry {
    std::string poem_id;
    std::string poem_text;
    std::string historical_background;
    std::string dynasty_name;
    std::string modern_chinese_translation;
    std::string author_introduction;
    std::string modern_chinese_analysis;
    std::string poetry_type;

    bool operator==(const KnowledgeEntry&) const = default;
};

struct StatsRow {
    int64_t poem_count = 0;
    int64_t unique_tokens_src = 0;
    int64_t unique_tokens_tgt = 0;
    double avg_tokens_per_sentence_src = 0.0;
    double avg_tokens_per_sentence_tgt = 0.0;
    int64_t total_tokens_src = 0;
    int64_t total_tokens_tgt = 0;
};

/// Per-dynasty rows plus the corpus total. Source tokens are counted
/// per character, target tokens per whitespace word, punctuation
/// excluded on both sides; target uniques fold ASCII case.
struct CorpusStats {
    std::map<Dynasty, StatsRow> by_dynasty;
    StatsRow total;
};

std::vector<Poem> load_poems(const std::filesystem::path& path);
std::vector<AdequacyTriplet> load_triplets(const std::filesystem::path& path);

struct KnowledgeLoadResult {
    std::vector<KnowledgeEntry> entries;
    int missing_field_warnings = 0;
};
KnowledgeLoadResult load_knowledge_entries(const std::filesystem::path& path);

void save_poems(const std::filesystem::path& path, const std::vector<Poem>& poems);
void save_triplets(const std::filesystem::path& path, const std::vector<AdequacyTriplet>& triplets);
void save_knowledge_entries(const std::filesystem::path& path, const std::vector<KnowledgeEntry>& entries);

CorpusStats compute_stats(const std::vector<Poem>& poems);

}  // namespace poetrat
