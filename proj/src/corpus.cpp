#include "poetrat/corpus.hpp"

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "poetrat/error.hpp"
#include "poetrat/jsonl.hpp"
#include "poetrat/text.hpp"

namespace poetrat {

using json = nlohmann::json;

const char* dynasty_name(Dynasty d) {
    switch (d) {
        case Dynasty::Tang: return "Tang";
        case Dynasty::Song: return "Song";
        case Dynasty::Yuan: return "Yuan";
        case Dynasty::Other: return "Other";
    }
    return "Other";
}

Dynasty parse_dynasty(const std::string& name) {
    if (name == "Tang") return Dynasty::Tang;
    if (name == "Song") return Dynasty::Song;
    if (name == "Yuan") return Dynasty::Yuan;
    if (name == "Other") return Dynasty::Other;
    throw Error(Errc::MalformedRecord, "unknown dynasty \"" + name + "\"");
}

std::string Poem::source_text() const {
    std::string out;
    for (size_t i = 0; i < source_lines.size(); ++i) {
        if (i) out += '\n';
        out += source_lines[i];
    }
    return out;
}

std::string Poem::reference_text() const {
    std::string out;
    for (size_t i = 0; i < reference_lines.size(); ++i) {
        if (i) out += '\n';
        out += reference_lines[i];
    }
    return out;
}

namespace {

[[noreturn]] void malformed(int line_no, const std::string& reason) {
    throw Error(Errc::MalformedRecord, "line " + std::to_string(line_no) + ": " + reason);
}

std::string require_string(const json& j, const char* key, int line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) malformed(line_no, std::string("missing string field \"") + key + "\"");
    return it->get<std::string>();
}

std::vector<std::string> require_string_array(const json& j, const char* key, int line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) malformed(line_no, std::string("missing array field \"") + key + "\"");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) malformed(line_no, std::string("non-string element in \"") + key + "\"");
        out.push_back(v.get<std::string>());
    }
    return out;
}

using jsonl::for_each_record;

void check_unique_id(std::unordered_set<std::string>& seen, const std::string& id) {
    if (!seen.insert(id).second) throw Error(Errc::DuplicateId, id);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    return out;
}

}  // namespace

std::vector<Poem> load_poems(const std::filesystem::path& path) {
    std::vector<Poem> poems;
    std::unordered_set<std::string> ids;
    for_each_record(path, [&](const json& j, int line_no) {
        Poem p;
        p.id = require_string(j, "id", line_no);
        p.title = require_string(j, "title", line_no);
        p.author = require_string(j, "author", line_no);
        p.dynasty = parse_dynasty(require_string(j, "dynasty", line_no));
        p.source_lines = require_string_array(j, "source_lines", line_no);
        p.reference_lines = require_string_array(j, "reference_lines", line_no);
        p.poem_type = require_string(j, "poem_type", line_no);
        if (p.source_lines.empty()) malformed(line_no, "source_lines is empty");
        for (const auto& l : p.source_lines) {
            if (text::trim(l).empty()) malformed(line_no, "empty source line");
        }
        for (const auto& l : p.reference_lines) {
            if (text::trim(l).empty()) malformed(line_no, "empty reference line");
        }
        check_unique_id(ids, p.id);
        poems.push_back(std::move(p));
    });
    return poems;
}

std::vector<AdequacyTriplet> load_triplets(const std::filesystem::path& path) {
    std::vector<AdequacyTriplet> triplets;
    std::unordered_set<std::string> ids;
    for_each_record(path, [&](const json& j, int line_no) {
        AdequacyTriplet t;
        t.id = require_string(j, "id", line_no);
        t.source = require_string(j, "source", line_no);
        t.correct = require_string(j, "correct", line_no);
        t.erroneous = require_string(j, "erroneous", line_no);
        t.ambiguous_span = require_string(j, "ambiguous_span", line_no);
        if (t.correct == t.erroneous) malformed(line_no, "correct equals erroneous");
        if (!t.ambiguous_span.empty() && t.source.find(t.ambiguous_span) == std::string::npos) {
            malformed(line_no, "ambiguous_span not found in source");
        }
        check_unique_id(ids, t.id);
        triplets.push_back(std::move(t));
    });
    return triplets;
}

KnowledgeLoadResult load_knowledge_entries(const std::filesystem::path& path) {
    KnowledgeLoadResult result;
    for_each_record(path, [&](const json& j, int line_no) {
        KnowledgeEntry e;
        if (auto it = j.find("poem_id"); it != j.end() && it->is_string()) e.poem_id = it->get<std::string>();
        e.poem_text = require_string(j, "poem_text", line_no);
        if (text::trim(e.poem_text).empty()) malformed(line_no, "empty poem_text");
        auto optional_field = [&](const char* key) -> std::string {
            auto it = j.find(key);
            if (it == j.end() || !it->is_string()) {
                ++result.missing_field_warnings;
                return "";
            }
            return it->get<std::string>();
        };
        e.historical_background = optional_field("historical_background");
        e.dynasty_name = optional_field("dynasty_name");
        e.modern_chinese_translation = optional_field("modern_chinese_translation");
        e.author_introduction = optional_field("author_introduction");
        e.modern_chinese_analysis = optional_field("modern_chinese_analysis");
        e.poetry_type = optional_field("poetry_type");
        result.entries.push_back(std::move(e));
    });
    return result;
}

void save_poems(const std::filesystem::path& path, const std::vector<Poem>& poems) {
    auto out = open_out(path);
    for (const auto& p : poems) {
        json j = json::object();
        j["id"] = p.id;
        j["title"] = p.title;
        j["author"] = p.author;
        j["dynasty"] = dynasty_name(p.dynasty);
        j["source_lines"] = p.source_lines;
        j["reference_lines"] = p.reference_lines;
        j["poem_type"] = p.poem_type;
        out << j.dump() << '\n';
    }
}

void save_triplets(const std::filesystem::path& path, const std::vector<AdequacyTriplet>& triplets) {
    auto out = open_out(path);
    for (const auto& t : triplets) {
        json j = json::object();
        j["id"] = t.id;
        j["source"] = t.source;
        j["correct"] = t.correct;
        j["erroneous"] = t.erroneous;
        j["ambiguous_span"] = t.ambiguous_span;
        out << j.dump() << '\n';
    }
}

void save_knowledge_entries(const std::filesystem::path& path, const std::vector<KnowledgeEntry>& entries) {
    auto out = open_out(path);
    for (const auto& e : entries) {
        json j = json::object();
        j["poem_id"] = e.poem_id;
        j["poem_text"] = e.poem_text;
        j["historical_background"] = e.historical_background;
        j["dynasty_name"] = e.dynasty_name;
        j["modern_chinese_translation"] = e.modern_chinese_translation;
        j["author_introduction"] = e.author_introduction;
        j["modern_chinese_analysis"] = e.modern_chinese_analysis;
        j["poetry_type"] = e.poetry_type;
        out << j.dump() << '\n';
    }
}

namespace {

struct StatsAccumulator {
    int64_t poems = 0;
    int64_t src_tokens = 0;
    int64_t tgt_tokens = 0;
    int64_t src_sentences = 0;
    int64_t tgt_sentences = 0;
    std::set<std::string> src_vocab;
    std::set<std::string> tgt_vocab;

    void add(const Poem& p) {
        ++poems;
        for (const auto& line : p.source_lines) {
            ++src_sentences;
            for (auto& tok : text::char_tokens(line)) {
                ++src_tokens;
                src_vocab.insert(std::move(tok));
            }
        }
        for (const auto& line : p.reference_lines) {
            ++tgt_sentences;
            for (auto& tok : text::word_tokens(line)) {
                ++tgt_tokens;
                tgt_vocab.insert(text::ascii_lower(tok));
            }
        }
    }

    StatsRow row() const {
        StatsRow r;
        r.poem_count = poems;
        r.unique_tokens_src = static_cast<int64_t>(src_vocab.size());
        r.unique_tokens_tgt = static_cast<int64_t>(tgt_vocab.size());
        r.total_tokens_src = src_tokens;
        r.total_tokens_tgt = tgt_tokens;
        r.avg_tokens_per_sentence_src =
            src_sentences ? text::round1(static_cast<double>(src_tokens) / static_cast<double>(src_sentences)) : 0.0;
        r.avg_tokens_per_sentence_tgt =
            tgt_sentences ? text::round1(static_cast<double>(tgt_tokens) / static_cast<double>(tgt_sentences)) : 0.0;
        return r;
    }
};

}  // namespace

CorpusStats compute_stats(const std::vector<Poem>& poems) {
    std::map<Dynasty, StatsAccumulator> groups;
    StatsAccumulator all;
    for (const auto& p : poems) {
        groups[p.dynasty].add(p);
        all.add(p);
    }
    CorpusStats stats;
    for (const auto& [dynasty, acc] : groups) stats.by_dynasty[dynasty] = acc.row();
    stats.total = all.row();
    return stats;
}

}  // namespace poetrat
