#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "poetrat/error.hpp"
#include "poetrat/text.hpp"

namespace poetrat::jsonl {

/// Applies `fn(record, line_no)` to each non-empty line of a JSONL
/// file. Lines must parse to JSON objects; CRLF endings are accepted.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::MalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object()) {
            throw Error(Errc::MalformedRecord, "line " + std::to_string(line_no) + ": record is not an object");
        }
        fn(j, line_no);
    }
}

}  // namespace poetrat::jsonl
