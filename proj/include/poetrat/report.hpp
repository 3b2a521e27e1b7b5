#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace poetrat {

/// A rectangular report: every row has exactly columns.size() cells.
struct Table {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    Table& add_row(std::vector<std::string> cells);
};

/// RFC-4180 style: fields holding commas, quotes or newlines are quoted.
std::string to_csv(const Table& table);

/// Monospace rendering, columns padded to their widest cell (measured
/// in code points, so CJK cells stay readable).
std::string to_text(const Table& table);

void write_csv(const Table& table, const std::filesystem::path& path);

/// Fixed-decimal rendering used by every report cell, half away from
/// zero, so the same value always prints the same bytes.
std::string format_fixed(double value, int decimals);

}  // namespace poetrat
