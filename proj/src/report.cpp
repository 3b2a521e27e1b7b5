#include "poetrat/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "poetrat/error.hpp"
#include "poetrat/text.hpp"

namespace poetrat {

Table& Table::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size()) {
        throw Error(Errc::Contract, "row width " + std::to_string(cells.size()) + " != column count " +
                                        std::to_string(columns.size()) + " in table \"" + title + "\"");
    }
    rows.push_back(std::move(cells));
    return *this;
}

namespace {

std::string csv_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

size_t display_width(const std::string& s) { return text::decode_utf8(s).size(); }

}  // namespace

std::string to_csv(const Table& table) {
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_field(cells[i]);
        }
        out += '\n';
    };
    emit(table.columns);
    for (const auto& row : table.rows) emit(row);
    return out;
}

std::string to_text(const Table& table) {
    std::vector<size_t> widths(table.columns.size());
    for (size_t i = 0; i < table.columns.size(); ++i) widths[i] = display_width(table.columns[i]);
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));
    }

    std::string out;
    if (!table.title.empty()) out += table.title + "\n";
    auto emit = [&](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out += "  ";
            out += cells[i];
            if (i + 1 < cells.size()) out.append(widths[i] - display_width(cells[i]), ' ');
        }
        out += '\n';
    };
    emit(table.columns);
    std::vector<std::string> rule;
    for (size_t w : widths) rule.emplace_back(w, '-');
    emit(rule);
    for (const auto& row : table.rows) emit(row);
    return out;
}

void write_csv(const Table& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << to_csv(table);
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

std::string format_fixed(double value, int decimals) {
    double scale = std::pow(10.0, decimals);
    double rounded = std::copysign(std::floor(std::fabs(value) * scale + 0.5) / scale, value);
    if (rounded == 0.0) rounded = 0.0;  // normalize -0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, rounded);
    return buf;
}

}  // namespace poetrat
