#include "trendlab/csv.h"

#include "trendlab/error.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace trendlab::csv {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

double parse_double(std::string_view cell, std::string_view what) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw ParseError("cannot parse " + std::string(what) + " from '" + std::string(cell) + "'");
    }
    return value;
}

long long parse_int(std::string_view cell, std::string_view what) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ParseError("cannot parse " + std::string(what) + " from '" + std::string(cell) + "'");
    }
    return value;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ParseError(path.string() + ": missing column '" + std::string(name) + "'");
}

std::string Table::where(std::size_t row) const {
    return path.string() + ":" + std::to_string(line_numbers.at(row));
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    Table table;
    table.path = path;
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!have_header) {
            if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
            for (auto cell : split(line)) table.header.emplace_back(cell);
            have_header = true;
            continue;
        }
        table.lines.push_back(line);
        table.line_numbers.push_back(number);
    }
    if (!have_header) throw ParseError(path.string() + ": missing header row");
    return table;
}

void expect_header(const Table& table, const std::vector<std::string>& expected) {
    if (table.header != expected) {
        std::ostringstream msg;
        msg << table.path.string() << ": unexpected header, want ";
        for (std::size_t i = 0; i < expected.size(); ++i) msg << (i ? "," : "") << expected[i];
        throw ParseError(msg.str());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace trendlab::csv
