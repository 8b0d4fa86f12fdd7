#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trendlab::csv {

/// Splits one line on commas. No quoting: none of the formats here need it.
std::vector<std::string_view> split(std::string_view line);

/// Strict decimal parse (`.` separator, no thousands grouping). Throws ParseError.
double parse_double(std::string_view cell, std::string_view what);
long long parse_int(std::string_view cell, std::string_view what);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// A parsed file: header cells plus raw data lines, with line numbers kept for errors.
struct Table {
    std::filesystem::path path;
    std::vector<std::string> header;
    std::vector<std::string> lines;
    std::vector<std::size_t> line_numbers;

    /// Index of a required header column; throws ParseError naming the file when absent.
    std::size_t column(std::string_view name) const;
    std::string where(std::size_t row) const;
};

/// Reads a CSV with a mandatory header row. Blank lines are skipped, CRLF tolerated.
Table read(const std::filesystem::path& path);

/// Checks that the header equals `expected` cell for cell.
void expect_header(const Table& table, const std::vector<std::string>& expected);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace trendlab::csv
