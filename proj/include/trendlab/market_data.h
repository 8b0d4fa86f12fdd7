#pragma once

#include "trendlab/date.h"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trendlab::data {

struct QuoteBar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;

    bool operator==(const QuoteBar&) const = default;
};

/// Throws InvariantError unless prices are positive, volume non-negative and
/// low <= min(open, close) <= max(open, close) <= high.
void validate_bar(const QuoteBar& bar);

/// Date-sorted daily bars of one stock. Offsets everywhere count rows, so
/// weekends and holidays simply do not appear.
struct QuoteSeries {
    std::string stockname;
    std::vector<QuoteBar> bars;

    std::size_t size() const { return bars.size(); }
    bool empty() const { return bars.empty(); }
    const QuoteBar& operator[](std::size_t i) const { return bars[i]; }

    /// Row holding `date`, if any (binary search).
    std::optional<std::size_t> row_of(Date date) const;
    /// First row whose date is >= `date`; size() when none.
    std::size_t lower_bound(Date date) const;

    std::vector<double> closes() const;
    std::vector<double> volumes() const;

    /// Rows [first, last] inclusive as a new series.
    QuoteSeries slice(std::size_t first, std::size_t last) const;
};

/// Sorts, validates and checks date uniqueness. Identical repeated rows collapse;
/// differing rows for one date raise DuplicateDateError.
QuoteSeries make_series(std::string stockname, std::vector<QuoteBar> bars);

/// Column names for a quotes file. The defaults are the interchange format.
struct QuoteSchema {
    std::string date = "date";
    std::string open = "open";
    std::string high = "high";
    std::string low = "low";
    std::string close = "close";
    std::string volume = "volume";
    std::string stockname = "stockname";
};

QuoteSeries load_quotes(const std::filesystem::path& path, const QuoteSchema& schema = {});
std::string format_quotes(const QuoteSeries& series);
void write_quotes(const std::filesystem::path& path, const QuoteSeries& series);

enum class Tendency { Flat, Trend };

std::string_view to_string(Tendency t);
/// Accepts Trend, Flat and N/A; N/A becomes Flat.
Tendency parse_tendency(std::string_view text);

struct ExpertLabelRow {
    Date date;
    std::string stockname;
    long long id_select = 0;
    Tendency tendency = Tendency::Flat;
    std::string expert;

    bool operator==(const ExpertLabelRow&) const = default;
};

std::vector<ExpertLabelRow> load_labels(const std::filesystem::path& path);
std::string format_labels(std::span<const ExpertLabelRow> rows);
void write_labels(const std::filesystem::path& path, std::span<const ExpertLabelRow> rows);

/// One expert's labels for one stock, optionally with the quotes the expert saw.
struct LabelFile {
    std::string source;
    std::vector<ExpertLabelRow> rows;
    std::optional<QuoteSeries> quotes;
};

enum class DefectPolicy {
    Throw,  ///< raise DefectFileError on the first defect file
    Skip,   ///< drop the defect file and record it in MergeResult::rejected
};

struct MergeResult {
    std::vector<ExpertLabelRow> rows;
    std::map<std::string, QuoteSeries> quotes;
    std::vector<std::string> rejected;
};

/// Merges label files in order, dropping exact duplicate rows. A file whose quotes
/// disagree with quotes already accepted for the same (date, stockname), or whose
/// label rows disagree with accepted rows for the same (date, stockname, expert),
/// is a defect file and is rejected as a whole.
MergeResult merge_label_files(std::span<const LabelFile> files,
                              DefectPolicy policy = DefectPolicy::Throw);

}  // namespace trendlab::data
