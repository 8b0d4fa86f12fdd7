#pragma once

#include "trendlab/date.h"
#include "trendlab/error.h"
#include "trendlab/market_data.h"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace trendlab::labels {

using data::QuoteSeries;
using data::Tendency;

/// A contiguous labeled period with one tendency. Dates are inclusive and
/// always present in the quote series the window was built against.
struct ExpertWindow {
    std::string stockname;
    std::string expert;
    Date start_date;
    Date end_date;
    Tendency tendency = Tendency::Flat;
    int direction = 0;  ///< -1, 0 or +1; 0 iff Flat

    bool operator==(const ExpertWindow&) const = default;
};

/// Sign of the least-squares slope of log close over rows [first, last].
/// A zero slope falls back to the sign of last - first close, then to +1.
int trend_direction(const QuoteSeries& quotes, std::size_t first, std::size_t last);

/// Splits one expert's rows for one stock into windows wherever id_select (or
/// the tendency) changes. Throws EmptyInputError on no rows and InvariantError
/// when a row has no quote.
std::vector<ExpertWindow> extract_windows(std::span<const data::ExpertLabelRow> rows,
                                          const QuoteSeries& quotes);

/// Throws InvariantError unless the windows are ordered, non-overlapping, gap-free
/// over `quotes` rows, and direction agrees with tendency.
void check_contiguous(std::span<const ExpertWindow> windows, const QuoteSeries& quotes);

struct TriggerSeries {
    std::string stockname;
    std::string expert;
    std::vector<Date> dates;
    std::vector<std::uint8_t> new_trigger;

    std::size_t count() const;
};

/// 1 on the first date of every window except the first, 0 elsewhere.
TriggerSeries new_trigger(std::span<const ExpertWindow> windows, const QuoteSeries& quotes);

/// Mean of direction codes rounded half away from zero.
int vote_experts(std::span<const int> codes);

/// Votes per date over every window covering that date, then re-segments the
/// voted codes into windows attributed to expert "voted".
std::vector<ExpertWindow> vote_windows(std::span<const ExpertWindow> windows,
                                       const QuoteSeries& quotes);

inline constexpr std::size_t kCorrectionRadius = 5;

/// Snaps up-trend starts to the earliest minimum close and down-trend starts to the
/// earliest maximum close within +-5 rows, repeating until no start moves. A start
/// never crosses its neighbours, so every window keeps at least one row, and the
/// first window (which has no changepoint) stays put. Directions are kept.
std::vector<ExpertWindow> trigger_correction(std::span<const ExpertWindow> windows,
                                             const QuoteSeries& quotes);

struct ContradictionStats {
    std::size_t rows = 0;
    std::size_t positives = 0;
    std::size_t contradicting_rows = 0;       ///< rows of both classes
    std::size_t contradicting_positives = 0;  ///< positive rows with a negative twin
    double pct_of_positives = 0.0;            ///< contradicting_positives / positives * 100

    /// "6 184/ 84%" as in the dataset option tables.
    std::string to_string() const;
};

/// Counts rows whose exact feature vector occurs with both target values.
template <class Row>
ContradictionStats count_contradictions(std::span<const Row> rows) {
    using Features = decltype(rows.front().features);
    std::map<Features, std::array<std::size_t, 2>> seen;
    ContradictionStats stats;
    stats.rows = rows.size();
    for (const auto& row : rows) {
        ++seen[row.features][row.target ? 1 : 0];
        if (row.target) ++stats.positives;
    }
    for (const auto& [features, counts] : seen) {
        if (counts[0] > 0 && counts[1] > 0) {
            stats.contradicting_rows += counts[0] + counts[1];
            stats.contradicting_positives += counts[1];
        }
    }
    if (stats.positives > 0) {
        stats.pct_of_positives = 100.0 * static_cast<double>(stats.contradicting_positives) /
                                 static_cast<double>(stats.positives);
    }
    return stats;
}

/// Negatives per positive.
struct ClassBalance {
    std::size_t negatives = 0;
    std::size_t positives = 0;

    /// negatives / positives; 0 when there are no positives.
    double ratio() const;
    /// "154:1", or "1.19:1" below 10.
    std::string to_string() const;
};

template <class Row>
ClassBalance class_balance(std::span<const Row> rows) {
    ClassBalance b;
    for (const auto& r : rows) (r.target ? b.positives : b.negatives) += 1;
    return b;
}

template <class Row>
struct DatasetSplit {
    std::vector<Row> train;
    std::vector<Row> test;
    Date split_date;
    ClassBalance train_balance;
};

/// Rows dated before `split_date` train, the rest test. Order is preserved.
template <class Row>
DatasetSplit<Row> split_by_date(std::span<const Row> rows, Date split_date) {
    DatasetSplit<Row> out;
    out.split_date = split_date;
    for (const auto& r : rows) (r.date < split_date ? out.train : out.test).push_back(r);
    if (out.train.empty() || out.test.empty()) {
        throw DegenerateSplitError("split at " + split_date.to_string() + " leaves " +
                                   std::to_string(out.train.size()) + " train and " +
                                   std::to_string(out.test.size()) + " test rows");
    }
    out.train_balance = class_balance(std::span<const Row>(out.train));
    return out;
}

/// Date such that about `train_fraction` of the (sorted) dates fall before it.
Date quantile_split_date(std::vector<Date> dates, double train_fraction = 0.7);

}  // namespace trendlab::labels
