#include "trendlab/labels.h"

#include "trendlab/regression.h"

#include <cmath>
#include <cstdio>

namespace trendlab::labels {

namespace {

std::size_t require_row(const QuoteSeries& quotes, Date date) {
    const auto row = quotes.row_of(date);
    if (!row) {
        throw InvariantError(quotes.stockname + ": no quote for labeled date " + date.to_string());
    }
    return *row;
}

struct RowRange {
    std::size_t first;
    std::size_t last;
};

std::vector<RowRange> to_rows(std::span<const ExpertWindow> windows, const QuoteSeries& quotes) {
    std::vector<RowRange> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        out.push_back({require_row(quotes, w.start_date), require_row(quotes, w.end_date)});
    }
    return out;
}

std::string group_thousands(std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    const auto len = digits.size();
    for (std::size_t i = 0; i < len; ++i) {
        if (i > 0 && (len - i) % 3 == 0) out += ' ';
        out += digits[i];
    }
    return out;
}

}  // namespace

int trend_direction(const QuoteSeries& quotes, std::size_t first, std::size_t last) {
    if (last > first) {
        std::vector<double> logs;
        logs.reserve(last - first + 1);
        for (std::size_t i = first; i <= last; ++i) logs.push_back(std::log(quotes[i].close));
        const double slope = fit_line(logs).slope;
        if (slope > 0.0) return 1;
        if (slope < 0.0) return -1;
        if (quotes[last].close < quotes[first].close) return -1;
    }
    return 1;
}

std::vector<ExpertWindow> extract_windows(std::span<const data::ExpertLabelRow> rows,
                                          const QuoteSeries& quotes) {
    if (rows.empty()) throw EmptyInputError("extract_windows: no label rows");
    std::vector<const data::ExpertLabelRow*> sorted;
    sorted.reserve(rows.size());
    for (const auto& r : rows) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto* a, const auto* b) { return a->date < b->date; });

    std::vector<ExpertWindow> windows;
    std::size_t first_row = 0;
    std::size_t last_row = 0;
    const auto close_window = [&] {
        auto& w = windows.back();
        w.direction = w.tendency == Tendency::Trend ? trend_direction(quotes, first_row, last_row) : 0;
    };
    const data::ExpertLabelRow* prev = nullptr;
    for (const auto* r : sorted) {
        const auto row = require_row(quotes, r->date);
        if (prev == nullptr || r->id_select != prev->id_select || r->tendency != prev->tendency) {
            if (prev != nullptr) close_window();
            windows.push_back({r->stockname, r->expert, r->date, r->date, r->tendency, 0});
            first_row = row;
        }
        windows.back().end_date = r->date;
        last_row = row;
        prev = r;
    }
    close_window();
    return windows;
}

void check_contiguous(std::span<const ExpertWindow> windows, const QuoteSeries& quotes) {
    const auto ranges = to_rows(windows, quotes);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        if (ranges[i].first > ranges[i].last) {
            throw InvariantError("window starting " + w.start_date.to_string() + " ends before it starts");
        }
        if ((w.direction == 0) != (w.tendency == Tendency::Flat) || w.direction < -1 || w.direction > 1) {
            throw InvariantError("window starting " + w.start_date.to_string() +
                                 " has direction inconsistent with tendency");
        }
        if (i > 0 && ranges[i].first != ranges[i - 1].last + 1) {
            throw InvariantError("windows are not contiguous at " + w.start_date.to_string());
        }
    }
}

std::size_t TriggerSeries::count() const {
    std::size_t n = 0;
    for (auto v : new_trigger) n += v;
    return n;
}

TriggerSeries new_trigger(std::span<const ExpertWindow> windows, const QuoteSeries& quotes) {
    TriggerSeries out;
    if (windows.empty()) return out;
    out.stockname = windows.front().stockname;
    out.expert = windows.front().expert;
    const auto ranges = to_rows(windows, quotes);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        for (std::size_t r = ranges[i].first; r <= ranges[i].last; ++r) {
            out.dates.push_back(quotes[r].date);
            out.new_trigger.push_back(i > 0 && r == ranges[i].first ? 1 : 0);
        }
    }
    return out;
}

int vote_experts(std::span<const int> codes) {
    if (codes.empty()) throw EmptyInputError("vote_experts: no expert codes");
    long long sum = 0;
    for (int c : codes) sum += c;
    const auto n = static_cast<long long>(codes.size());
    if (2 * sum >= n) return 1;
    if (2 * sum <= -n) return -1;
    return 0;
}

std::vector<ExpertWindow> vote_windows(std::span<const ExpertWindow> windows,
                                       const QuoteSeries& quotes) {
    std::vector<ExpertWindow> out;
    if (windows.empty()) return out;
    const auto ranges = to_rows(windows, quotes);
    std::vector<std::vector<int>> codes(quotes.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        for (std::size_t r = ranges[i].first; r <= ranges[i].last; ++r) {
            codes[r].push_back(windows[i].direction);
        }
    }
    int current = 0;
    bool open = false;
    for (std::size_t r = 0; r < quotes.size(); ++r) {
        if (codes[r].empty()) {
            open = false;
            continue;
        }
        const int code = vote_experts(codes[r]);
        if (!open || code != current) {
            out.push_back({windows.front().stockname, "voted", quotes[r].date, quotes[r].date,
                           code == 0 ? Tendency::Flat : Tendency::Trend, code});
            current = code;
            open = true;
        }
        out.back().end_date = quotes[r].date;
    }
    return out;
}

std::vector<ExpertWindow> trigger_correction(std::span<const ExpertWindow> windows,
                                             const QuoteSeries& quotes) {
    std::vector<ExpertWindow> out(windows.begin(), windows.end());
    if (windows.size() < 2) return out;
    check_contiguous(windows, quotes);
    const auto ranges = to_rows(windows, quotes);
    const std::size_t span_end = ranges.back().last;
    std::vector<std::size_t> starts;
    for (const auto& r : ranges) starts.push_back(r.first);

    // Every move strictly improves (close, row) for one start in lexicographic order,
    // so the sweep reaches a fixed point; at the fixed point a second call is a no-op.
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::size_t i = 1; i < starts.size(); ++i) {
            const int dir = out[i].direction;
            if (dir == 0) continue;
            const std::size_t lower = starts[i - 1] + 1;
            const std::size_t upper = i + 1 < starts.size() ? starts[i + 1] - 1 : span_end;
            const std::size_t s = starts[i];
            const std::size_t lo = std::max(lower, s >= kCorrectionRadius ? s - kCorrectionRadius : 0);
            const std::size_t hi = std::min(upper, s + kCorrectionRadius);
            std::size_t best = lo;
            for (std::size_t j = lo + 1; j <= hi; ++j) {
                const double c = quotes[j].close;
                const double b = quotes[best].close;
                if (dir > 0 ? c < b : c > b) best = j;
            }
            if (best != s) {
                starts[i] = best;
                moved = true;
            }
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].start_date = quotes[starts[i]].date;
        out[i].end_date = quotes[i + 1 < out.size() ? starts[i + 1] - 1 : span_end].date;
    }
    return out;
}

std::string ContradictionStats::to_string() const {
    if (contradicting_positives == 0) return "0";
    char pct[32];
    const double rounded = std::round(pct_of_positives * 10.0) / 10.0;
    if (rounded == std::round(rounded)) {
        std::snprintf(pct, sizeof(pct), "%.0f%%", rounded);
    } else {
        std::snprintf(pct, sizeof(pct), "%.1f%%", rounded);
    }
    return group_thousands(contradicting_positives) + "/ " + pct;
}

double ClassBalance::ratio() const {
    return positives == 0 ? 0.0 : static_cast<double>(negatives) / static_cast<double>(positives);
}

std::string ClassBalance::to_string() const {
    if (positives == 0) return "inf:1";
    char buf[48];
    const double r = ratio();
    if (r < 10.0) {
        std::snprintf(buf, sizeof(buf), "%.2f:1", r);
    } else {
        std::snprintf(buf, sizeof(buf), "%.0f:1", r);
    }
    return buf;
}

Date quantile_split_date(std::vector<Date> dates, double train_fraction) {
    if (dates.empty()) throw EmptyInputError("quantile_split_date: no dates");
    std::sort(dates.begin(), dates.end());
    auto idx = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(dates.size())));
    idx = std::min(idx, dates.size() - 1);
    return dates[idx];
}

}  // namespace trendlab::labels
