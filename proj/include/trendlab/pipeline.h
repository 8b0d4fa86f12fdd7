#pragma once

#include "trendlab/features.h"
#include "trendlab/gbdt.h"
#include "trendlab/labels.h"
#include "trendlab/market_data.h"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace trendlab::pipeline {

using data::QuoteSeries;
using labels::ExpertWindow;

inline constexpr double kBusinessDaysPerYear = 250.0;

struct PipelineConfig {
    double cp_threshold = 0.5;
    std::size_t min_window_days = 6;
    bool log_mode = true;
    double tof_threshold = 0.5;
    /// Future rows the changepoint features need; a decision about day t is usable at t + 5.
    static constexpr std::size_t cp_lag_days = features::kLag;
    /// Keep a position when the trend model turns flat inside its window.
    bool hold_until_changepoint = false;

    void validate() const;
};

/// Scores day `t` of a series as a changepoint.
class ChangepointScorer {
public:
    virtual ~ChangepointScorer() = default;
    virtual double probability(const QuoteSeries& series, std::size_t t,
                               const features::CpVector& x) const = 0;
};

/// Scores the window prefix [start, today] as a trend.
class TrendScorer {
public:
    virtual ~TrendScorer() = default;
    virtual double probability(const QuoteSeries& series, std::size_t start, std::size_t today,
                               const features::TofFeatures& x) const = 0;
};

class GbdtChangepointScorer final : public ChangepointScorer {
public:
    explicit GbdtChangepointScorer(const gbdt::GbdtModel& model) : model_(model) {}
    double probability(const QuoteSeries&, std::size_t, const features::CpVector& x) const override;

private:
    const gbdt::GbdtModel& model_;
};

class GbdtTrendScorer final : public TrendScorer {
public:
    explicit GbdtTrendScorer(const gbdt::GbdtModel& model) : model_(model) {}
    double probability(const QuoteSeries&, std::size_t, std::size_t,
                       const features::TofFeatures& x) const override;

private:
    const gbdt::GbdtModel& model_;
};

/// Fires (1.0) exactly on the start dates of every window but the first.
class OracleChangepointScorer final : public ChangepointScorer {
public:
    explicit OracleChangepointScorer(std::span<const ExpertWindow> truth);
    double probability(const QuoteSeries& series, std::size_t t,
                       const features::CpVector&) const override;

private:
    std::vector<Date> starts_;
};

/// 1.0 when the true window containing the prefix start is a trend.
class OracleTrendScorer final : public TrendScorer {
public:
    explicit OracleTrendScorer(std::span<const ExpertWindow> truth);
    double probability(const QuoteSeries& series, std::size_t start, std::size_t,
                       const features::TofFeatures&) const override;

private:
    std::vector<ExpertWindow> truth_;
};

/// Adapters for ad hoc scorers (tests, constant models).
class FunctionChangepointScorer final : public ChangepointScorer {
public:
    using Fn = std::function<double(const QuoteSeries&, std::size_t)>;
    explicit FunctionChangepointScorer(Fn fn) : fn_(std::move(fn)) {}
    double probability(const QuoteSeries& s, std::size_t t, const features::CpVector&) const override {
        return fn_(s, t);
    }

private:
    Fn fn_;
};

class FunctionTrendScorer final : public TrendScorer {
public:
    using Fn = std::function<double(const QuoteSeries&, std::size_t, std::size_t)>;
    explicit FunctionTrendScorer(Fn fn) : fn_(std::move(fn)) {}
    double probability(const QuoteSeries& s, std::size_t start, std::size_t today,
                       const features::TofFeatures&) const override {
        return fn_(s, start, today);
    }

private:
    Fn fn_;
};

struct Position {
    std::string stockname;
    int direction = 0;  ///< +1 long, -1 short
    Date entry_date;
    Date exit_date;
    std::size_t entry_row = 0;
    std::size_t exit_row = 0;
    double entry_close = 0.0;
    double exit_close = 0.0;
    double profit = 0.0;  ///< fraction

    /// Business days held, both ends included.
    std::size_t days() const { return exit_row - entry_row + 1; }
};

/// direction * (exit - entry) / entry.
double trend_profit(double entry_close, double exit_close, int direction);

struct StockStats {
    std::string stockname;
    double profit = 0.0;
    std::size_t days_in = 0;
    std::size_t times_in = 0;
    double profit_lng = 0.0;
    std::size_t days_in_lng = 0;
    std::size_t times_in_lng = 0;
    double profit_sht = 0.0;
    std::size_t days_in_sht = 0;
    std::size_t times_in_sht = 0;

    void add(const Position& p);
    /// Adds the split fields of `other`; totals are re-derived from them.
    void merge(const StockStats& other);
};

StockStats stats_from_positions(std::string stockname, std::span<const Position> positions);

struct BacktestReport {
    std::size_t num_stocks = 0;
    std::size_t num_datapoints = 0;
    StockStats totals;
    double day_profit = 0.0;
    double year_profit = 0.0;
    double year_profit_avg = 0.0;
    /// No day was spent in a position, so day_profit and year_profit are reported as 0.
    bool no_days_in = false;
};

/// Totals plus DayProfit = Profit/Days_in, YearProfit = DayProfit*250 and
/// YearProfit_avg = Profit/datapoints*250. Throws ConfigError when num_datapoints is 0.
BacktestReport aggregate(std::span<const StockStats> stats, std::size_t num_datapoints);

enum class PositionState { Flat, Long, Short };
std::string_view to_string(PositionState s);

struct TraceRow {
    Date date;
    double cp_proba = std::numeric_limits<double>::quiet_NaN();
    bool cp_signal = false;
    long window_id = -1;
    double tof_proba = std::numeric_limits<double>::quiet_NaN();
    int tof_signal = -1;  ///< -1 when the trend model was not evaluated
    int direction = 0;    ///< direction of the position held after the day
    PositionState position_state = PositionState::Flat;

    bool operator==(const TraceRow& o) const;
};

struct PipelineResult {
    std::vector<TraceRow> trace;
    std::vector<Position> positions;
    StockStats stats;
};

/// Day-by-day two-stage simulation. On day d the changepoint decision for day
/// d-5 becomes known; a signal closes any open position at d's close and starts
/// a window at d-5. From the 6th window day the trend model scores the window
/// prefix each day; its first positive output opens a position in the direction
/// of the prefix's close slope, latched until the next signal. A later flat
/// output closes the position for the rest of the window unless
/// hold_until_changepoint is set. Open positions close on the last bar.
/// Throws SeriesTooShortError below 11 bars.
PipelineResult run_pipeline(const QuoteSeries& series, const ChangepointScorer& cp,
                            const TrendScorer& tof, const PipelineConfig& cfg);

/// Every Trend window held from its first to its last close, in its direction.
std::vector<Position> expert_positions(const QuoteSeries& series,
                                       std::span<const ExpertWindow> windows);
/// Report over one series; datapoints are the labeled rows.
BacktestReport expert_baseline(const QuoteSeries& series, std::span<const ExpertWindow> windows);

/// CSV: date,cp_proba,cp_signal,window_id,tof_proba,tof_signal,direction,position_state
std::string format_trace(std::span<const TraceRow> trace);

}  // namespace trendlab::pipeline
