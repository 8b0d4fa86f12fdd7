#include "trendlab/pipeline.h"

#include "trendlab/csv.h"
#include "trendlab/error.h"

#include <algorithm>

namespace trendlab::pipeline {

void PipelineConfig::validate() const {
    if (!(cp_threshold > 0.0 && cp_threshold < 1.0)) throw ConfigError("cp_threshold must lie in (0, 1)");
    if (!(tof_threshold > 0.0 && tof_threshold < 1.0)) throw ConfigError("tof_threshold must lie in (0, 1)");
    if (min_window_days < 2) throw ConfigError("min_window_days must be >= 2");
}

double GbdtChangepointScorer::probability(const QuoteSeries&, std::size_t,
                                          const features::CpVector& x) const {
    return gbdt::sigmoid(model_.margin(x));
}

double GbdtTrendScorer::probability(const QuoteSeries&, std::size_t, std::size_t,
                                    const features::TofFeatures& x) const {
    const auto v = x.vector();
    return gbdt::sigmoid(model_.margin(v));
}

OracleChangepointScorer::OracleChangepointScorer(std::span<const ExpertWindow> truth) {
    for (std::size_t i = 1; i < truth.size(); ++i) starts_.push_back(truth[i].start_date);
    std::sort(starts_.begin(), starts_.end());
}

double OracleChangepointScorer::probability(const QuoteSeries& series, std::size_t t,
                                            const features::CpVector&) const {
    return std::binary_search(starts_.begin(), starts_.end(), series[t].date) ? 1.0 : 0.0;
}

OracleTrendScorer::OracleTrendScorer(std::span<const ExpertWindow> truth)
    : truth_(truth.begin(), truth.end()) {}

double OracleTrendScorer::probability(const QuoteSeries& series, std::size_t start, std::size_t,
                                      const features::TofFeatures&) const {
    const Date d = series[start].date;
    for (const auto& w : truth_) {
        if (w.start_date <= d && d <= w.end_date) return w.tendency == data::Tendency::Trend ? 1.0 : 0.0;
    }
    return 0.0;
}

double trend_profit(double entry_close, double exit_close, int direction) {
    return static_cast<double>(direction) * (exit_close - entry_close) / entry_close;
}

void StockStats::add(const Position& p) {
    const auto days = p.days();
    if (p.direction > 0) {
        profit_lng += p.profit;
        days_in_lng += days;
        ++times_in_lng;
    } else {
        profit_sht += p.profit;
        days_in_sht += days;
        ++times_in_sht;
    }
    profit = profit_lng + profit_sht;
    days_in = days_in_lng + days_in_sht;
    times_in = times_in_lng + times_in_sht;
}

void StockStats::merge(const StockStats& o) {
    profit_lng += o.profit_lng;
    days_in_lng += o.days_in_lng;
    times_in_lng += o.times_in_lng;
    profit_sht += o.profit_sht;
    days_in_sht += o.days_in_sht;
    times_in_sht += o.times_in_sht;
    profit = profit_lng + profit_sht;
    days_in = days_in_lng + days_in_sht;
    times_in = times_in_lng + times_in_sht;
}

StockStats stats_from_positions(std::string stockname, std::span<const Position> positions) {
    StockStats s;
    s.stockname = std::move(stockname);
    for (const auto& p : positions) s.add(p);
    return s;
}

BacktestReport aggregate(std::span<const StockStats> stats, std::size_t num_datapoints) {
    if (num_datapoints == 0) throw ConfigError("aggregate: number of datapoints must be positive");
    BacktestReport r;
    r.num_stocks = stats.size();
    r.num_datapoints = num_datapoints;
    r.totals.stockname = "total";
    for (const auto& s : stats) r.totals.merge(s);
    if (r.totals.days_in == 0) {
        r.no_days_in = true;
    } else {
        r.day_profit = r.totals.profit / static_cast<double>(r.totals.days_in);
        r.year_profit = r.day_profit * kBusinessDaysPerYear;
    }
    r.year_profit_avg = r.totals.profit / static_cast<double>(num_datapoints) * kBusinessDaysPerYear;
    return r;
}

std::string_view to_string(PositionState s) {
    switch (s) {
        case PositionState::Long: return "long";
        case PositionState::Short: return "short";
        case PositionState::Flat: break;
    }
    return "flat";
}

bool TraceRow::operator==(const TraceRow& o) const {
    const auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
    return date == o.date && same(cp_proba, o.cp_proba) && cp_signal == o.cp_signal &&
           window_id == o.window_id && same(tof_proba, o.tof_proba) && tof_signal == o.tof_signal &&
           direction == o.direction && position_state == o.position_state;
}

PipelineResult run_pipeline(const QuoteSeries& series, const ChangepointScorer& cp,
                            const TrendScorer& tof, const PipelineConfig& cfg) {
    cfg.validate();
    constexpr std::size_t lag = PipelineConfig::cp_lag_days;
    if (series.size() < 2 * lag + 1) {
        throw SeriesTooShortError(series.stockname + ": pipeline needs at least " +
                                  std::to_string(2 * lag + 1) + " bars, got " +
                                  std::to_string(series.size()));
    }
    PipelineResult result;
    result.trace.reserve(series.size());

    bool window_active = false;
    bool window_done = false;  // this window already produced (and closed) its position
    std::size_t window_start = 0;
    long window_id = -1;
    bool in_position = false;
    Position open;

    const auto close_position = [&](std::size_t d) {
        open.exit_row = d;
        open.exit_date = series[d].date;
        open.exit_close = series[d].close;
        open.profit = trend_profit(open.entry_close, open.exit_close, open.direction);
        result.positions.push_back(open);
        in_position = false;
    };

    for (std::size_t d = 0; d < series.size(); ++d) {
        TraceRow row;
        row.date = series[d].date;

        if (d >= 2 * lag) {
            const std::size_t t = d - lag;
            std::optional<features::CpVector> x;
            try {
                x = features::cp_features(series, t, cfg.log_mode);
            } catch (const ZeroVolumeError&) {
            }
            if (x) {
                row.cp_proba = cp.probability(series, t, *x);
                row.cp_signal = row.cp_proba >= cfg.cp_threshold;
            }
            if (row.cp_signal) {
                if (in_position) close_position(d);
                window_active = true;
                window_done = false;
                window_start = t;
                ++window_id;
            }
        }

        if (window_active && d - window_start + 1 >= cfg.min_window_days) {
            std::optional<features::TofFeatures> x;
            try {
                x = features::tof_features(series, window_start, d, cfg.log_mode);
            } catch (const ZeroVolumeError&) {
            }
            if (x) {
                row.tof_proba = tof.probability(series, window_start, d, *x);
                row.tof_signal = row.tof_proba >= cfg.tof_threshold ? 1 : 0;
                if (in_position) {
                    if (row.tof_signal == 0 && !cfg.hold_until_changepoint) {
                        close_position(d);
                        window_done = true;
                    }
                } else if (!window_done && row.tof_signal == 1) {
                    const int dir = (x->reg_close > 0.0) - (x->reg_close < 0.0);
                    if (dir != 0) {
                        open = Position{};
                        open.stockname = series.stockname;
                        open.direction = dir;
                        open.entry_row = d;
                        open.entry_date = series[d].date;
                        open.entry_close = series[d].close;
                        in_position = true;
                    }
                }
            }
        }

        row.window_id = window_active ? window_id : -1;
        row.direction = in_position ? open.direction : 0;
        row.position_state = !in_position ? PositionState::Flat
                             : open.direction > 0 ? PositionState::Long
                                                  : PositionState::Short;
        result.trace.push_back(row);
    }
    if (in_position) close_position(series.size() - 1);
    result.stats = stats_from_positions(series.stockname, result.positions);
    return result;
}

std::vector<Position> expert_positions(const QuoteSeries& series,
                                       std::span<const ExpertWindow> windows) {
    std::vector<Position> out;
    for (const auto& w : windows) {
        if (w.tendency != data::Tendency::Trend || w.direction == 0) continue;
        const auto first = series.row_of(w.start_date);
        const auto last = series.row_of(w.end_date);
        if (!first || !last) {
            throw InvariantError(series.stockname + ": window " + w.start_date.to_string() +
                                 " is outside the quote series");
        }
        Position p;
        p.stockname = series.stockname;
        p.direction = w.direction;
        p.entry_row = *first;
        p.exit_row = *last;
        p.entry_date = w.start_date;
        p.exit_date = w.end_date;
        p.entry_close = series[*first].close;
        p.exit_close = series[*last].close;
        p.profit = trend_profit(p.entry_close, p.exit_close, p.direction);
        out.push_back(p);
    }
    return out;
}

BacktestReport expert_baseline(const QuoteSeries& series, std::span<const ExpertWindow> windows) {
    const auto positions = expert_positions(series, windows);
    std::size_t datapoints = 0;
    for (const auto& w : windows) {
        const auto first = series.row_of(w.start_date);
        const auto last = series.row_of(w.end_date);
        if (first && last) datapoints += *last - *first + 1;
    }
    const StockStats stats = stats_from_positions(series.stockname, positions);
    return aggregate(std::span<const StockStats>(&stats, 1), std::max<std::size_t>(datapoints, 1));
}

std::string format_trace(std::span<const TraceRow> trace) {
    std::string out = "date,cp_proba,cp_signal,window_id,tof_proba,tof_signal,direction,position_state\n";
    for (const auto& r : trace) {
        out += r.date.to_string();
        out += ',';
        if (!std::isnan(r.cp_proba)) out += csv::format_double(r.cp_proba);
        out += r.cp_signal ? ",1," : ",0,";
        if (r.window_id >= 0) out += std::to_string(r.window_id);
        out += ',';
        if (!std::isnan(r.tof_proba)) out += csv::format_double(r.tof_proba);
        out += ',';
        if (r.tof_signal >= 0) out += std::to_string(r.tof_signal);
        out += ',';
        out += std::to_string(r.direction);
        out += ',';
        out += to_string(r.position_state);
        out += '\n';
    }
    return out;
}

}  // namespace trendlab::pipeline
