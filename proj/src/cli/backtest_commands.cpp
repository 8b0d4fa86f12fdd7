#include "cli/common.h"

#include "trendlab/csv.h"
#include "trendlab/error.h"
#include "trendlab/features.h"
#include "trendlab/parallel.h"
#include "trendlab/pipeline.h"
#include "trendlab/report_json.h"

#include <cmath>
#include <cstdio>
#include <iomanip>

namespace trendlab::cli {

namespace {

using pipeline::BacktestReport;
using pipeline::StockStats;

/// Options recorded by the prepare step, when its report is available.
struct PrepInfo {
    std::optional<Date> split_date;
    std::optional<bool> log_mode;
};

PrepInfo read_prep_report(const fs::path& dir) {
    PrepInfo info;
    const auto path = dir / "prep_report.json";
    if (!fs::is_regular_file(path)) return info;
    try {
        const auto j = nlohmann::json::parse(read_text(path));
        const auto& opts = j.at("options");
        info.split_date = Date::parse(opts.at("split_date").get<std::string>());
        info.log_mode = opts.at("log_mode").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return info;
}

/// Per-stock quote rows the backtest runs over.
struct Universe {
    std::vector<data::QuoteSeries> slices;
    std::vector<std::string> skipped;
    std::optional<Date> split_date;
    bool log_mode = true;
};

Universe make_universe(const Settings& s, const std::string& cmd, const SeriesMap& quotes) {
    Universe u;
    const auto prep = read_prep_report(s.str(cmd + ".prepared", "prepared"));
    u.log_mode = s.flag(cmd + ".log_mode", prep.log_mode.value_or(true));
    const std::string span = s.str(cmd + ".span", "test");
    if (span != "test" && span != "all") throw UsageError("span must be 'test' or 'all'");
    if (span == "test") {
        if (const auto d = s.opt(cmd + ".split_date")) u.split_date = Date::parse(*d);
        else u.split_date = prep.split_date;
        if (!u.split_date) {
            throw UsageError("no split date: run prepare first, pass --split-date, or use --span all");
        }
    }
    for (const auto& [name, series] : quotes) {
        const std::size_t first = u.split_date ? series.lower_bound(*u.split_date) : 0;
        if (series.size() - first < 2 * pipeline::PipelineConfig::cp_lag_days + 1) {
            u.skipped.push_back(name);
            continue;
        }
        u.slices.push_back(series.slice(first, series.size() - 1));
    }
    if (u.slices.empty()) throw EmptyInputError("no stock has enough rows in the backtest span");
    return u;
}

/// Windows of one labeling (an expert, the vote, or the truth) per stock.
using Labeling = std::map<std::string, std::vector<labels::ExpertWindow>>;

BacktestReport labeling_report(const Universe& u, const Labeling& labeling) {
    std::vector<StockStats> stats;
    std::size_t datapoints = 0;
    for (const auto& slice : u.slices) {
        const auto it = labeling.find(slice.stockname);
        if (it == labeling.end()) continue;
        const auto clipped = clip_windows(it->second, slice);
        const auto positions = pipeline::expert_positions(slice, clipped);
        stats.push_back(pipeline::stats_from_positions(slice.stockname, positions));
        for (const auto& w : clipped) {
            datapoints += *slice.row_of(w.end_date) - *slice.row_of(w.start_date) + 1;
        }
    }
    return pipeline::aggregate(stats, std::max<std::size_t>(datapoints, 1));
}

struct Baselines {
    std::vector<std::pair<std::string, BacktestReport>> reports;
};

Baselines compute_baselines(const Settings& s, const std::string& cmd, const SeriesMap& quotes,
                            const Universe& u) {
    Baselines b;
    const fs::path data_dir = s.str(cmd + ".data", "data");
    const auto policy = s.flag(cmd + ".skip_defects", false) ? data::DefectPolicy::Skip
                                                             : data::DefectPolicy::Throw;
    if (fs::is_directory(data_dir / "labels")) {
        const auto merged = load_label_dir(data_dir / "labels", quotes, policy);
        const auto by_stock = windows_by_stock(merged.rows, quotes, {});
        std::map<std::string, Labeling> by_expert;
        Labeling voted;
        for (const auto& [stock, experts] : by_stock) {
            std::vector<labels::ExpertWindow> all;
            for (const auto& [expert, w] : experts) {
                by_expert[expert][stock] = w;
                all.insert(all.end(), w.begin(), w.end());
            }
            voted[stock] = labels::vote_windows(all, quotes.at(stock));
        }
        for (const auto& [expert, labeling] : by_expert) {
            b.reports.emplace_back(expert, labeling_report(u, labeling));
        }
        b.reports.emplace_back("Average", labeling_report(u, voted));
    }
    if (fs::is_regular_file(data_dir / "truth.json")) {
        Labeling truth;
        for (const auto& [stock, t] : load_truth(data_dir / "truth.json")) truth[stock] = t.windows;
        b.reports.emplace_back("truth", labeling_report(u, truth));
    }
    return b;
}

/// The generator's bookkeeping restricted to a slice: truth regimes cut to its rows.
synth::SyntheticSeries clip_truth(const TruthStock& truth, const data::QuoteSeries& slice) {
    synth::SyntheticSeries out;
    out.quotes = slice;
    const Date first = slice[0].date;
    const Date last = slice[slice.size() - 1].date;
    for (std::size_t i = 0; i < truth.windows.size(); ++i) {
        auto w = truth.windows[i];
        if (w.end_date < first || w.start_date > last) continue;
        w.start_date = std::max(w.start_date, first);
        w.end_date = std::min(w.end_date, last);
        synth::Regime r = truth.regimes[i];
        r.first_row = *slice.row_of(w.start_date);
        r.last_row = *slice.row_of(w.end_date);
        r.spec.length = r.last_row - r.first_row + 1;
        out.truth.push_back(w);
        out.regimes.push_back(r);
    }
    return out;
}

std::string threshold_tag(double t) { return "cp_" + csv::format_double(t); }

std::string summary_header() {
    return "name,cp_threshold,numStocks,num_datapoints,Profit,Days_in,Times_in,DayProfit,"
           "YearProfit,YearProfit_avg\n";
}

std::string summary_line(const std::string& name, const std::string& threshold,
                         const BacktestReport& r) {
    const auto f = csv::format_double;
    return name + "," + threshold + "," + std::to_string(r.num_stocks) + "," +
           std::to_string(r.num_datapoints) + "," + f(r.totals.profit) + "," +
           std::to_string(r.totals.days_in) + "," + std::to_string(r.totals.times_in) + "," +
           f(r.day_profit) + "," + f(r.year_profit) + "," + f(r.year_profit_avg) + "\n";
}

void print_line(std::ostream& out, const std::string& name, const BacktestReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-14s profit %9.4f  days_in %6zu  times_in %4zu  "
                  "year_profit %7.2f%%  year_profit_avg %7.2f%%\n",
                  name.c_str(), r.totals.profit, r.totals.days_in, r.totals.times_in,
                  r.year_profit * 100.0, r.year_profit_avg * 100.0);
    out << buf;
}

report::ordered_json baselines_json(const Baselines& b, std::size_t datapoints) {
    report::ordered_json j;
    const std::vector<StockStats> none;
    j["never_trade"] = report::to_json(pipeline::aggregate(none, std::max<std::size_t>(datapoints, 1)));
    for (const auto& [name, r] : b.reports) j[name] = report::to_json(r);
    return j;
}

std::size_t total_rows(const Universe& u) {
    std::size_t n = 0;
    for (const auto& s : u.slices) n += s.size();
    return n;
}

report::ordered_json span_json(const Universe& u) {
    report::ordered_json j;
    j["split_date"] = u.split_date ? u.split_date->to_string() : std::string("");
    j["log_mode"] = u.log_mode;
    j["stocks"] = u.slices.size();
    j["skipped_stocks"] = u.skipped;
    j["datapoints"] = total_rows(u);
    return j;
}

}  // namespace

int cmd_backtest(const Settings& s, std::ostream& out) {
    const fs::path data_dir = s.str("backtest.data", "data");
    const fs::path prepared = s.str("backtest.prepared", "prepared");
    const fs::path models = s.str("backtest.models", "models");
    const fs::path dir = s.str("backtest.out", "backtest");
    const bool oracle = s.flag("backtest.oracle", false);

    pipeline::PipelineConfig cfg;
    cfg.tof_threshold = s.real("backtest.tof_threshold", cfg.tof_threshold);
    const long long min_days = s.integer("backtest.min_window_days", 6);
    if (min_days < 2) throw UsageError("min_window_days must be >= 2");
    cfg.min_window_days = static_cast<std::size_t>(min_days);
    cfg.hold_until_changepoint = s.flag("backtest.hold_until_changepoint", false);
    std::vector<double> thresholds;
    for (const auto& item : s.list("backtest.cp_threshold")) {
        try {
            thresholds.push_back(csv::parse_double(item, "cp_threshold"));
        } catch (const ParseError& e) {
            throw UsageError(e.what());
        }
    }
    if (thresholds.empty()) thresholds.push_back(0.5);

    const auto quotes = load_quote_dir(data_dir / "quotes");
    const auto universe = make_universe(s, "backtest", quotes);
    cfg.log_mode = universe.log_mode;

    gbdt::GbdtModel cp_model, tof_model;
    TruthMap truth;
    if (oracle) {
        truth = load_truth(data_dir / "truth.json");
    } else {
        require_file(models / "cp.json", "model file");
        require_file(models / "tof.json", "model file");
        cp_model = gbdt::load_model(models / "cp.json");
        tof_model = gbdt::load_model(models / "tof.json");
    }

    const std::size_t datapoints = total_rows(universe);
    report::ordered_json j;
    j["span"] = span_json(universe);
    j["oracle"] = oracle;
    j["min_window_days"] = cfg.min_window_days;
    j["tof_threshold"] = cfg.tof_threshold;
    j["hold_until_changepoint"] = cfg.hold_until_changepoint;
    auto& runs = j["runs"] = report::ordered_json::array();
    std::string summary = summary_header();

    out << "backtest: " << universe.slices.size() << " stocks, " << datapoints << " datapoints"
        << (oracle ? ", oracle signals" : "") << "\n";
    for (const double threshold : thresholds) {
        cfg.cp_threshold = threshold;
        try {
            cfg.validate();
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
        const auto& slices = universe.slices;
        std::vector<pipeline::PipelineResult> results(slices.size());
        std::vector<double> ledger(slices.size(), 0.0);
        parallel_for(slices.size(), s.threads(), [&](std::size_t i) {
            const auto& slice = slices[i];
            if (oracle) {
                const auto it = truth.find(slice.stockname);
                if (it == truth.end()) {
                    throw InvariantError("no ground truth for " + slice.stockname);
                }
                const auto bookkeeping = clip_truth(it->second, slice);
                pipeline::OracleChangepointScorer cp(bookkeeping.truth);
                pipeline::OracleTrendScorer tof(bookkeeping.truth);
                results[i] = pipeline::run_pipeline(slice, cp, tof, cfg);
                for (const auto& e : synth::regime_ledger(bookkeeping, cfg.cp_lag_days,
                                                          cfg.min_window_days, cfg.log_mode)) {
                    ledger[i] += e.profit;
                }
            } else {
                pipeline::GbdtChangepointScorer cp(cp_model);
                pipeline::GbdtTrendScorer tof(tof_model);
                results[i] = pipeline::run_pipeline(slice, cp, tof, cfg);
            }
        });

        std::vector<StockStats> stats;
        report::ordered_json stocks = report::ordered_json::array();
        for (std::size_t i = 0; i < slices.size(); ++i) {
            csv::write_text(dir / "traces" / threshold_tag(threshold) / (slices[i].stockname + ".csv"),
                            pipeline::format_trace(results[i].trace));
            stats.push_back(results[i].stats);
            stocks.push_back(report::to_json(results[i].stats));
        }
        const auto agg = pipeline::aggregate(stats, datapoints);
        report::ordered_json run;
        run["cp_threshold"] = threshold;
        run["aggregate"] = report::to_json(agg);
        run["stocks"] = std::move(stocks);
        if (oracle) {
            double ledger_total = 0.0;
            for (double v : ledger) ledger_total += v;
            run["ledger"] = {{"profit", ledger_total},
                             {"matches", std::abs(ledger_total - agg.totals.profit) <= 1e-9}};
        }
        runs.push_back(std::move(run));
        summary += summary_line(oracle ? "oracle" : "model", csv::format_double(threshold), agg);
        print_line(out, (oracle ? "oracle@" : "model@") + csv::format_double(threshold), agg);
    }

    const auto baselines = compute_baselines(s, "backtest", quotes, universe);
    j["baselines"] = baselines_json(baselines, datapoints);
    for (const auto& [name, r] : baselines.reports) {
        summary += summary_line(name, "", r);
        print_line(out, name, r);
    }
    csv::write_text(dir / "backtest_report.json", report::dump(j));
    csv::write_text(dir / "backtest_summary.csv", summary);

    // Trend model accuracy by window fraction on the prepared test rows.
    const auto tof_test = prepared / "tof_test.csv";
    if (!oracle && fs::is_regular_file(tof_test)) {
        const auto rows = features::load_tof_rows(tof_test);
        std::map<int, std::pair<std::size_t, std::size_t>> by_fraction;  // rows, correct
        for (const auto& r : rows) {
            const double p = gbdt::sigmoid(tof_model.margin(r.features));
            const int pred = p >= cfg.tof_threshold ? 1 : 0;
            auto& [n, correct] = by_fraction[r.fraction];
            ++n;
            if (pred == r.target) ++correct;
        }
        std::string text = "fraction,rows,accuracy\n";
        out << "  trend model accuracy by window fraction:";
        for (const auto& [fraction, counts] : by_fraction) {
            const double acc = static_cast<double>(counts.second) / static_cast<double>(counts.first);
            text += std::to_string(fraction) + "," + std::to_string(counts.first) + "," +
                    csv::format_double(acc) + "\n";
            char buf[32];
            std::snprintf(buf, sizeof buf, " %d%%=%.1f%%", fraction, acc * 100.0);
            out << buf;
        }
        out << "\n";
        csv::write_text(dir / "fraction_accuracy.csv", text);
    }
    return 0;
}

int cmd_baseline(const Settings& s, std::ostream& out) {
    const fs::path data_dir = s.str("baseline.data", "data");
    const fs::path dir = s.str("baseline.out", "baseline");
    const auto quotes = load_quote_dir(data_dir / "quotes");
    const auto universe = make_universe(s, "baseline", quotes);
    const auto baselines = compute_baselines(s, "baseline", quotes, universe);
    const std::size_t datapoints = total_rows(universe);

    report::ordered_json j;
    j["span"] = span_json(universe);
    j["baselines"] = baselines_json(baselines, datapoints);
    csv::write_text(dir / "baseline_report.json", report::dump(j));
    std::string summary = summary_header();
    out << "baseline: " << universe.slices.size() << " stocks, " << datapoints << " datapoints\n";
    for (const auto& [name, r] : baselines.reports) {
        summary += summary_line(name, "", r);
        print_line(out, name, r);
    }
    csv::write_text(dir / "baseline_summary.csv", summary);
    return 0;
}

}  // namespace trendlab::cli
