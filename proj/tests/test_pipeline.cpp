#include "test_util.h"
#include "trendlab/error.h"
#include "trendlab/pipeline.h"
#include "trendlab/synth.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace trendlab;
using namespace trendlab::pipeline;
using testutil::series_from_closes;

namespace {

/// Changepoint score from the jump between the closes around day t.
class JumpScorer final : public ChangepointScorer {
public:
    double probability(const QuoteSeries&, std::size_t, const features::CpVector& x) const override {
        return 1.0 / (1.0 + std::exp(-200.0 * (x[5] - x[0] - 0.01)));
    }
};

/// Trend score from the fit quality of the prefix.
class FitScorer final : public TrendScorer {
public:
    double probability(const QuoteSeries&, std::size_t, std::size_t,
                       const features::TofFeatures& x) const override {
        return x.close_r2;
    }
};

synth::SyntheticSeries clean_series(std::uint64_t seed, std::size_t days = 1500) {
    synth::SamplerConfig sc;
    sc.days = days;
    sc.volatility_min = 0.004;
    sc.volatility_max = 0.008;
    synth::SeriesConfig cfg;
    cfg.stockname = "SYN" + std::to_string(seed);
    return synth::gen_series(synth::sample_regimes(sc, seed), cfg, seed + 1000);
}

data::QuoteSeries random_walk(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, 0.015);
    std::vector<double> closes;
    double p = 40.0;
    for (std::size_t i = 0; i < n; ++i) {
        p *= std::exp(step(rng) + (i / 60 % 2 ? 0.004 : -0.004));
        closes.push_back(p);
    }
    return series_from_closes(closes, "RW" + std::to_string(seed));
}

const FunctionChangepointScorer never_cp([](const QuoteSeries&, std::size_t) { return 0.0; });
const FunctionChangepointScorer always_cp([](const QuoteSeries&, std::size_t) { return 1.0; });
const FunctionTrendScorer always_trend([](const QuoteSeries&, std::size_t, std::size_t) { return 1.0; });
const FunctionTrendScorer never_trend([](const QuoteSeries&, std::size_t, std::size_t) { return 0.0; });

void expect_additive(const StockStats& s) {
    EXPECT_EQ(s.profit, s.profit_lng + s.profit_sht);
    EXPECT_EQ(s.days_in, s.days_in_lng + s.days_in_sht);
    EXPECT_EQ(s.times_in, s.times_in_lng + s.times_in_sht);
}

}  // namespace

TEST(TrendProfit, Examples) {
    EXPECT_DOUBLE_EQ(trend_profit(100.0, 110.0, 1), 0.10);
    EXPECT_DOUBLE_EQ(trend_profit(100.0, 90.0, -1), 0.10);
    EXPECT_EQ(trend_profit(57.3, 57.3, 1), 0.0);
    EXPECT_EQ(trend_profit(57.3, 57.3, -1), 0.0);
}

TEST(TrendProfit, Antisymmetric) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1.0, 500.0);
    for (int i = 0; i < 1000; ++i) {
        const double e = u(rng), x = u(rng);
        EXPECT_EQ(trend_profit(e, x, 1), -trend_profit(e, x, -1));
    }
}

TEST(Aggregate, PaperArithmetic) {
    StockStats s;
    s.profit = s.profit_lng = 0.10;
    s.days_in = s.days_in_lng = 125;
    s.times_in = s.times_in_lng = 1;
    const auto r = aggregate(std::span<const StockStats>(&s, 1), 500);
    EXPECT_DOUBLE_EQ(r.day_profit, 0.0008);
    EXPECT_DOUBLE_EQ(r.year_profit, 0.20);
    EXPECT_DOUBLE_EQ(r.year_profit_avg, 0.05);
    EXPECT_EQ(r.day_profit, r.totals.profit / r.totals.days_in);
    EXPECT_EQ(r.year_profit, r.day_profit * 250.0);
    EXPECT_FALSE(r.no_days_in);
}

TEST(Aggregate, EmptyLedger) {
    const std::vector<StockStats> stats(3);
    const auto r = aggregate(stats, 100);
    EXPECT_TRUE(r.no_days_in);
    EXPECT_EQ(r.day_profit, 0.0);
    EXPECT_EQ(r.year_profit, 0.0);
    EXPECT_EQ(r.year_profit_avg, 0.0);
    EXPECT_EQ(r.num_stocks, 3u);
    EXPECT_THROW(aggregate(stats, 0), ConfigError);
}

TEST(Aggregate, MergesSplitFields) {
    Position a{"X", 1, {}, {}, 0, 9, 100.0, 110.0, 0.1};
    Position b{"X", -1, {}, {}, 20, 24, 100.0, 95.0, 0.05};
    const auto s = stats_from_positions("X", std::vector<Position>{a, b});
    EXPECT_EQ(s.days_in_lng, 10u);
    EXPECT_EQ(s.days_in_sht, 5u);
    EXPECT_EQ(s.times_in, 2u);
    expect_additive(s);
    const auto r = aggregate(std::vector<StockStats>{s, s}, 100);
    EXPECT_EQ(r.totals.days_in, 30u);
    expect_additive(r.totals);
}

TEST(RunPipeline, NeverFiringChangepointsNeverTrade) {
    const auto q = random_walk(2, 300);
    const auto r = run_pipeline(q, never_cp, always_trend, {});
    EXPECT_TRUE(r.positions.empty());
    EXPECT_EQ(r.stats.profit, 0.0);
    EXPECT_EQ(r.stats.days_in, 0u);
    EXPECT_EQ(r.trace.size(), q.size());
    for (const auto& row : r.trace) EXPECT_EQ(row.window_id, -1);
}

TEST(RunPipeline, FlatTrendModelNeverTrades) {
    const auto q = random_walk(3, 300);
    const auto r = run_pipeline(q, always_cp, never_trend, {});
    EXPECT_TRUE(r.positions.empty());
    EXPECT_EQ(r.trace.back().window_id, static_cast<long>(q.size()) - 11);
}

TEST(RunPipeline, SingleSignalOpensAfterMinimumWindow) {
    const auto q = random_walk(4, 200);
    const FunctionChangepointScorer at20([](const QuoteSeries&, std::size_t t) { return t == 20 ? 0.9 : 0.1; });
    const auto r = run_pipeline(q, at20, always_trend, {});
    ASSERT_EQ(r.positions.size(), 1u);
    const auto& p = r.positions[0];
    EXPECT_EQ(p.entry_row, 25u);
    EXPECT_EQ(p.exit_row, 199u);
    EXPECT_EQ(p.days(), 175u);
    const auto fit = features::tof_features(q, 20, 25, true);
    EXPECT_EQ(p.direction, fit.reg_close > 0 ? 1 : -1);
    EXPECT_DOUBLE_EQ(p.profit, trend_profit(q[25].close, q[199].close, p.direction));
    EXPECT_TRUE(r.trace[24].cp_signal == false && r.trace[25].cp_signal);
    EXPECT_EQ(r.trace[25].tof_signal, 1);
    EXPECT_EQ(r.trace[24].tof_signal, -1);

    PipelineConfig cfg;
    cfg.min_window_days = 10;
    EXPECT_EQ(run_pipeline(q, at20, always_trend, cfg).positions.at(0).entry_row, 29u);
}

TEST(RunPipeline, FlatOutputClosesUnlessHolding) {
    const auto q = random_walk(5, 200);
    const FunctionChangepointScorer at20([](const QuoteSeries&, std::size_t t) { return t == 20 ? 0.9 : 0.1; });
    const FunctionTrendScorer early([](const QuoteSeries&, std::size_t, std::size_t today) {
        return today < 40 || today > 60 ? 1.0 : 0.0;
    });
    const auto r = run_pipeline(q, at20, early, {});
    ASSERT_EQ(r.positions.size(), 1u);
    EXPECT_EQ(r.positions[0].exit_row, 40u);
    PipelineConfig hold;
    hold.hold_until_changepoint = true;
    const auto h = run_pipeline(q, at20, early, hold);
    ASSERT_EQ(h.positions.size(), 1u);
    EXPECT_EQ(h.positions[0].exit_row, 199u);
}

TEST(RunPipeline, NewSignalClosesOpenPosition) {
    const auto q = random_walk(6, 200);
    const FunctionChangepointScorer two([](const QuoteSeries&, std::size_t t) {
        return t == 20 || t == 80 ? 0.9 : 0.1;
    });
    const auto r = run_pipeline(q, two, always_trend, {});
    ASSERT_EQ(r.positions.size(), 2u);
    EXPECT_EQ(r.positions[0].exit_row, 85u);
    EXPECT_EQ(r.positions[1].entry_row, 85u);
    expect_additive(r.stats);
}

TEST(RunPipeline, TooShort) {
    EXPECT_THROW(run_pipeline(random_walk(7, 10), never_cp, never_trend, {}), SeriesTooShortError);
    EXPECT_NO_THROW(run_pipeline(random_walk(7, 11), never_cp, never_trend, {}));
}

TEST(RunPipeline, OracleMatchesGeneratorLedger) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto s = clean_series(seed);
        const OracleChangepointScorer cp(s.truth);
        const OracleTrendScorer tof(s.truth);
        const auto r = run_pipeline(s.quotes, cp, tof, {});
        const auto ledger = synth::regime_ledger(s);
        ASSERT_EQ(r.positions.size(), ledger.size()) << "seed " << seed;
        double ledger_profit = 0.0;
        for (std::size_t i = 0; i < ledger.size(); ++i) {
            EXPECT_EQ(r.positions[i].entry_row, ledger[i].entry_row);
            EXPECT_EQ(r.positions[i].exit_row, ledger[i].exit_row);
            EXPECT_EQ(r.positions[i].direction, ledger[i].direction);
            ledger_profit += ledger[i].profit;
        }
        EXPECT_NEAR(r.stats.profit, ledger_profit, 1e-9);
        expect_additive(r.stats);
    }
}

TEST(RunPipeline, NoLookAhead) {
    const auto q = random_walk(8, 400);
    const JumpScorer cp;
    const FitScorer tof;
    const auto full = run_pipeline(q, cp, tof, {});
    for (std::size_t cut = 11; cut < q.size(); cut += 17) {
        const auto part = run_pipeline(q.slice(0, cut - 1), cp, tof, {});
        ASSERT_EQ(part.trace.size(), cut);
        for (std::size_t d = 0; d < cut; ++d) EXPECT_TRUE(part.trace[d] == full.trace[d]) << "day " << d;
        for (const auto& p : part.positions) {
            if (p.exit_row + 1 < cut) {
                const auto it = std::find_if(full.positions.begin(), full.positions.end(),
                                             [&](const Position& f) { return f.entry_row == p.entry_row; });
                ASSERT_NE(it, full.positions.end());
                EXPECT_EQ(it->exit_row, p.exit_row);
                EXPECT_EQ(it->profit, p.profit);
            }
        }
    }
}

TEST(RunPipeline, HigherThresholdEntriesAreSubset) {
    // With a trend model that answers on the first evaluable day, every window
    // opened at the higher threshold also trades at the lower one.
    std::size_t checked = 0;
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
        const auto q = random_walk(seed, 500);
        const JumpScorer cp;
        PipelineConfig lo, hi;
        lo.cp_threshold = 0.5;
        hi.cp_threshold = 0.9;
        const auto a = run_pipeline(q, cp, always_trend, lo);
        const auto b = run_pipeline(q, cp, always_trend, hi);
        EXPECT_LE(b.positions.size(), a.positions.size());
        checked += b.positions.size();
        for (const auto& p : b.positions) {
            const bool found = std::any_of(a.positions.begin(), a.positions.end(),
                                           [&](const Position& x) { return x.entry_row == p.entry_row; });
            EXPECT_TRUE(found) << "entry " << p.entry_row;
        }
    }
    EXPECT_GT(checked, 10u);
}

TEST(RunPipeline, PriceScalingKeepsProfits) {
    const auto q = random_walk(9, 400);
    auto scaled = q;
    for (auto& b : scaled.bars) {
        b.open *= 4.0;
        b.high *= 4.0;
        b.low *= 4.0;
        b.close *= 4.0;
    }
    const JumpScorer cp;
    const FitScorer tof;
    const auto a = run_pipeline(q, cp, tof, {});
    const auto b = run_pipeline(scaled, cp, tof, {});
    ASSERT_EQ(a.positions.size(), b.positions.size());
    ASSERT_FALSE(a.positions.empty());
    for (std::size_t i = 0; i < a.positions.size(); ++i) {
        EXPECT_NEAR(a.positions[i].profit, b.positions[i].profit, 1e-12);
    }
}

TEST(RunPipeline, TraceCsv) {
    const auto q = random_walk(11, 30);
    const FunctionChangepointScorer at3([](const QuoteSeries&, std::size_t t) { return t == 5 ? 0.75 : 0.25; });
    const auto r = run_pipeline(q, at3, always_trend, {});
    const auto text = format_trace(r.trace);
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    ASSERT_EQ(lines.size(), 31u);
    EXPECT_EQ(lines[0], "date,cp_proba,cp_signal,window_id,tof_proba,tof_signal,direction,position_state");
    EXPECT_EQ(lines[1], q[0].date.to_string() + ",,0,,,,0,flat");
    const std::string dir = std::to_string(r.positions.at(0).direction);
    const std::string state = r.positions[0].direction > 0 ? "long" : "short";
    EXPECT_EQ(lines[11], q[10].date.to_string() + ",0.75,1,0,1,1," + dir + "," + state);
    EXPECT_EQ(lines[12], q[11].date.to_string() + ",0.25,0,0,1,1," + dir + "," + state);
}

TEST(ExpertBaseline, SingleUpYear) {
    std::vector<double> closes;
    for (int i = 0; i < 250; ++i) closes.push_back(100.0 * std::pow(1.5, i / 249.0));
    auto q = series_from_closes(closes);
    q.bars.back().close = q.bars.back().open = 150.0;
    q.bars.back().high = 151.5;
    q.bars.back().low = 148.5;
    const std::vector<labels::ExpertWindow> w{
        {"ACME", "D", q[0].date, q[249].date, data::Tendency::Trend, 1}};
    const auto r = expert_baseline(q, w);
    EXPECT_DOUBLE_EQ(r.totals.profit, 0.5);
    EXPECT_EQ(r.totals.days_in, 250u);
    EXPECT_DOUBLE_EQ(r.year_profit, 0.5);
    EXPECT_DOUBLE_EQ(r.year_profit_avg, 0.5);
}

TEST(ExpertBaseline, AllFlatAndDownTrend) {
    const auto q = random_walk(12, 120);
    const std::vector<labels::ExpertWindow> flat{
        {q.stockname, "D", q[0].date, q[119].date, data::Tendency::Flat, 0}};
    const auto r = expert_baseline(q, flat);
    EXPECT_EQ(r.totals.profit, 0.0);
    EXPECT_TRUE(r.no_days_in);
    const std::vector<labels::ExpertWindow> down{
        {q.stockname, "D", q[0].date, q[59].date, data::Tendency::Flat, 0},
        {q.stockname, "D", q[60].date, q[119].date, data::Tendency::Trend, -1}};
    const auto p = expert_positions(q, down);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].entry_row, 60u);
    EXPECT_EQ(p[0].exit_row, 119u);
    EXPECT_DOUBLE_EQ(p[0].profit, (q[60].close - q[119].close) / q[60].close);
}
