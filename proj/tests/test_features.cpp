#include "oracles.h"
#include "test_util.h"
#include "trendlab/error.h"
#include "trendlab/features.h"
#include "trendlab/regression.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace trendlab;
using namespace trendlab::features;
using testutil::series_from_closes;

namespace {

data::QuoteSeries random_series(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> step(0.0, 0.02);
    std::uniform_real_distribution<double> vol(500.0, 5000.0);
    data::QuoteSeries s;
    s.stockname = "RND";
    Date d(2012, 1, 2);
    double p = 50.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double open = p;
        p *= std::exp(step(rng));
        s.bars.push_back({d, open, std::max(open, p) * 1.01, std::min(open, p) * 0.99, p,
                          std::round(vol(rng))});
        d = d.next_business_day();
    }
    return s;
}

labels::ExpertWindow window_over(const data::QuoteSeries& q, std::size_t first, std::size_t last,
                                 data::Tendency t = data::Tendency::Trend) {
    return {q.stockname, "D", q[first].date, q[last].date, t, t == data::Tendency::Trend ? 1 : 0};
}

}  // namespace

TEST(CpFeatures, ConstantSeries) {
    const auto q = series_from_closes(std::vector<double>(11, 100.0));
    const auto log = cp_features(q, 5, true);
    ASSERT_TRUE(log.has_value());
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ((*log)[i], 0.0);
    const auto raw = cp_features(q, 5, false);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ((*raw)[i], 1.0);
    EXPECT_DOUBLE_EQ((*raw)[20], 1.01);
    EXPECT_DOUBLE_EQ((*raw)[21], 0.99);
}

TEST(CpFeatures, PreviousCloseRatio) {
    std::vector<double> closes(11, 100.0);
    closes[4] = 95.0;
    const auto q = series_from_closes(closes);
    EXPECT_DOUBLE_EQ((*cp_features(q, 5, false))[0], 0.95);
    EXPECT_NEAR((*cp_features(q, 5, true))[0], -0.0513, 1e-4);
    EXPECT_DOUBLE_EQ((*cp_features(q, 5, true))[0], std::log(0.95));
}

TEST(CpFeatures, FeatureOrderMatchesNames) {
    std::vector<double> closes;
    for (int i = 0; i < 11; ++i) closes.push_back(100.0 + i);
    auto q = series_from_closes(closes);
    for (std::size_t i = 0; i < q.size(); ++i) q.bars[i].volume = 1000.0 + 10.0 * static_cast<double>(i);
    const auto f = *cp_features(q, 5, false);
    const auto& names = cp_feature_names();
    ASSERT_EQ(names.size(), 22u);
    EXPECT_EQ(names[0], "close_m1");
    EXPECT_DOUBLE_EQ(f[0], 104.0 / 105.0);
    EXPECT_EQ(names[9], "close_p5");
    EXPECT_DOUBLE_EQ(f[9], 110.0 / 105.0);
    EXPECT_EQ(names[14], "volume_m5");
    EXPECT_DOUBLE_EQ(f[14], 1000.0 / 1050.0);
    EXPECT_EQ(names[15], "volume_p1");
    EXPECT_DOUBLE_EQ(f[15], 1060.0 / 1050.0);
}

TEST(CpFeatures, SkipsRowsWithoutFullContext) {
    const auto q = series_from_closes(std::vector<double>(11, 100.0));
    EXPECT_FALSE(cp_features(q, 4, true).has_value());
    EXPECT_FALSE(cp_features(q, 6, true).has_value());
    EXPECT_TRUE(cp_features(q, 5, true).has_value());
}

TEST(CpFeatures, ZeroVolume) {
    auto q = series_from_closes(std::vector<double>(11, 100.0));
    q.bars[2].volume = 0.0;
    EXPECT_THROW(cp_features(q, 5, true), ZeroVolumeError);
    EXPECT_NO_THROW(cp_features(q, 5, false));
    q.bars[5].volume = 0.0;
    EXPECT_THROW(cp_features(q, 5, false), ZeroVolumeError);
}

TEST(CpFeatures, LogIsElementwiseLogOfRaw) {
    std::mt19937_64 rng(1);
    const auto q = random_series(rng, 60);
    for (std::size_t t = 5; t + 5 < q.size(); ++t) {
        const auto raw = *cp_features(q, t, false);
        const auto log = *cp_features(q, t, true);
        for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_EQ(log[i], std::log(raw[i]));
    }
}

TEST(CpFeatures, ScaleInvariant) {
    std::mt19937_64 rng(2);
    const auto q = random_series(rng, 40);
    auto scaled = q;
    for (auto& b : scaled.bars) {
        b.open *= 3.7;
        b.high *= 3.7;
        b.low *= 3.7;
        b.close *= 3.7;
        b.volume *= 11.0;
    }
    for (std::size_t t = 5; t + 5 < q.size(); ++t) {
        const auto a = *cp_features(q, t, true);
        const auto b = *cp_features(scaled, t, true);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    }
}

TEST(FitLine, MatchesNormalEquationOracle) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> y(10);
        for (auto& v : y) v = u(rng);
        const auto fit = fit_line(y);
        const auto ref = oracle::ols_normal_equations(y);
        EXPECT_NEAR(fit.slope, ref.slope, 1e-12);
        EXPECT_NEAR(fit.intercept, ref.intercept, 1e-12);
        EXPECT_NEAR(fit.r2, ref.r2, 1e-12);
    }
}

TEST(FitLine, DegenerateCases) {
    EXPECT_THROW(fit_line(std::vector<double>{1.0}), TooShortError);
    const auto flat = fit_line(std::vector<double>{4.0, 4.0, 4.0});
    EXPECT_EQ(flat.slope, 0.0);
    EXPECT_EQ(flat.r2, 0.0);
    const auto two = fit_line(std::vector<double>{1.0, 3.0});
    EXPECT_DOUBLE_EQ(two.slope, 2.0);
    EXPECT_DOUBLE_EQ(two.r2, 1.0);
}

TEST(TofFeatures, ExactExponentialLine) {
    std::vector<double> closes, volumes;
    for (int i = 0; i < 30; ++i) {
        closes.push_back(std::exp(0.01 * i));
        volumes.push_back(1000.0);
    }
    const auto f = tof_features(closes, volumes, true);
    EXPECT_NEAR(f.reg_close, 0.01, 1e-12);
    EXPECT_NEAR(f.close_r2, 1.0, 1e-12);
    EXPECT_EQ(f.reg_vol, 0.0);
    EXPECT_EQ(f.vol_r2, 0.0);
    EXPECT_EQ(f.len_trend, 30u);
}

TEST(TofFeatures, ConstantClosesAndShortInput) {
    const std::vector<double> c(8, 10.0), v(8, 5.0);
    const auto f = tof_features(c, v, true);
    EXPECT_EQ(f.reg_close, 0.0);
    EXPECT_EQ(f.close_r2, 0.0);
    EXPECT_THROW(tof_features(std::vector<double>{1.0}, std::vector<double>{1.0}, true), TooShortError);
}

TEST(TofFeatures, PriceScalingLeavesLogFeaturesUnchanged) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto q = random_series(rng, 25);
        auto closes = q.closes();
        const auto volumes = q.volumes();
        const auto a = tof_features(closes, volumes, true);
        for (auto& c : closes) c *= 123.4;
        const auto b = tof_features(closes, volumes, true);
        EXPECT_NEAR(a.reg_close, b.reg_close, 1e-12);
        EXPECT_NEAR(a.close_r2, b.close_r2, 1e-9);
        EXPECT_GE(a.close_r2, 0.0);
        EXPECT_LE(a.close_r2, 1.0);
        EXPECT_GE(a.vol_r2, 0.0);
        EXPECT_LE(a.vol_r2, 1.0);
    }
}

TEST(TofFeatures, SlopeSignIsCovarianceSign) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto q = random_series(rng, 12);
        const auto closes = q.closes();
        const auto f = tof_features(closes, q.volumes(), true);
        double mean_x = 5.5, mean_y = 0.0, cov = 0.0;
        for (double c : closes) mean_y += std::log(c) / 12.0;
        for (std::size_t i = 0; i < 12; ++i) cov += (i - mean_x) * (std::log(closes[i]) - mean_y);
        EXPECT_EQ(f.reg_close > 0.0, cov > 0.0);
    }
}

TEST(AugmentFractions, HundredDayWindowDropsFivePercent) {
    std::mt19937_64 rng(6);
    const auto q = random_series(rng, 100);
    const auto rows = augment_fractions(window_over(q, 0, 99), q, true);
    ASSERT_EQ(rows.size(), 10u);
    EXPECT_EQ(rows.front().fraction, 10);
    EXPECT_EQ(rows.front().len_trend(), 10.0);
    EXPECT_EQ(rows.back().fraction, 100);
    EXPECT_EQ(rows.back().len_trend(), 100.0);
    EXPECT_EQ(rows.back().date, q[99].date);
}

TEST(AugmentFractions, ShortWindowYieldsNothing) {
    std::mt19937_64 rng(7);
    const auto q = random_series(rng, 4);
    EXPECT_TRUE(augment_fractions(window_over(q, 0, 3), q, true).empty());
}

TEST(AugmentFractions, SixHundredDaysKeepsAllFractions) {
    std::mt19937_64 rng(8);
    const auto q = random_series(rng, 600);
    const auto rows = augment_fractions(window_over(q, 0, 599), q, true);
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows.front().len_trend(), 30.0);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].len_trend(), rows[i - 1].len_trend());
    for (const auto& r : rows) EXPECT_GE(r.len_trend(), 6.0);
}

TEST(AugmentFractions, RoundHalfUp) {
    EXPECT_EQ(fraction_length(130, 5), 7u);  // 6.5 -> 7
    EXPECT_EQ(fraction_length(110, 5), 6u);  // 5.5 -> 6
    EXPECT_EQ(fraction_length(10, 5), 2u);   // minimum 2
}

TEST(BuildRows, CpTargetsFollowWindowStarts) {
    std::mt19937_64 rng(9);
    const auto q = random_series(rng, 40);
    std::vector<labels::ExpertWindow> w{window_over(q, 0, 19), window_over(q, 20, 39, data::Tendency::Flat)};
    std::size_t skipped = 0;
    const auto rows = build_cp_rows(w, q, true, &skipped);
    EXPECT_EQ(rows.size(), 30u);  // rows 5..34
    std::size_t positives = 0;
    for (const auto& r : rows) {
        positives += r.target;
        if (r.target) EXPECT_EQ(r.date, q[20].date);
    }
    EXPECT_EQ(positives, 1u);
    EXPECT_EQ(skipped, 0u);
}

TEST(BuildRows, DedupKeepsFirstOfIdenticalRows) {
    std::vector<CpRow> rows(3);
    rows[0].features[0] = 1.0;
    rows[1].features[0] = 1.0;
    rows[2].features[0] = 1.0;
    rows[2].target = 1;
    rows[0].stockname = "first";
    const auto out = dedup_rows(std::span<const CpRow>(rows));
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].stockname, "first");
}

TEST(DatasetCsv, RoundTripExact) {
    testutil::TempDir dir;
    std::mt19937_64 rng(10);
    const auto q = random_series(rng, 200);
    std::vector<labels::ExpertWindow> w{window_over(q, 0, 99), window_over(q, 100, 199, data::Tendency::Flat)};
    const auto cp = build_cp_rows(w, q, true);
    write_cp_rows(dir / "cp.csv", cp);
    const auto cp_back = load_cp_rows(dir / "cp.csv");
    ASSERT_EQ(cp_back.size(), cp.size());
    for (std::size_t i = 0; i < cp.size(); ++i) {
        EXPECT_EQ(cp_back[i].features, cp[i].features);
        EXPECT_EQ(cp_back[i].target, cp[i].target);
        EXPECT_EQ(cp_back[i].date, cp[i].date);
    }
    const auto tof = build_tof_rows(w, q, true);
    write_tof_rows(dir / "tof.csv", tof);
    const auto tof_back = load_tof_rows(dir / "tof.csv");
    ASSERT_EQ(tof_back.size(), tof.size());
    for (std::size_t i = 0; i < tof.size(); ++i) {
        EXPECT_EQ(tof_back[i].features, tof[i].features);
        EXPECT_EQ(tof_back[i].fraction, tof[i].fraction);
        EXPECT_EQ(tof_back[i].window_start, tof[i].window_start);
        EXPECT_EQ(tof_back[i].expert, tof[i].expert);
    }
}
