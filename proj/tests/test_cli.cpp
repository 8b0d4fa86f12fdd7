#include "test_util.h"
#include "trendlab/cli.h"
#include "trendlab/csv.h"
#include "trendlab/features.h"
#include "trendlab/labels.h"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = trendlab::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(testutil::read(p)); }

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = testutil::read(e.path());
    }
    return files;
}

/// One small synthetic universe shared by the tests below.
class CliFlow : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new testutil::TempDir;
        const auto d = dir_->path().string();
        ASSERT_EQ(run({"--seed", "3", "synth", "--stocks", "3", "--days", "900", "-o", d + "/data"}).code, 0);
        ASSERT_EQ(run({"prepare", "--data", d + "/data", "--experts", "D,G", "--correction", "-o",
                       d + "/prep"}).code, 0);
        ASSERT_EQ(run({"train", "cp", "--prepared", d + "/prep", "-o", d + "/models", "--param",
                       "n_estimators=30", "--param", "max_depth=3"}).code, 0);
        ASSERT_EQ(run({"train", "tof", "--prepared", d + "/prep", "-o", d + "/models"}).code, 0);
    }
    static void TearDownTestSuite() {
        delete dir_;
        dir_ = nullptr;
    }
    static fs::path path(const std::string& name) { return dir_->path() / name; }
    static std::string str(const std::string& name) { return path(name).string(); }

    static testutil::TempDir* dir_;
};

testutil::TempDir* CliFlow::dir_ = nullptr;

}  // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    testutil::TempDir dir;
    const auto r = run({"synth", "--stocks", "0", "-o", (dir / "d").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("usage error"), std::string::npos);
    EXPECT_EQ(run({"train", "xgb", "--prepared", dir.path().string()}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, SynthIsReproducible) {
    testutil::TempDir dir;
    const auto a = (dir / "a").string(), b = (dir / "b").string();
    ASSERT_EQ(run({"--seed", "42", "synth", "--stocks", "2", "--days", "400", "-o", a}).code, 0);
    ASSERT_EQ(run({"--seed", "42", "synth", "--stocks", "2", "--days", "400", "-o", b}).code, 0);
    const auto files = snapshot(a);
    EXPECT_EQ(files, snapshot(b));
    EXPECT_TRUE(files.count("quotes/STK001.csv"));
    EXPECT_TRUE(files.count("labels/STK002__K.csv"));
    EXPECT_TRUE(files.count("truth.json"));
    EXPECT_EQ(files.size(), 2u + 2u * 4u + 1u);
    ASSERT_EQ(run({"--seed", "43", "synth", "--stocks", "2", "--days", "400", "-o", b}).code, 0);
    EXPECT_NE(snapshot(a)["quotes/STK001.csv"], snapshot(b)["quotes/STK001.csv"]);
}

TEST(Cli, ConfigFileAndFlagOverride) {
    testutil::TempDir dir;
    testutil::write(dir / "run.cfg", "seed = 5\n[synth]\nstocks = 1\ndays = 300\nexperts = A\n");
    const auto out = (dir / "d").string();
    ASSERT_EQ(run({"--config", (dir / "run.cfg").string(), "synth", "-o", out}).code, 0);
    EXPECT_EQ(snapshot(out).size(), 3u);
    ASSERT_EQ(run({"--config", (dir / "run.cfg").string(), "synth", "--stocks", "2", "-o", out + "2"}).code, 0);
    EXPECT_EQ(snapshot(out + "2").size(), 5u);
    testutil::write(dir / "bad.cfg", "stocks\n");
    EXPECT_EQ(run({"--config", (dir / "bad.cfg").string(), "synth", "-o", out}).code, 2);
}

TEST_F(CliFlow, PrepareReportMatchesDatasets) {
    const auto report = read_json(path("prep/prep_report.json"));
    EXPECT_EQ(report["options"]["trigger_correction"], true);
    const auto train = trendlab::features::load_cp_rows(path("prep/cp_train.csv"));
    const auto test = trendlab::features::load_cp_rows(path("prep/cp_test.csv"));
    EXPECT_EQ(report["cp"]["train_rows"], train.size());
    EXPECT_EQ(report["cp"]["test_rows"], test.size());
    const auto balance = trendlab::labels::class_balance(std::span<const trendlab::features::CpRow>(train));
    EXPECT_EQ(report["cp"]["train_balance"]["text"], balance.to_string());
    EXPECT_EQ(report["cp"]["train_balance"]["positives"], balance.positives);
    std::vector<trendlab::features::CpRow> all = train;
    all.insert(all.end(), test.begin(), test.end());
    const auto contra = trendlab::labels::count_contradictions(std::span<const trendlab::features::CpRow>(all));
    EXPECT_EQ(report["cp"]["contradictions"]["text"], contra.to_string());
    EXPECT_LE(report["cp"]["contradictions"]["contradicting_positives"].get<std::size_t>(),
              report["cp"]["contradictions_uncorrected"]["contradicting_positives"].get<std::size_t>());
    const auto split = trendlab::Date::parse(report["options"]["split_date"].get<std::string>());
    for (const auto& r : train) EXPECT_LT(r.date, split);
    for (const auto& r : test) EXPECT_GE(r.date, split);
}

TEST_F(CliFlow, AveragingRemovesContradictions) {
    ASSERT_EQ(run({"prepare", "--data", str("data"), "--averaging", "-o", str("prep_avg")}).code, 0);
    const auto report = read_json(path("prep_avg/prep_report.json"));
    EXPECT_EQ(report["cp"]["contradictions"]["text"], "0");
}

TEST_F(CliFlow, TrainUsesMeasuredBalance) {
    const auto prep = read_json(path("prep/prep_report.json"));
    const auto cp = read_json(path("models/cp_report.json"));
    EXPECT_DOUBLE_EQ(cp["params"]["scale_pos_weight"].get<double>(),
                     prep["cp"]["train_balance"]["ratio"].get<double>());
    EXPECT_EQ(cp["params"]["n_estimators"], 30);
    EXPECT_TRUE(cp["test"].contains("f1_macro"));
    const auto tof = read_json(path("models/tof_report.json"));
    EXPECT_EQ(tof["params"]["max_depth"], 5);
    EXPECT_EQ(tof["params"]["reg_lambda"], 3.0);
    EXPECT_TRUE(fs::exists(path("models/cp.json")));
}

TEST_F(CliFlow, GridSearch) {
    testutil::write(path("grid.cfg"), "max_depth = 1, 2\nn_estimators = 5, 10\n");
    const auto a = run({"gridsearch", "tof", "--prepared", str("prep"), "--grid", str("grid.cfg"),
                        "--folds", "3", "--no-timings", "-o", str("search_a")});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(run({"gridsearch", "tof", "--prepared", str("prep"), "--grid", str("grid.cfg"), "--folds",
                   "3", "--no-timings", "-o", str("search_b")}).code, 0);
    const auto csv = testutil::read(path("search_a/search_tof.csv"));
    EXPECT_EQ(csv, testutil::read(path("search_b/search_tof.csv")));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    EXPECT_EQ(read_json(path("search_a/search_tof.json"))["candidates"], 4);

    testutil::write(path("empty.cfg"), "# nothing\n");
    EXPECT_EQ(run({"gridsearch", "tof", "--prepared", str("prep"), "--grid", str("empty.cfg"), "-o",
                   str("search_c")}).code, 2);
}

TEST_F(CliFlow, OracleBacktestMatchesLedger) {
    const auto r = run({"backtest", "--oracle", "--data", str("data"), "--prepared", str("prep"), "--span",
                        "all", "-o", str("bt_oracle")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = read_json(path("bt_oracle/backtest_report.json"));
    const auto& ledger = report["runs"][0]["ledger"];
    EXPECT_TRUE(ledger["matches"].get<bool>());
    EXPECT_NEAR(report["runs"][0]["aggregate"]["Profit"].get<double>(), ledger["profit"].get<double>(), 1e-9);
    EXPECT_TRUE(report["baselines"].contains("truth"));
}

TEST_F(CliFlow, ThresholdSweepWritesOneRunEach) {
    const auto r = run({"backtest", "--data", str("data"), "--prepared", str("prep"), "--models",
                        str("models"), "--cp-threshold", "0.5,0.65,0.85", "-o", str("bt")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = read_json(path("bt/backtest_report.json"));
    ASSERT_EQ(report["runs"].size(), 3u);
    EXPECT_EQ(report["runs"][1]["cp_threshold"], 0.65);
    for (const auto& run_json : report["runs"]) {
        const auto& agg = run_json["aggregate"];
        EXPECT_EQ(agg["Profit"].get<double>(),
                  agg["Profit_lng"].get<double>() + agg["Profit_sht"].get<double>());
    }
    EXPECT_TRUE(fs::exists(path("bt/traces/cp_0.65")));
    EXPECT_TRUE(fs::exists(path("bt/fraction_accuracy.csv")));
    const auto summary = testutil::read(path("bt/backtest_summary.csv"));
    EXPECT_EQ(summary.substr(0, summary.find('\n')),
              "name,cp_threshold,numStocks,num_datapoints,Profit,Days_in,Times_in,DayProfit,YearProfit,YearProfit_avg");
}

TEST_F(CliFlow, MissingModelNamesPath) {
    const auto r = run({"backtest", "--data", str("data"), "--prepared", str("prep"), "--models",
                        str("nowhere"), "-o", str("bt_missing")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("model file not found"), std::string::npos);
    EXPECT_NE(r.err.find(str("nowhere")), std::string::npos);
}

TEST_F(CliFlow, BaselineCommand) {
    ASSERT_EQ(run({"baseline", "--data", str("data"), "--prepared", str("prep"), "-o", str("base")}).code, 0);
    const auto report = read_json(path("base/baseline_report.json"));
    for (const auto* name : {"D", "G", "A", "K", "Average", "truth"}) EXPECT_TRUE(report["baselines"].contains(name)) << name;
}
