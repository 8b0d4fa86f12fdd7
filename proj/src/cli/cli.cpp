#include "trendlab/cli.h"

#include "cli/common.h"
#include "trendlab/error.h"

#include <CLI11.hpp>

namespace trendlab::cli {

namespace {

using Overrides = std::map<std::string, std::string>;

void value_option(CLI::App* app, const std::string& flags, Overrides& o, const std::string& key,
                  const std::string& help) {
    app->add_option_function<std::string>(
        flags, [&o, key](const std::string& v) { o[key] = v; }, help);
}

void switch_option(CLI::App* app, const std::string& flags, Overrides& o, const std::string& key,
                   const std::string& value, const std::string& help) {
    app->add_flag_function(
        flags, [&o, key, value](std::int64_t) { o[key] = value; }, help);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Trend changepoint detection, trend classification and backtesting"};
    app.name("trendlab");
    app.require_subcommand(1);
    app.fallthrough();

    Overrides o;
    std::string config_path;
    app.add_option("--config", config_path, "flat key = value settings file");
    value_option(&app, "--seed", o, "seed", "random seed");
    value_option(&app, "--threads", o, "threads", "worker threads (0 = all)");

    auto* synth = app.add_subcommand("synth", "generate synthetic quotes, expert labels and truth");
    value_option(synth, "-o,--out", o, "synth.out", "output directory (default data)");
    value_option(synth, "--stocks", o, "synth.stocks", "number of stocks (default 5)");
    value_option(synth, "--days", o, "synth.days", "business days per stock (default 2500)");
    value_option(synth, "--experts", o, "synth.experts", "expert names, comma separated");
    value_option(synth, "--jitter", o, "synth.jitter", "boundary jitter in rows for every expert");
    value_option(synth, "--disagree", o, "synth.disagree", "tendency flip probability");
    value_option(synth, "--split-merge", o, "synth.split_merge", "split/merge probability");
    value_option(synth, "--volatility-max", o, "synth.volatility_max", "largest daily volatility");
    value_option(synth, "--volatility-min", o, "synth.volatility_min", "smallest daily volatility");

    auto* prepare = app.add_subcommand("prepare", "build ChangePoints and TrendOrFlat datasets");
    value_option(prepare, "-o,--out", o, "prepare.out", "output directory (default prepared)");
    value_option(prepare, "--data", o, "prepare.data", "synth/data directory (default data)");
    value_option(prepare, "--experts", o, "prepare.experts", "keep only these experts");
    switch_option(prepare, "--averaging", o, "prepare.averaging", "true", "vote across experts");
    switch_option(prepare, "--correction", o, "prepare.trigger_correction", "true",
                  "snap trend starts to local extremes");
    switch_option(prepare, "--log", o, "prepare.log_mode", "true", "log-ratio features (default)");
    switch_option(prepare, "--raw", o, "prepare.log_mode", "false", "plain ratio features");
    value_option(prepare, "--split-date", o, "prepare.split_date", "first test date YYYY-MM-DD");
    switch_option(prepare, "--skip-defects", o, "prepare.skip_defects", "true",
                  "drop defect label files instead of failing");

    std::string which;
    auto* train = app.add_subcommand("train", "train the cp or tof model");
    train->add_option("model", which, "cp or tof")->required();
    value_option(train, "-o,--out", o, "train.out", "model directory (default models)");
    value_option(train, "--prepared", o, "train.prepared", "prepared directory (default prepared)");
    value_option(train, "--threshold", o, "train.threshold", "classification threshold (0.5)");
    train->add_option_function<std::vector<std::string>>(
        "--param",
        [&](const std::vector<std::string>& items) {
            for (const auto& item : items) {
                const auto eq = item.find('=');
                if (eq == std::string::npos) throw CLI::ValidationError("--param", "expected name=value");
                o[which + "." + std::string(trim(item.substr(0, eq)))] =
                    std::string(trim(item.substr(eq + 1)));
            }
        },
        "model parameter override name=value (repeatable)");

    std::string search_which;
    auto* search = app.add_subcommand("gridsearch", "cross-validated grid search");
    search->add_option("model", search_which, "cp or tof")->required();
    value_option(search, "-o,--out", o, "gridsearch.out", "output directory (default search)");
    value_option(search, "--prepared", o, "gridsearch.prepared", "prepared directory");
    value_option(search, "--grid", o, "gridsearch.grid", "grid file: name = v1, v2, ...");
    value_option(search, "--randomized", o, "gridsearch.randomized", "number of random draws");
    value_option(search, "--folds", o, "gridsearch.folds", "cross-validation folds (5)");
    value_option(search, "--scoring", o, "gridsearch.scoring",
                 "f1_macro, roc_auc, accuracy or f1_minority");
    switch_option(search, "--no-timings", o, "gridsearch.timings", "false",
                  "leave fit times out of the CSV");

    auto* backtest = app.add_subcommand("backtest", "run the two-stage pipeline");
    value_option(backtest, "-o,--out", o, "backtest.out", "output directory (default backtest)");
    value_option(backtest, "--data", o, "backtest.data", "data directory (default data)");
    value_option(backtest, "--prepared", o, "backtest.prepared", "prepared directory");
    value_option(backtest, "--models", o, "backtest.models", "model directory (default models)");
    switch_option(backtest, "--oracle", o, "backtest.oracle", "true",
                  "use ground-truth signals from truth.json");
    value_option(backtest, "--cp-threshold", o, "backtest.cp_threshold",
                 "changepoint threshold(s), comma separated");
    value_option(backtest, "--tof-threshold", o, "backtest.tof_threshold", "trend threshold");
    value_option(backtest, "--min-window-days", o, "backtest.min_window_days",
                 "window days before the trend model runs (6)");
    switch_option(backtest, "--hold", o, "backtest.hold_until_changepoint", "true",
                  "keep positions until the next changepoint");
    value_option(backtest, "--split-date", o, "backtest.split_date", "first test date");
    value_option(backtest, "--span", o, "backtest.span", "test (default) or all");
    switch_option(backtest, "--skip-defects", o, "backtest.skip_defects", "true",
                  "drop defect label files");

    auto* baseline = app.add_subcommand("baseline", "expert baselines only");
    value_option(baseline, "-o,--out", o, "baseline.out", "output directory (default baseline)");
    value_option(baseline, "--data", o, "baseline.data", "data directory (default data)");
    value_option(baseline, "--prepared", o, "baseline.prepared", "prepared directory");
    value_option(baseline, "--split-date", o, "baseline.split_date", "first test date");
    value_option(baseline, "--span", o, "baseline.span", "test (default) or all");
    switch_option(baseline, "--skip-defects", o, "baseline.skip_defects", "true",
                  "drop defect label files");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        err << "usage error: " << e.what() << "\n" << "run 'trendlab --help' for usage\n";
        return 2;
    }

    try {
        ConfigFile file = config_path.empty() ? ConfigFile{} : ConfigFile::load(config_path);
        const Settings settings(std::move(file), o);
        if (*synth) return cmd_synth(settings, out);
        if (*prepare) return cmd_prepare(settings, out);
        if (*train) return cmd_train(settings, which, out);
        if (*search) return cmd_gridsearch(settings, search_which, out);
        if (*backtest) return cmd_backtest(settings, out);
        if (*baseline) return cmd_baseline(settings, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace trendlab::cli
