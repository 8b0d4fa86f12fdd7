#include "cli/common.h"

#include "trendlab/csv.h"
#include "trendlab/error.h"
#include "trendlab/evaluation.h"
#include "trendlab/features.h"
#include "trendlab/report_json.h"

#include <cstdio>
#include <iomanip>

namespace trendlab::cli {

namespace {

struct Dataset {
    Matrix X;
    std::vector<std::uint8_t> y;
};

template <class Row>
Dataset to_dataset(const std::vector<Row>& rows) {
    Dataset d;
    for (const auto& r : rows) {
        d.X.push_row(r.features);
        d.y.push_back(r.target);
    }
    return d;
}

struct TrainTest {
    Dataset train;
    Dataset test;
};

TrainTest load_prepared(const fs::path& dir, const std::string& which) {
    const auto train = dir / (which + "_train.csv");
    const auto test = dir / (which + "_test.csv");
    require_file(train, "training set");
    require_file(test, "test set");
    if (which == "cp") {
        return {to_dataset(features::load_cp_rows(train)), to_dataset(features::load_cp_rows(test))};
    }
    return {to_dataset(features::load_tof_rows(train)), to_dataset(features::load_tof_rows(test))};
}

void check_which(const std::string& which) {
    if (which != "cp" && which != "tof") {
        throw UsageError("unknown model '" + which + "' (expected cp or tof)");
    }
}

double balance_of(std::span<const std::uint8_t> y) {
    std::size_t pos = 0;
    for (auto v : y) pos += v;
    return pos == 0 ? 0.0 : static_cast<double>(y.size() - pos) / static_cast<double>(pos);
}

report::ordered_json params_json(const gbdt::GbdtParams& p) {
    report::ordered_json j;
    for (const auto& name : gbdt::param_names()) {
        const double v = gbdt::get_param(p, name);
        if (name == "n_estimators" || name == "max_depth") j[name] = static_cast<long long>(v);
        else if (name == "seed") j[name] = p.seed;
        else j[name] = v;
    }
    return j;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%5.1f%%", v * 100.0);
    return buf;
}

void print_report_row(std::ostream& out, const std::string& set, const eval::ClassReport& r) {
    out << "  " << std::left << std::setw(6) << set << std::right
        << "  auc " << (r.auc ? pct(*r.auc) : std::string("   n/a"))
        << "  f1_macro " << pct(r.f1_macro) << "  accuracy " << pct(r.accuracy)
        << "  | 0: p " << pct(r.classes[0].precision) << " r " << pct(r.classes[0].recall)
        << " f1 " << pct(r.classes[0].f1) << "  | 1: p " << pct(r.classes[1].precision) << " r "
        << pct(r.classes[1].recall) << " f1 " << pct(r.classes[1].f1) << "\n";
}

}  // namespace

int cmd_train(const Settings& s, const std::string& which, std::ostream& out) {
    check_which(which);
    const fs::path prepared = s.str("train.prepared", "prepared");
    const fs::path dir = s.str("train.out", "models");
    const double threshold = s.real("train.threshold", 0.5);
    if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold must lie in (0, 1)");

    const auto data = load_prepared(prepared, which);
    const double balance = balance_of(data.train.y);
    const auto params = model_params(s, which, balance);

    gbdt::FitReport fit_report;
    const auto model = gbdt::fit(data.train.X, data.train.y, params, &fit_report);
    gbdt::save_model(dir / (which + ".json"), model);

    const auto evaluate = [&](const Dataset& d) {
        const auto proba = gbdt::predict_proba(model, d.X);
        const auto pred = gbdt::classify(proba, threshold);
        return eval::class_report(pred, d.y, proba);
    };
    const auto train_report = evaluate(data.train);
    const auto test_report = evaluate(data.test);

    report::ordered_json j;
    j["model"] = which;
    j["params"] = params_json(params);
    j["train_balance"] = balance;
    j["threshold"] = threshold;
    j["single_class_training"] = fit_report.single_class;
    j["train"] = report::to_json(train_report);
    j["test"] = report::to_json(test_report);
    csv::write_text(dir / (which + "_report.json"), report::dump(j));

    out << "train " << which << ": " << data.train.y.size() << " train rows, "
        << data.test.y.size() << " test rows, scale_pos_weight " << params.scale_pos_weight
        << "\n";
    if (fit_report.single_class) out << "  warning: training targets hold a single class\n";
    print_report_row(out, "train", train_report);
    print_report_row(out, "test", test_report);
    return 0;
}

int cmd_gridsearch(const Settings& s, const std::string& which, std::ostream& out) {
    check_which(which);
    const fs::path prepared = s.str("gridsearch.prepared", "prepared");
    const fs::path dir = s.str("gridsearch.out", "search");
    const int folds = static_cast<int>(s.integer("gridsearch.folds", 5));
    const auto scoring = [&] {
        try {
            return eval::parse_scoring(s.str("gridsearch.scoring", "f1_macro"));
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
    }();
    const long long draws = s.integer("gridsearch.randomized", 0);
    if (draws < 0) throw UsageError("randomized draw count must be >= 0");
    const bool timings = s.flag("gridsearch.timings", true);

    // Grid: the [grid] section of the config plus an optional grid file.
    ConfigFile grid_cfg;
    if (const auto path = s.opt("gridsearch.grid")) {
        require_file(*path, "grid file");
        grid_cfg = ConfigFile::load(*path);
    }
    eval::ParamGrid grid;
    const auto add = [&](const std::string& name, const std::string& text) {
        std::vector<double> values;
        for (const auto& item : split_list(text)) {
            try {
                values.push_back(csv::parse_double(item, name));
            } catch (const ParseError& e) {
                throw UsageError(e.what());
            }
        }
        if (values.empty()) throw UsageError("grid parameter '" + name + "' has no values");
        const auto& names = gbdt::param_names();
        if (std::find(names.begin(), names.end(), name) == names.end() && name != "reg_alfa") {
            throw UsageError("unknown grid parameter '" + name + "'");
        }
        grid.emplace_back(name, std::move(values));
    };
    for (const auto& key : s.keys("grid")) add(key, *s.opt("grid." + key));
    for (const auto& [key, value] : grid_cfg.values()) add(key, value);
    if (grid.empty()) throw UsageError("empty grid: give --grid FILE or a [grid] section");

    const auto data = load_prepared(prepared, which);
    const auto base = model_params(s, which, balance_of(data.train.y));
    const auto mode = draws > 0 ? eval::SearchMode::random(static_cast<std::size_t>(draws))
                                : eval::SearchMode::full();
    const auto result = eval::grid_search(data.train.X, data.train.y, grid, mode, folds, scoring,
                                          base.seed, base);

    csv::write_text(dir / ("search_" + which + ".csv"),
                    eval::format_search_csv(result, grid, timings));
    report::ordered_json j;
    j["model"] = which;
    j["mode"] = draws > 0 ? "randomized" : "full";
    j["folds"] = folds;
    j["scoring"] = std::string(eval::to_string(scoring));
    j["candidates"] = result.candidates.size();
    j["best_score"] = result.best_score;
    j["best_params"] = params_json(result.best_params);
    csv::write_text(dir / ("search_" + which + ".json"), report::dump(j));

    out << "gridsearch " << which << ": " << result.candidates.size() << " candidates, " << folds
        << "-fold " << eval::to_string(scoring) << "\n  best " << result.best_score << " at";
    for (const auto& [name, v] : result.candidates[result.best_index].values) {
        out << " " << name << "=" << v;
    }
    out << "\n";
    return 0;
}

}  // namespace trendlab::cli
