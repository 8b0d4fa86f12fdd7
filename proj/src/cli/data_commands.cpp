#include "cli/common.h"

#include "trendlab/csv.h"
#include "trendlab/error.h"
#include "trendlab/features.h"
#include "trendlab/parallel.h"
#include "trendlab/report_json.h"

#include <cstdio>

namespace trendlab::cli {

namespace {

struct PanelMember {
    const char* name;
    synth::ExpertProfile profile;
};

// Four simulated experts of varying care: boundary jitter, tendency flips and
// split/merge readings.
const std::vector<PanelMember>& default_panel() {
    static const std::vector<PanelMember> panel{
        {"A", {2, 0.05, 0.05}},
        {"D", {1, 0.02, 0.02}},
        {"G", {2, 0.03, 0.05}},
        {"K", {4, 0.10, 0.10}},
    };
    return panel;
}

std::string stock_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "STK%03zu", i + 1);
    return buf;
}

std::size_t positive(const Settings& s, const std::string& key, long long fallback) {
    const long long v = s.integer(key, fallback);
    if (v <= 0) throw UsageError(key + " must be a positive integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

int cmd_synth(const Settings& s, std::ostream& out) {
    const std::size_t stocks = positive(s, "synth.stocks", 5);
    const fs::path dir = s.str("synth.out", "data");
    const std::uint64_t seed = s.seed().value_or(0);

    synth::SamplerConfig sampler;
    sampler.days = positive(s, "synth.days", 2500);
    sampler.trend_min = positive(s, "synth.trend_min", static_cast<long long>(sampler.trend_min));
    sampler.trend_max = positive(s, "synth.trend_max", static_cast<long long>(sampler.trend_max));
    sampler.flat_min = positive(s, "synth.flat_min", static_cast<long long>(sampler.flat_min));
    sampler.flat_max = positive(s, "synth.flat_max", static_cast<long long>(sampler.flat_max));
    sampler.drift_min = s.real("synth.drift_min", sampler.drift_min);
    sampler.drift_max = s.real("synth.drift_max", sampler.drift_max);
    sampler.volatility_min = s.real("synth.volatility_min", sampler.volatility_min);
    sampler.volatility_max = s.real("synth.volatility_max", sampler.volatility_max);
    try {
        sampler.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    synth::SeriesConfig series_cfg;
    series_cfg.volume_noise = s.real("synth.volume_noise", series_cfg.volume_noise);
    if (const auto d = s.opt("synth.start_date")) series_cfg.start_date = Date::parse(*d);

    // Expert panel: default names and profiles, optionally renamed, resized or
    // given one shared noise profile.
    std::vector<std::pair<std::string, synth::ExpertProfile>> experts;
    const auto names = s.list("synth.experts");
    const auto& panel = default_panel();
    const std::size_t count = names.empty() ? panel.size() : names.size();
    for (std::size_t i = 0; i < count; ++i) {
        const auto& member = panel[i % panel.size()];
        experts.emplace_back(names.empty() ? std::string(member.name) : names[i], member.profile);
    }
    for (auto& [name, p] : experts) {
        if (s.opt("synth.jitter")) {
            const long long j = s.integer("synth.jitter", 0);
            if (j < 0) throw UsageError("synth.jitter must be >= 0");
            p.jitter_days = static_cast<std::size_t>(j);
        }
        p.disagree_prob = s.real("synth.disagree", p.disagree_prob);
        p.split_merge_prob = s.real("synth.split_merge", p.split_merge_prob);
        try {
            p.validate();
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
    }

    std::vector<synth::SyntheticSeries> series(stocks);
    std::vector<std::vector<std::vector<data::ExpertLabelRow>>> labels(stocks);
    parallel_for(stocks, s.threads(), [&](std::size_t i) {
        const std::uint64_t stock_seed = synth::derive_seed(seed, i);
        auto cfg = series_cfg;
        cfg.stockname = stock_name(i);
        const auto regimes = synth::sample_regimes(sampler, synth::derive_seed(stock_seed, 0));
        series[i] = synth::gen_series(regimes, cfg, synth::derive_seed(stock_seed, 1));
        for (std::size_t e = 0; e < experts.size(); ++e) {
            labels[i].push_back(synth::gen_expert_labels(series[i].quotes, series[i].truth,
                                                         experts[e].second, experts[e].first,
                                                         synth::derive_seed(stock_seed, 2 + e)));
        }
    });

    std::size_t label_files = 0;
    for (std::size_t i = 0; i < stocks; ++i) {
        const auto& name = series[i].quotes.stockname;
        data::write_quotes(dir / "quotes" / (name + ".csv"), series[i].quotes);
        for (std::size_t e = 0; e < experts.size(); ++e) {
            data::write_labels(dir / "labels" / (name + "__" + experts[e].first + ".csv"),
                               labels[i][e]);
            ++label_files;
        }
    }
    write_truth(dir / "truth.json", seed, experts, series);
    out << "synth: " << stocks << " quote files, " << label_files << " label files, "
        << sampler.days << " days each, seed " << seed << "\n";
    return 0;
}

namespace {

template <class Row>
report::ordered_json dataset_json(const labels::DatasetSplit<Row>& split,
                                  const labels::ContradictionStats& contradictions) {
    report::ordered_json j;
    j["rows"] = split.train.size() + split.test.size();
    j["train_rows"] = split.train.size();
    j["test_rows"] = split.test.size();
    j["train_balance"] = report::to_json(split.train_balance);
    j["test_balance"] = report::to_json(labels::class_balance(std::span<const Row>(split.test)));
    j["contradictions"] = report::to_json(contradictions);
    return j;
}

}  // namespace

int cmd_prepare(const Settings& s, std::ostream& out) {
    const fs::path data_dir = s.str("prepare.data", "data");
    const fs::path dir = s.str("prepare.out", "prepared");
    const auto experts = s.list("prepare.experts");
    const bool averaging = s.flag("prepare.averaging", false);
    const bool correction = s.flag("prepare.trigger_correction", false);
    const bool log_mode = s.flag("prepare.log_mode", true);
    const auto policy = s.flag("prepare.skip_defects", false) ? data::DefectPolicy::Skip
                                                              : data::DefectPolicy::Throw;

    const auto quotes = load_quote_dir(data_dir / "quotes");
    const auto merged = load_label_dir(data_dir / "labels", quotes, policy);
    const auto by_stock = windows_by_stock(merged.rows, quotes, experts);

    std::vector<features::CpRow> cp_rows, cp_rows_uncorrected;
    std::vector<features::TofRow> tof_rows;
    std::size_t skipped = 0;
    for (const auto& [stock, by_expert] : by_stock) {
        const auto& series = quotes.at(stock);
        std::vector<std::vector<labels::ExpertWindow>> sets;
        if (averaging) {
            std::vector<labels::ExpertWindow> all;
            for (const auto& [expert, w] : by_expert) all.insert(all.end(), w.begin(), w.end());
            sets.push_back(labels::vote_windows(all, series));
        } else {
            for (const auto& [expert, w] : by_expert) sets.push_back(w);
        }
        for (const auto& windows : sets) {
            const auto tof = features::build_tof_rows(windows, series, log_mode);
            tof_rows.insert(tof_rows.end(), tof.begin(), tof.end());
            auto cp = features::build_cp_rows(windows, series, log_mode, &skipped);
            if (correction) {
                cp_rows_uncorrected.insert(cp_rows_uncorrected.end(), cp.begin(), cp.end());
                const auto corrected = labels::trigger_correction(windows, series);
                cp = features::build_cp_rows(corrected, series, log_mode);
            }
            cp_rows.insert(cp_rows.end(), cp.begin(), cp.end());
        }
    }
    cp_rows = features::dedup_rows(std::span<const features::CpRow>(cp_rows));
    tof_rows = features::dedup_rows(std::span<const features::TofRow>(tof_rows));

    Date split_date;
    if (const auto d = s.opt("prepare.split_date")) {
        split_date = Date::parse(*d);
    } else {
        std::vector<Date> dates;
        for (const auto& r : cp_rows) dates.push_back(r.date);
        split_date = labels::quantile_split_date(std::move(dates), 0.7);
    }
    const auto cp_split = labels::split_by_date(std::span<const features::CpRow>(cp_rows), split_date);
    const auto tof_split =
        labels::split_by_date(std::span<const features::TofRow>(tof_rows), split_date);

    features::write_cp_rows(dir / "cp_train.csv", cp_split.train);
    features::write_cp_rows(dir / "cp_test.csv", cp_split.test);
    features::write_tof_rows(dir / "tof_train.csv", tof_split.train);
    features::write_tof_rows(dir / "tof_test.csv", tof_split.test);

    const auto cp_contra = labels::count_contradictions(std::span<const features::CpRow>(cp_rows));
    const auto tof_contra = labels::count_contradictions(std::span<const features::TofRow>(tof_rows));

    report::ordered_json j;
    auto& opts = j["options"];
    opts["experts"] = experts;
    opts["averaging"] = averaging;
    opts["trigger_correction"] = correction;
    opts["log_mode"] = log_mode;
    opts["split_date"] = split_date.to_string();
    std::vector<std::string> stocks;
    for (const auto& [stock, by_expert] : by_stock) stocks.push_back(stock);
    j["stocks"] = stocks;
    j["rejected_files"] = merged.rejected;
    j["cp"] = dataset_json(cp_split, cp_contra);
    if (correction) {
        const auto deduped =
            features::dedup_rows(std::span<const features::CpRow>(cp_rows_uncorrected));
        const auto before = labels::count_contradictions(std::span<const features::CpRow>(deduped));
        j["cp"]["contradictions_uncorrected"] = report::to_json(before);
    }
    j["cp"]["skipped_zero_volume"] = skipped;
    j["tof"] = dataset_json(tof_split, tof_contra);
    csv::write_text(dir / "prep_report.json", report::dump(j));

    out << "prepare: log=" << (log_mode ? "yes" : "no") << " averaging=" << (averaging ? "yes" : "no")
        << " trigger_correction=" << (correction ? "yes" : "no") << " experts="
        << (experts.empty() ? std::string("all") : s.str("prepare.experts", "")) << "\n";
    out << "  split date " << split_date.to_string() << "\n";
    out << "  cp:  train " << cp_split.train.size() << " / test " << cp_split.test.size()
        << "  balance " << cp_split.train_balance.to_string() << "  contradictions "
        << cp_contra.to_string() << "\n";
    out << "  tof: train " << tof_split.train.size() << " / test " << tof_split.test.size()
        << "  balance " << tof_split.train_balance.to_string() << "  contradictions "
        << tof_contra.to_string() << "\n";
    return 0;
}

}  // namespace trendlab::cli
