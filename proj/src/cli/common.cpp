#include "cli/common.h"

#include "trendlab/csv.h"
#include "trendlab/error.h"
#include "trendlab/report_json.h"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace trendlab::cli {

Settings::Settings(ConfigFile file, const std::map<std::string, std::string>& overrides)
    : file_(std::move(file)) {
    for (const auto& [k, v] : overrides) file_.set(k, v);
}

std::string Settings::str(const std::string& key, const std::string& fallback) const {
    return file_.get(key).value_or(fallback);
}

long long Settings::integer(const std::string& key, long long fallback) const {
    const auto v = file_.get(key);
    if (!v) return fallback;
    try {
        return csv::parse_int(*v, key);
    } catch (const ParseError& e) {
        throw UsageError(std::string("option ") + key + ": " + e.what());
    }
}

double Settings::real(const std::string& key, double fallback) const {
    const auto v = file_.get(key);
    if (!v) return fallback;
    try {
        return csv::parse_double(*v, key);
    } catch (const ParseError& e) {
        throw UsageError(std::string("option ") + key + ": " + e.what());
    }
}

bool Settings::flag(const std::string& key, bool fallback) const {
    const auto v = file_.get(key);
    if (!v) return fallback;
    try {
        return parse_bool(*v, key);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

std::vector<std::string> Settings::list(const std::string& key) const {
    const auto v = file_.get(key);
    if (!v) return {};
    return split_list(*v);
}

std::optional<std::uint64_t> Settings::seed() const {
    if (!file_.has("seed")) return std::nullopt;
    const long long v = integer("seed", 0);
    if (v < 0) throw UsageError("seed must be non-negative");
    return static_cast<std::uint64_t>(v);
}

int Settings::threads() const { return static_cast<int>(integer("threads", 0)); }

void require_file(const fs::path& path, const std::string& what) {
    if (!fs::is_regular_file(path)) {
        throw Error(what + " not found: " + path.string());
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::vector<fs::path> csv_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error("directory not found: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

SeriesMap load_quote_dir(const fs::path& dir) {
    std::map<std::string, std::vector<data::QuoteBar>> bars;
    for (const auto& path : csv_files(dir)) {
        auto series = data::load_quotes(path);
        auto& dst = bars[series.stockname];
        dst.insert(dst.end(), series.bars.begin(), series.bars.end());
    }
    if (bars.empty()) throw EmptyInputError("no quote files in " + dir.string());
    SeriesMap out;
    for (auto& [name, b] : bars) out.emplace(name, data::make_series(name, std::move(b)));
    return out;
}

data::MergeResult load_label_dir(const fs::path& dir, const SeriesMap& quotes,
                                 data::DefectPolicy policy) {
    std::vector<data::LabelFile> files;
    for (const auto& path : csv_files(dir)) {
        data::LabelFile f;
        f.source = path.filename().string();
        f.rows = data::load_labels(path);
        if (!f.rows.empty()) {
            const auto it = quotes.find(f.rows.front().stockname);
            if (it != quotes.end()) f.quotes = it->second;
        }
        files.push_back(std::move(f));
    }
    if (files.empty()) throw EmptyInputError("no label files in " + dir.string());
    return data::merge_label_files(files, policy);
}

WindowMap windows_by_stock(const std::vector<data::ExpertLabelRow>& rows, const SeriesMap& quotes,
                           const std::vector<std::string>& expert_filter) {
    std::map<std::string, std::map<std::string, std::vector<data::ExpertLabelRow>>> grouped;
    for (const auto& r : rows) {
        if (!expert_filter.empty() &&
            std::find(expert_filter.begin(), expert_filter.end(), r.expert) == expert_filter.end()) {
            continue;
        }
        grouped[r.stockname][r.expert].push_back(r);
    }
    for (const auto& e : expert_filter) {
        bool found = false;
        for (const auto& [stock, by_expert] : grouped) found = found || by_expert.count(e) > 0;
        if (!found) throw UsageError("expert '" + e + "' has no labels");
    }
    WindowMap out;
    for (auto& [stock, by_expert] : grouped) {
        const auto q = quotes.find(stock);
        if (q == quotes.end()) throw InvariantError("labels for " + stock + " have no quote file");
        for (auto& [expert, r] : by_expert) {
            std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
            out[stock][expert] = labels::extract_windows(r, q->second);
        }
    }
    if (out.empty()) throw EmptyInputError("no label rows left after the expert filter");
    return out;
}

void write_truth(const fs::path& path, std::uint64_t seed,
                 const std::vector<std::pair<std::string, synth::ExpertProfile>>& experts,
                 const std::vector<synth::SyntheticSeries>& series) {
    report::ordered_json j;
    j["seed"] = seed;
    auto& ex = j["experts"] = report::ordered_json::array();
    for (const auto& [name, p] : experts) {
        ex.push_back({{"name", name},
                      {"jitter_days", p.jitter_days},
                      {"disagree_prob", p.disagree_prob},
                      {"split_merge_prob", p.split_merge_prob}});
    }
    auto& stocks = j["stocks"] = report::ordered_json::array();
    for (const auto& s : series) {
        report::ordered_json st;
        st["stockname"] = s.quotes.stockname;
        auto& regimes = st["regimes"] = report::ordered_json::array();
        for (std::size_t i = 0; i < s.regimes.size(); ++i) {
            const auto& r = s.regimes[i];
            regimes.push_back({{"kind", synth::to_string(r.spec.kind)},
                               {"start", s.truth[i].start_date.to_string()},
                               {"end", s.truth[i].end_date.to_string()},
                               {"first_row", r.first_row},
                               {"last_row", r.last_row},
                               {"drift", r.spec.drift},
                               {"volatility", r.spec.volatility},
                               {"direction", s.truth[i].direction}});
        }
        stocks.push_back(std::move(st));
    }
    csv::write_text(path, report::dump(j));
}

TruthMap load_truth(const fs::path& path) {
    require_file(path, "ground truth file");
    TruthMap out;
    try {
        const auto j = nlohmann::json::parse(read_text(path));
        for (const auto& st : j.at("stocks")) {
            const std::string name = st.at("stockname").get<std::string>();
            auto& t = out[name];
            for (const auto& r : st.at("regimes")) {
                synth::Regime reg;
                reg.spec.kind = synth::parse_regime_kind(r.at("kind").get<std::string>());
                reg.spec.drift = r.at("drift").get<double>();
                reg.spec.volatility = r.at("volatility").get<double>();
                reg.first_row = r.at("first_row").get<std::size_t>();
                reg.last_row = r.at("last_row").get<std::size_t>();
                reg.spec.length = reg.last_row - reg.first_row + 1;
                t.regimes.push_back(reg);
                labels::ExpertWindow w;
                w.stockname = name;
                w.expert = "truth";
                w.start_date = Date::parse(r.at("start").get<std::string>());
                w.end_date = Date::parse(r.at("end").get<std::string>());
                w.tendency = reg.spec.kind == synth::RegimeKind::Flat ? data::Tendency::Flat
                                                                      : data::Tendency::Trend;
                w.direction = r.at("direction").get<int>();
                t.windows.push_back(w);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return out;
}

std::vector<labels::ExpertWindow> clip_windows(std::span<const labels::ExpertWindow> windows,
                                               const data::QuoteSeries& slice) {
    std::vector<labels::ExpertWindow> out;
    if (slice.empty()) return out;
    const Date first = slice[0].date;
    const Date last = slice[slice.size() - 1].date;
    for (auto w : windows) {
        if (w.end_date < first || w.start_date > last) continue;
        w.start_date = std::max(w.start_date, first);
        w.end_date = std::min(w.end_date, last);
        out.push_back(w);
    }
    return out;
}

gbdt::GbdtParams model_params(const Settings& s, const std::string& which, double train_balance) {
    gbdt::GbdtParams p;
    bool auto_balance = false;
    if (which == "cp") {
        p.n_estimators = 500;
        p.max_depth = 7;
        p.reg_lambda = 3.0;
        p.learning_rate = 0.1;
        p.seed = 0;
        auto_balance = true;
    } else if (which == "tof") {
        p.n_estimators = 100;
        p.max_depth = 5;
        p.reg_lambda = 3.0;
        p.learning_rate = 0.2;
        p.seed = 42;
    } else {
        throw UsageError("unknown model '" + which + "' (expected cp or tof)");
    }
    if (const auto seed = s.seed()) p.seed = *seed;
    for (const auto& key : s.keys(which)) {
        const auto value = *s.opt(which + "." + key);
        if (key == "scale_pos_weight" && trim(value) == "auto") {
            auto_balance = true;
            continue;
        }
        if (key == "scale_pos_weight") auto_balance = false;
        try {
            gbdt::set_param(p, key, csv::parse_double(trim(value), which + "." + key));
        } catch (const ParseError& e) {
            throw UsageError(e.what());
        }
    }
    if (auto_balance) p.scale_pos_weight = train_balance > 0.0 ? train_balance : 1.0;
    p.threads = s.threads();
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return p;
}

}  // namespace trendlab::cli
