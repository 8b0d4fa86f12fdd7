#pragma once

#include "trendlab/config_file.h"
#include "trendlab/gbdt.h"
#include "trendlab/labels.h"
#include "trendlab/market_data.h"
#include "trendlab/synth.h"

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace trendlab::cli {

namespace fs = std::filesystem;

/// Config file values with command-line overrides on top.
class Settings {
public:
    Settings(ConfigFile file, const std::map<std::string, std::string>& overrides);

    std::optional<std::string> opt(const std::string& key) const { return file_.get(key); }
    std::string str(const std::string& key, const std::string& fallback) const;
    long long integer(const std::string& key, long long fallback) const;
    double real(const std::string& key, double fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::vector<std::string> list(const std::string& key) const;
    std::vector<std::string> keys(const std::string& section) const { return file_.keys(section); }

    std::optional<std::uint64_t> seed() const;
    int threads() const;

private:
    ConfigFile file_;
};

using SeriesMap = std::map<std::string, data::QuoteSeries>;
using WindowMap = std::map<std::string, std::map<std::string, std::vector<labels::ExpertWindow>>>;

/// Every quotes CSV under `dir`, keyed by stock name.
SeriesMap load_quote_dir(const fs::path& dir);
/// Every label CSV under `dir`, merged with the defect-file rule.
data::MergeResult load_label_dir(const fs::path& dir, const SeriesMap& quotes,
                                 data::DefectPolicy policy);
/// stock -> expert -> windows.
WindowMap windows_by_stock(const std::vector<data::ExpertLabelRow>& rows, const SeriesMap& quotes,
                           const std::vector<std::string>& expert_filter);

/// Ground truth written by the synth command.
struct TruthStock {
    std::vector<labels::ExpertWindow> windows;
    std::vector<synth::Regime> regimes;
};
using TruthMap = std::map<std::string, TruthStock>;
void write_truth(const fs::path& path, std::uint64_t seed,
                 const std::vector<std::pair<std::string, synth::ExpertProfile>>& experts,
                 const std::vector<synth::SyntheticSeries>& series);
TruthMap load_truth(const fs::path& path);

/// Windows cut to the rows of `slice` (dropping those outside it).
std::vector<labels::ExpertWindow> clip_windows(std::span<const labels::ExpertWindow> windows,
                                               const data::QuoteSeries& slice);

/// Defaults of the two models, with [cp] / [tof] config sections and --param
/// overrides applied. "auto" for scale_pos_weight means the train balance.
gbdt::GbdtParams model_params(const Settings& s, const std::string& which, double train_balance);

void require_file(const fs::path& path, const std::string& what);
std::string read_text(const fs::path& path);

int cmd_synth(const Settings& s, std::ostream& out);
int cmd_prepare(const Settings& s, std::ostream& out);
int cmd_train(const Settings& s, const std::string& which, std::ostream& out);
int cmd_gridsearch(const Settings& s, const std::string& which, std::ostream& out);
int cmd_backtest(const Settings& s, std::ostream& out);
int cmd_baseline(const Settings& s, std::ostream& out);

}  // namespace trendlab::cli
