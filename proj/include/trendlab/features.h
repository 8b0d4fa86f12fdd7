#pragma once

#include "trendlab/labels.h"
#include "trendlab/market_data.h"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace trendlab::features {

using data::QuoteSeries;
using labels::ExpertWindow;

inline constexpr std::size_t kLag = 5;
inline constexpr std::size_t kCpFeatureCount = 22;
inline constexpr std::size_t kTofFeatureCount = 5;

/// Close-1..5, Close1..5, Volume-1..5, Volume1..5, High, Low, each relative to day t.
using CpVector = std::array<double, kCpFeatureCount>;
using TofVector = std::array<double, kTofFeatureCount>;

/// CSV column names, in feature order.
const std::array<std::string, kCpFeatureCount>& cp_feature_names();
const std::array<std::string, kTofFeatureCount>& tof_feature_names();

struct CpRow {
    std::string stockname;
    Date date;
    CpVector features{};
    std::uint8_t target = 0;  ///< NewTrigger
};

struct TofRow {
    std::string stockname;
    std::string expert;
    Date date;          ///< last day of the window prefix the features use
    Date window_start;
    int fraction = 100; ///< percent of the full window
    TofVector features{};
    std::uint8_t target = 0;  ///< 1 = Trend

    double reg_close() const { return features[0]; }
    double close_r2() const { return features[1]; }
    double reg_vol() const { return features[2]; }
    double vol_r2() const { return features[3]; }
    double len_trend() const { return features[4]; }
    int direction_hint() const { return (features[0] > 0.0) - (features[0] < 0.0); }
};

/// Features for row t, or nullopt when t lacks 5 rows on either side. Log mode
/// takes the natural log of every ratio. Throws ZeroVolumeError when a volume
/// ratio is undefined (any zero volume in log mode, zero volume on day t in raw mode).
std::optional<CpVector> cp_features(const QuoteSeries& series, std::size_t t, bool log_mode);

struct TofFeatures {
    double reg_close = 0.0;
    double close_r2 = 0.0;
    double reg_vol = 0.0;
    double vol_r2 = 0.0;
    std::size_t len_trend = 0;

    TofVector vector() const;
};

/// Line fits of (log) close and (log) volume against day index 0..n-1.
TofFeatures tof_features(std::span<const double> closes, std::span<const double> volumes,
                         bool log_mode);
/// Same over quote rows [first, last].
TofFeatures tof_features(const QuoteSeries& series, std::size_t first, std::size_t last,
                         bool log_mode);

inline constexpr std::array<int, 11> kFractions{5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
inline constexpr std::size_t kMinTrendLength = 6;

/// Day count of the leading `percent` of an n-day window: round half up, at least 2.
std::size_t fraction_length(std::size_t n, int percent);

/// One row per fraction of the window, dropping prefixes shorter than 6 days.
std::vector<TofRow> augment_fractions(const ExpertWindow& window, const QuoteSeries& quotes,
                                      bool log_mode);

/// CP rows for every labeled date with full context; target from the window starts.
/// Dates whose volumes make a ratio undefined are skipped and counted in `skipped`.
std::vector<CpRow> build_cp_rows(std::span<const ExpertWindow> windows, const QuoteSeries& quotes,
                                 bool log_mode, std::size_t* skipped = nullptr);

std::vector<TofRow> build_tof_rows(std::span<const ExpertWindow> windows,
                                   const QuoteSeries& quotes, bool log_mode);

/// Keeps the first of every group of rows with identical features and target.
template <class Row>
std::vector<Row> dedup_rows(std::span<const Row> rows) {
    using Key = std::pair<decltype(rows.front().features), std::uint8_t>;
    std::set<Key> seen;
    std::vector<Row> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (seen.emplace(r.features, r.target).second) out.push_back(r);
    }
    return out;
}

std::string format_cp_rows(std::span<const CpRow> rows);
std::string format_tof_rows(std::span<const TofRow> rows);
void write_cp_rows(const std::filesystem::path& path, std::span<const CpRow> rows);
void write_tof_rows(const std::filesystem::path& path, std::span<const TofRow> rows);
std::vector<CpRow> load_cp_rows(const std::filesystem::path& path);
std::vector<TofRow> load_tof_rows(const std::filesystem::path& path);

}  // namespace trendlab::features
