#pragma once

#include "trendlab/labels.h"
#include "trendlab/market_data.h"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace trendlab::synth {

using data::QuoteSeries;
using labels::ExpertWindow;

enum class RegimeKind { Up, Down, Flat };

std::string_view to_string(RegimeKind k);
RegimeKind parse_regime_kind(std::string_view text);

struct RegimeSpec {
    RegimeKind kind = RegimeKind::Flat;
    std::size_t length = 0;     ///< business days
    double drift = 0.0;         ///< per-day log-price drift
    double volatility = 0.0;    ///< per-day log-return standard deviation
    double volume_level = 1e6;  ///< volume at the first day of the regime
    double volume_trend = 0.0;  ///< per-day log-volume drift
};

/// Throws ConfigError unless the drift sign matches the kind, the length is
/// positive and volatility / volume parameters are non-negative.
void validate(const RegimeSpec& spec);

/// Ranges the regime sampler draws from (uniformly).
struct SamplerConfig {
    std::size_t days = 2500;
    std::size_t trend_min = 40;
    std::size_t trend_max = 600;
    std::size_t flat_min = 20;
    std::size_t flat_max = 200;
    double drift_min = 0.001;
    double drift_max = 0.003;
    double volatility_min = 0.01;
    double volatility_max = 0.02;
    double volume_base = 1e6;
    double trend_volume_trend = 0.002;

    void validate() const;
};

struct SeriesConfig {
    std::string stockname = "SYN";
    Date start_date{2005, 1, 3};
    double start_price = 100.0;
    /// Intra-day steps of the walk; high and low are their extremes.
    int substeps = 8;
    /// Standard deviation of the daily log-volume noise.
    double volume_noise = 0.1;
};

/// A regime placed on the rows of a generated series.
struct Regime {
    RegimeSpec spec;
    std::size_t first_row = 0;
    std::size_t last_row = 0;
};

struct SyntheticSeries {
    QuoteSeries quotes;
    std::vector<Regime> regimes;
    /// One window per regime, expert "truth", directions from the close slope
    /// exactly as extract_windows derives them.
    std::vector<ExpertWindow> truth;
};

/// Regimes alternating kinds (never the same kind twice in a row) until `days`
/// is covered. A trailing trend cut below trend_min is turned flat.
std::vector<RegimeSpec> sample_regimes(const SamplerConfig& cfg, std::uint64_t seed);

/// Geometric random walk through the regimes. Throws ConfigError on an empty
/// regime list or invalid specs.
SyntheticSeries gen_series(const std::vector<RegimeSpec>& regimes, const SeriesConfig& cfg,
                           std::uint64_t seed);

struct ExpertProfile {
    std::size_t jitter_days = 0;    ///< boundary click error, uniform +-jitter rows
    double disagree_prob = 0.0;     ///< chance a window's tendency is flipped
    double split_merge_prob = 0.0;  ///< chance a window is split in two or merged with the next

    void validate() const;
};

/// Noisy relabeling of the true windows by one simulated expert, one row per
/// labeled date with fresh id_select numbering from 1.
std::vector<data::ExpertLabelRow> gen_expert_labels(const QuoteSeries& quotes,
                                                    std::span<const ExpertWindow> truth,
                                                    const ExpertProfile& profile,
                                                    const std::string& expert, std::uint64_t seed);

/// Profit the pipeline earns under oracle signals, computed from the regimes
/// alone: each trend regime after the first is entered `lag` rows after its start
/// (or at min_window_days-1, whichever is later) and left `lag` rows after the
/// next regime starts, or on the last bar. The traded direction is the sign of the
/// close slope over the entry prefix, which can disagree with the regime's kind
/// when noise dominates the first days.
struct LedgerEntry {
    std::size_t regime = 0;
    int direction = 0;         ///< traded direction
    int regime_direction = 0;  ///< +1 for an up regime, -1 for a down regime
    std::size_t entry_row = 0;
    std::size_t exit_row = 0;
    double profit = 0.0;
};

std::vector<LedgerEntry> regime_ledger(const SyntheticSeries& series, std::size_t lag = 5,
                                       std::size_t min_window_days = 6,
                                       bool log_mode = true);

/// Stable per-item seed derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace trendlab::synth
