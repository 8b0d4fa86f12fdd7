#include "trendlab/synth.h"

#include "trendlab/error.h"
#include "trendlab/regression.h"

#include <algorithm>
#include <cmath>

namespace trendlab::synth {

std::string_view to_string(RegimeKind k) {
    switch (k) {
        case RegimeKind::Up: return "up";
        case RegimeKind::Down: return "down";
        case RegimeKind::Flat: break;
    }
    return "flat";
}

RegimeKind parse_regime_kind(std::string_view text) {
    if (text == "up") return RegimeKind::Up;
    if (text == "down") return RegimeKind::Down;
    if (text == "flat") return RegimeKind::Flat;
    throw ConfigError("unknown regime kind '" + std::string(text) + "'");
}

void validate(const RegimeSpec& s) {
    if (s.length == 0) throw ConfigError("regime length must be positive");
    if (!(s.volatility >= 0.0)) throw ConfigError("regime volatility must be non-negative");
    if (!(s.volume_level > 0.0)) throw ConfigError("regime volume level must be positive");
    const bool ok = (s.kind == RegimeKind::Up && s.drift > 0.0) ||
                    (s.kind == RegimeKind::Down && s.drift < 0.0) ||
                    (s.kind == RegimeKind::Flat && s.drift == 0.0);
    if (!ok) throw ConfigError("regime drift sign does not match its kind");
}

void SamplerConfig::validate() const {
    if (days == 0) throw ConfigError("days must be positive");
    if (trend_min == 0 || trend_min > trend_max) throw ConfigError("bad trend length range");
    if (flat_min == 0 || flat_min > flat_max) throw ConfigError("bad flat length range");
    if (!(drift_min > 0.0 && drift_min <= drift_max)) throw ConfigError("bad drift range");
    if (!(volatility_min >= 0.0 && volatility_min <= volatility_max)) {
        throw ConfigError("bad volatility range");
    }
    if (!(volume_base > 0.0)) throw ConfigError("volume_base must be positive");
}

void ExpertProfile::validate() const {
    const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(disagree_prob) || !prob(split_merge_prob)) {
        throw ConfigError("expert probabilities must lie in [0, 1]");
    }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint64_t out[1];
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    return out[0];
}

std::vector<RegimeSpec> sample_regimes(const SamplerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    const auto uniform_len = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    const auto uniform = [&](double lo, double hi) {
        return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    std::vector<RegimeSpec> out;
    std::size_t covered = 0;
    RegimeKind prev = RegimeKind::Flat;
    while (covered < cfg.days) {
        RegimeKind kind;
        if (out.empty()) {
            kind = static_cast<RegimeKind>(std::uniform_int_distribution<int>(0, 2)(rng));
        } else {
            // One of the two kinds different from the previous one.
            const int step = std::uniform_int_distribution<int>(1, 2)(rng);
            kind = static_cast<RegimeKind>((static_cast<int>(prev) + step) % 3);
        }
        RegimeSpec s;
        s.kind = kind;
        s.volatility = uniform(cfg.volatility_min, cfg.volatility_max);
        s.volume_level = cfg.volume_base * std::exp(uniform(-0.3, 0.3));
        if (kind == RegimeKind::Flat) {
            s.length = uniform_len(cfg.flat_min, cfg.flat_max);
        } else {
            s.length = uniform_len(cfg.trend_min, cfg.trend_max);
            const double mag = uniform(cfg.drift_min, cfg.drift_max);
            s.drift = kind == RegimeKind::Up ? mag : -mag;
            s.volume_trend = cfg.trend_volume_trend;
        }
        if (covered + s.length > cfg.days) {
            s.length = cfg.days - covered;
            if (s.kind != RegimeKind::Flat && s.length < cfg.trend_min) {
                s.kind = RegimeKind::Flat;
                s.drift = 0.0;
                s.volume_trend = 0.0;
                if (!out.empty() && out.back().kind == RegimeKind::Flat) {
                    out.back().length += s.length;
                    break;
                }
            }
        }
        covered += s.length;
        prev = s.kind;
        out.push_back(s);
    }
    return out;
}

SyntheticSeries gen_series(const std::vector<RegimeSpec>& regimes, const SeriesConfig& cfg,
                           std::uint64_t seed) {
    if (regimes.empty()) throw ConfigError("gen_series needs at least one regime");
    if (cfg.substeps < 1) throw ConfigError("substeps must be >= 1");
    if (!(cfg.start_price > 0.0)) throw ConfigError("start_price must be positive");
    for (const auto& r : regimes) validate(r);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SyntheticSeries out;
    out.quotes.stockname = cfg.stockname;

    Date date = cfg.start_date;
    while (date.is_weekend()) date = date.next_business_day();
    double log_price = std::log(cfg.start_price);
    double prev_close = cfg.start_price;
    const double steps = static_cast<double>(cfg.substeps);
    std::size_t row = 0;
    for (const auto& spec : regimes) {
        Regime placed{spec, row, row + spec.length - 1};
        for (std::size_t k = 0; k < spec.length; ++k, ++row) {
            data::QuoteBar bar;
            bar.date = date;
            bar.open = prev_close;
            double hi = bar.open, lo = bar.open;
            for (int s = 0; s < cfg.substeps; ++s) {
                log_price += spec.drift / steps + spec.volatility / std::sqrt(steps) * normal(rng);
                const double p = std::exp(log_price);
                hi = std::max(hi, p);
                lo = std::min(lo, p);
            }
            bar.close = std::exp(log_price);
            prev_close = bar.close;
            bar.high = std::max(hi, bar.close);
            bar.low = std::min(lo, bar.close);
            const double log_volume = std::log(spec.volume_level) +
                                      spec.volume_trend * static_cast<double>(k) +
                                      cfg.volume_noise * normal(rng);
            bar.volume = std::max(1.0, std::round(std::exp(log_volume)));
            out.quotes.bars.push_back(bar);
            date = date.next_business_day();
        }
        out.regimes.push_back(placed);
    }
    for (const auto& r : out.regimes) {
        ExpertWindow w;
        w.stockname = cfg.stockname;
        w.expert = "truth";
        w.start_date = out.quotes[r.first_row].date;
        w.end_date = out.quotes[r.last_row].date;
        w.tendency = r.spec.kind == RegimeKind::Flat ? data::Tendency::Flat : data::Tendency::Trend;
        w.direction = w.tendency == data::Tendency::Trend
                          ? labels::trend_direction(out.quotes, r.first_row, r.last_row)
                          : 0;
        out.truth.push_back(w);
    }
    return out;
}

std::vector<data::ExpertLabelRow> gen_expert_labels(const QuoteSeries& quotes,
                                                    std::span<const ExpertWindow> truth,
                                                    const ExpertProfile& profile,
                                                    const std::string& expert, std::uint64_t seed) {
    profile.validate();
    struct Span {
        std::size_t first;
        std::size_t last;
        data::Tendency tendency;
    };
    std::vector<Span> spans;
    for (const auto& w : truth) {
        const auto first = quotes.row_of(w.start_date);
        const auto last = quotes.row_of(w.end_date);
        if (!first || !last) throw InvariantError("truth window outside the quote series");
        spans.push_back({*first, *last, w.tendency});
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    // Different readings of the same movement: split a trend or merge neighbours.
    if (profile.split_merge_prob > 0.0) {
        std::vector<Span> edited;
        for (std::size_t i = 0; i < spans.size(); ++i) {
            Span s = spans[i];
            if (coin(rng) < profile.split_merge_prob) {
                const std::size_t len = s.last - s.first + 1;
                const bool split = s.tendency == data::Tendency::Trend && len >= 4 && coin(rng) < 0.5;
                if (split) {
                    const std::size_t cut = std::uniform_int_distribution<std::size_t>(
                        s.first + len / 4, s.first + (3 * len) / 4 - 1)(rng);
                    edited.push_back({s.first, cut, s.tendency});
                    edited.push_back({cut + 1, s.last, s.tendency});
                    continue;
                }
                if (i + 1 < spans.size()) {
                    const Span& next = spans[i + 1];
                    const bool keep_own = s.last - s.first >= next.last - next.first;
                    edited.push_back({s.first, next.last, keep_own ? s.tendency : next.tendency});
                    ++i;
                    continue;
                }
            }
            edited.push_back(s);
        }
        spans = std::move(edited);
    }

    for (auto& s : spans) {
        if (profile.disagree_prob > 0.0 && coin(rng) < profile.disagree_prob) {
            s.tendency = s.tendency == data::Tendency::Trend ? data::Tendency::Flat
                                                             : data::Tendency::Trend;
        }
    }

    // Click error: move each inner boundary by up to +-jitter rows, never
    // emptying a window.
    if (profile.jitter_days > 0) {
        const auto j = static_cast<long long>(profile.jitter_days);
        for (std::size_t i = 1; i < spans.size(); ++i) {
            const auto b = static_cast<long long>(spans[i].first);
            const long long lower = std::max(static_cast<long long>(spans[i - 1].first) + 1, b - j);
            const long long upper = std::min(static_cast<long long>(spans[i].last), b + j);
            const long long shift = std::uniform_int_distribution<long long>(-j, j)(rng);
            const long long moved = std::clamp(b + shift, lower, upper);
            spans[i].first = static_cast<std::size_t>(moved);
            spans[i - 1].last = spans[i].first - 1;
        }
    }

    std::vector<data::ExpertLabelRow> rows;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        for (std::size_t r = spans[i].first; r <= spans[i].last; ++r) {
            rows.push_back({quotes[r].date, quotes.stockname, static_cast<long long>(i + 1),
                            spans[i].tendency, expert});
        }
    }
    return rows;
}

std::vector<LedgerEntry> regime_ledger(const SyntheticSeries& series, std::size_t lag,
                                       std::size_t min_window_days, bool log_mode) {
    std::vector<LedgerEntry> out;
    const std::size_t n = series.quotes.size();
    const auto& regimes = series.regimes;
    for (std::size_t i = 1; i < regimes.size(); ++i) {
        const auto& r = regimes[i];
        if (r.spec.kind == RegimeKind::Flat) continue;
        const std::size_t start = r.first_row;
        if (start < lag || start + lag >= n) continue;
        const std::size_t entry = start + std::max(lag, min_window_days - 1);
        std::size_t exit = n - 1;
        if (i + 1 < regimes.size() && regimes[i + 1].first_row + lag < n) {
            exit = regimes[i + 1].first_row + lag;
        }
        if (entry >= n || entry > exit) continue;
        std::vector<double> prefix;
        for (std::size_t k = start; k <= entry; ++k) {
            const double c = series.quotes[k].close;
            prefix.push_back(log_mode ? std::log(c) : c);
        }
        const double slope = fit_line(prefix).slope;
        if (slope == 0.0) continue;
        LedgerEntry e;
        e.regime = i;
        e.regime_direction = r.spec.kind == RegimeKind::Up ? 1 : -1;
        e.direction = slope > 0.0 ? 1 : -1;
        e.entry_row = entry;
        e.exit_row = exit;
        const double in = series.quotes[entry].close;
        const double out_close = series.quotes[exit].close;
        e.profit = e.direction > 0 ? (out_close - in) / in : (in - out_close) / in;
        out.push_back(e);
    }
    return out;
}

}  // namespace trendlab::synth
