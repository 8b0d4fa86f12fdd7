#include "trendlab/features.h"

#include "trendlab/csv.h"
#include "trendlab/error.h"
#include "trendlab/regression.h"

#include <cmath>

namespace trendlab::features {

const std::array<std::string, kCpFeatureCount>& cp_feature_names() {
    static const auto names = [] {
        std::array<std::string, kCpFeatureCount> n;
        std::size_t i = 0;
        for (const char* base : {"close", "volume"}) {
            for (int k = 1; k <= 5; ++k) n[i++] = std::string(base) + "_m" + std::to_string(k);
            for (int k = 1; k <= 5; ++k) n[i++] = std::string(base) + "_p" + std::to_string(k);
        }
        n[i++] = "high";
        n[i++] = "low";
        return n;
    }();
    return names;
}

const std::array<std::string, kTofFeatureCount>& tof_feature_names() {
    static const std::array<std::string, kTofFeatureCount> names{"reg_close", "close_r2", "reg_vol",
                                                                 "vol_r2", "len_trend"};
    return names;
}

std::optional<CpVector> cp_features(const QuoteSeries& series, std::size_t t, bool log_mode) {
    if (t < kLag || t + kLag >= series.size()) return std::nullopt;
    const auto& today = series[t];
    if (today.volume <= 0.0) {
        throw ZeroVolumeError(series.stockname + ": zero volume on " + today.date.to_string());
    }
    if (log_mode) {
        for (std::size_t i = t - kLag; i <= t + kLag; ++i) {
            if (series[i].volume <= 0.0) {
                throw ZeroVolumeError(series.stockname + ": zero volume on " +
                                      series[i].date.to_string());
            }
        }
    }
    CpVector f{};
    for (std::size_t k = 1; k <= kLag; ++k) {
        f[k - 1] = series[t - k].close / today.close;
        f[kLag + k - 1] = series[t + k].close / today.close;
        f[2 * kLag + k - 1] = series[t - k].volume / today.volume;
        f[3 * kLag + k - 1] = series[t + k].volume / today.volume;
    }
    f[4 * kLag] = today.high / today.close;
    f[4 * kLag + 1] = today.low / today.close;
    if (log_mode) {
        for (auto& v : f) v = std::log(v);
    }
    return f;
}

TofVector TofFeatures::vector() const {
    return {reg_close, close_r2, reg_vol, vol_r2, static_cast<double>(len_trend)};
}

TofFeatures tof_features(std::span<const double> closes, std::span<const double> volumes,
                         bool log_mode) {
    if (closes.size() != volumes.size()) {
        throw ShapeError("tof_features: closes and volumes differ in length");
    }
    if (closes.size() < 2) {
        throw TooShortError("tof_features needs at least 2 days, got " +
                            std::to_string(closes.size()));
    }
    std::vector<double> y_close(closes.begin(), closes.end());
    std::vector<double> y_vol(volumes.begin(), volumes.end());
    if (log_mode) {
        for (auto& v : y_close) v = std::log(v);
        for (auto& v : y_vol) {
            if (v <= 0.0) throw ZeroVolumeError("tof_features: zero volume in log mode");
            v = std::log(v);
        }
    }
    const auto fc = fit_line(y_close);
    const auto fv = fit_line(y_vol);
    return {fc.slope, fc.r2, fv.slope, fv.r2, closes.size()};
}

TofFeatures tof_features(const QuoteSeries& series, std::size_t first, std::size_t last,
                         bool log_mode) {
    std::vector<double> closes, volumes;
    closes.reserve(last - first + 1);
    volumes.reserve(last - first + 1);
    for (std::size_t i = first; i <= last; ++i) {
        closes.push_back(series[i].close);
        volumes.push_back(series[i].volume);
    }
    return tof_features(closes, volumes, log_mode);
}

std::size_t fraction_length(std::size_t n, int percent) {
    const std::size_t len = (static_cast<std::size_t>(percent) * n + 50) / 100;
    return std::max<std::size_t>(len, 2);
}

std::vector<TofRow> augment_fractions(const ExpertWindow& window, const QuoteSeries& quotes,
                                      bool log_mode) {
    const auto first = quotes.row_of(window.start_date);
    const auto last = quotes.row_of(window.end_date);
    if (!first || !last || *last < *first) {
        throw InvariantError(quotes.stockname + ": window " + window.start_date.to_string() +
                             " has no quotes");
    }
    const std::size_t n = *last - *first + 1;
    std::vector<TofRow> out;
    for (int p : kFractions) {
        const std::size_t len = std::min(fraction_length(n, p), n);
        if (len < kMinTrendLength) continue;
        const std::size_t end = *first + len - 1;
        TofRow row;
        row.stockname = window.stockname;
        row.expert = window.expert;
        row.date = quotes[end].date;
        row.window_start = window.start_date;
        row.fraction = p;
        row.features = tof_features(quotes, *first, end, log_mode).vector();
        row.target = window.tendency == data::Tendency::Trend ? 1 : 0;
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<CpRow> build_cp_rows(std::span<const ExpertWindow> windows, const QuoteSeries& quotes,
                                 bool log_mode, std::size_t* skipped) {
    const auto triggers = labels::new_trigger(windows, quotes);
    std::vector<CpRow> out;
    std::size_t skip = 0;
    out.reserve(triggers.dates.size());
    for (std::size_t i = 0; i < triggers.dates.size(); ++i) {
        const auto t = *quotes.row_of(triggers.dates[i]);
        try {
            const auto f = cp_features(quotes, t, log_mode);
            if (!f) continue;
            out.push_back({quotes.stockname, triggers.dates[i], *f, triggers.new_trigger[i]});
        } catch (const ZeroVolumeError&) {
            ++skip;
        }
    }
    if (skipped) *skipped += skip;
    return out;
}

std::vector<TofRow> build_tof_rows(std::span<const ExpertWindow> windows,
                                   const QuoteSeries& quotes, bool log_mode) {
    std::vector<TofRow> out;
    for (const auto& w : windows) {
        auto rows = augment_fractions(w, quotes, log_mode);
        out.insert(out.end(), std::make_move_iterator(rows.begin()),
                   std::make_move_iterator(rows.end()));
    }
    return out;
}

namespace {

std::vector<std::string> cp_header() {
    std::vector<std::string> h{"date", "stockname"};
    for (const auto& n : cp_feature_names()) h.push_back(n);
    h.push_back("new_trigger");
    return h;
}

std::vector<std::string> tof_header() {
    std::vector<std::string> h{"date", "stockname", "expert", "window_start", "fraction"};
    for (const auto& n : tof_feature_names()) h.push_back(n);
    h.push_back("new_type_bool");
    return h;
}

std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out + '\n';
}

std::uint8_t parse_target(std::string_view cell) {
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw ParseError("target must be 0 or 1, got '" + std::string(cell) + "'");
}

}  // namespace

std::string format_cp_rows(std::span<const CpRow> rows) {
    std::string out = join(cp_header());
    for (const auto& r : rows) {
        out += r.date.to_string();
        out += ',';
        out += r.stockname;
        for (double v : r.features) {
            out += ',';
            out += csv::format_double(v);
        }
        out += r.target ? ",1\n" : ",0\n";
    }
    return out;
}

std::string format_tof_rows(std::span<const TofRow> rows) {
    std::string out = join(tof_header());
    for (const auto& r : rows) {
        out += r.date.to_string() + ',' + r.stockname + ',' + r.expert + ',' +
               r.window_start.to_string() + ',' + std::to_string(r.fraction);
        for (double v : r.features) {
            out += ',';
            out += csv::format_double(v);
        }
        out += r.target ? ",1\n" : ",0\n";
    }
    return out;
}

void write_cp_rows(const std::filesystem::path& path, std::span<const CpRow> rows) {
    csv::write_text(path, format_cp_rows(rows));
}

void write_tof_rows(const std::filesystem::path& path, std::span<const TofRow> rows) {
    csv::write_text(path, format_tof_rows(rows));
}

std::vector<CpRow> load_cp_rows(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    csv::expect_header(table, cp_header());
    std::vector<CpRow> rows;
    rows.reserve(table.lines.size());
    for (std::size_t r = 0; r < table.lines.size(); ++r) {
        const auto cells = csv::split(table.lines[r]);
        try {
            if (cells.size() != kCpFeatureCount + 3) throw ParseError("wrong cell count");
            CpRow row;
            row.date = Date::parse(cells[0]);
            row.stockname = std::string(cells[1]);
            for (std::size_t f = 0; f < kCpFeatureCount; ++f) {
                row.features[f] = csv::parse_double(cells[2 + f], cp_feature_names()[f]);
            }
            row.target = parse_target(cells.back());
            rows.push_back(std::move(row));
        } catch (const ParseError& e) {
            throw ParseError(table.where(r) + ": " + e.what());
        }
    }
    return rows;
}

std::vector<TofRow> load_tof_rows(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    csv::expect_header(table, tof_header());
    std::vector<TofRow> rows;
    rows.reserve(table.lines.size());
    for (std::size_t r = 0; r < table.lines.size(); ++r) {
        const auto cells = csv::split(table.lines[r]);
        try {
            if (cells.size() != kTofFeatureCount + 6) throw ParseError("wrong cell count");
            TofRow row;
            row.date = Date::parse(cells[0]);
            row.stockname = std::string(cells[1]);
            row.expert = std::string(cells[2]);
            row.window_start = Date::parse(cells[3]);
            row.fraction = static_cast<int>(csv::parse_int(cells[4], "fraction"));
            for (std::size_t f = 0; f < kTofFeatureCount; ++f) {
                row.features[f] = csv::parse_double(cells[5 + f], tof_feature_names()[f]);
            }
            row.target = parse_target(cells.back());
            rows.push_back(std::move(row));
        } catch (const ParseError& e) {
            throw ParseError(table.where(r) + ": " + e.what());
        }
    }
    return rows;
}

}  // namespace trendlab::features
