#include "trendlab/market_data.h"

#include "trendlab/csv.h"
#include "trendlab/error.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

namespace trendlab::data {

void validate_bar(const QuoteBar& bar) {
    const auto fail = [&](const std::string& what) {
        throw InvariantError(bar.date.to_string() + ": " + what);
    };
    if (!(bar.open > 0.0 && bar.high > 0.0 && bar.low > 0.0 && bar.close > 0.0)) {
        fail("prices must be strictly positive");
    }
    if (!(bar.volume >= 0.0)) fail("volume must be non-negative");
    if (bar.high < bar.low) fail("high below low");
    if (bar.low > std::min(bar.open, bar.close)) fail("low above open/close");
    if (bar.high < std::max(bar.open, bar.close)) fail("high below open/close");
}

std::optional<std::size_t> QuoteSeries::row_of(Date date) const {
    const auto i = lower_bound(date);
    if (i < bars.size() && bars[i].date == date) return i;
    return std::nullopt;
}

std::size_t QuoteSeries::lower_bound(Date date) const {
    auto it = std::lower_bound(bars.begin(), bars.end(), date,
                               [](const QuoteBar& b, Date d) { return b.date < d; });
    return static_cast<std::size_t>(it - bars.begin());
}

std::vector<double> QuoteSeries::closes() const {
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& b : bars) out.push_back(b.close);
    return out;
}

std::vector<double> QuoteSeries::volumes() const {
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& b : bars) out.push_back(b.volume);
    return out;
}

QuoteSeries QuoteSeries::slice(std::size_t first, std::size_t last) const {
    QuoteSeries out{stockname, {}};
    if (first <= last && first < bars.size()) {
        last = std::min(last, bars.size() - 1);
        out.bars.assign(bars.begin() + static_cast<std::ptrdiff_t>(first),
                        bars.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    }
    return out;
}

QuoteSeries make_series(std::string stockname, std::vector<QuoteBar> bars) {
    for (const auto& b : bars) validate_bar(b);
    std::stable_sort(bars.begin(), bars.end(),
                     [](const QuoteBar& a, const QuoteBar& b) { return a.date < b.date; });
    std::vector<QuoteBar> unique;
    unique.reserve(bars.size());
    for (auto& b : bars) {
        if (!unique.empty() && unique.back().date == b.date) {
            if (unique.back() == b) continue;
            throw DuplicateDateError(stockname + ": different quotes for " + b.date.to_string());
        }
        unique.push_back(b);
    }
    return QuoteSeries{std::move(stockname), std::move(unique)};
}

QuoteSeries load_quotes(const std::filesystem::path& path, const QuoteSchema& schema) {
    const auto table = csv::read(path);
    const auto c_date = table.column(schema.date);
    const auto c_open = table.column(schema.open);
    const auto c_high = table.column(schema.high);
    const auto c_low = table.column(schema.low);
    const auto c_close = table.column(schema.close);
    const auto c_volume = table.column(schema.volume);
    const auto c_stock = table.column(schema.stockname);
    const auto width = table.header.size();

    std::string stockname;
    std::vector<QuoteBar> bars;
    bars.reserve(table.lines.size());
    for (std::size_t r = 0; r < table.lines.size(); ++r) {
        const auto cells = csv::split(table.lines[r]);
        try {
            if (cells.size() != width) {
                throw ParseError("expected " + std::to_string(width) + " cells, got " +
                                 std::to_string(cells.size()));
            }
            QuoteBar bar;
            bar.date = Date::parse(cells[c_date]);
            bar.open = csv::parse_double(cells[c_open], "open");
            bar.high = csv::parse_double(cells[c_high], "high");
            bar.low = csv::parse_double(cells[c_low], "low");
            bar.close = csv::parse_double(cells[c_close], "close");
            bar.volume = csv::parse_double(cells[c_volume], "volume");
            validate_bar(bar);
            if (r == 0) {
                stockname = std::string(cells[c_stock]);
            } else if (cells[c_stock] != stockname) {
                throw InvariantError("mixed stocknames '" + stockname + "' and '" +
                                     std::string(cells[c_stock]) + "'");
            }
            bars.push_back(bar);
        } catch (const ParseError& e) {
            throw ParseError(table.where(r) + ": " + e.what());
        } catch (const InvariantError& e) {
            throw InvariantError(table.where(r) + ": " + e.what());
        }
    }
    try {
        return make_series(std::move(stockname), std::move(bars));
    } catch (const DuplicateDateError& e) {
        throw DuplicateDateError(path.string() + ": " + e.what());
    }
}

std::string format_quotes(const QuoteSeries& series) {
    std::string out = "date,open,high,low,close,volume,stockname\n";
    for (const auto& b : series.bars) {
        out += b.date.to_string();
        for (double v : {b.open, b.high, b.low, b.close, b.volume}) {
            out += ',';
            out += csv::format_double(v);
        }
        out += ',';
        out += series.stockname;
        out += '\n';
    }
    return out;
}

void write_quotes(const std::filesystem::path& path, const QuoteSeries& series) {
    csv::write_text(path, format_quotes(series));
}

std::string_view to_string(Tendency t) {
    return t == Tendency::Trend ? "Trend" : "Flat";
}

Tendency parse_tendency(std::string_view text) {
    if (text == "Trend") return Tendency::Trend;
    if (text == "Flat" || text == "N/A") return Tendency::Flat;
    throw ParseError("unknown tendency '" + std::string(text) + "'");
}

std::vector<ExpertLabelRow> load_labels(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    csv::expect_header(table, {"date", "stockname", "id_select", "type", "username"});
    std::vector<ExpertLabelRow> rows;
    rows.reserve(table.lines.size());
    for (std::size_t r = 0; r < table.lines.size(); ++r) {
        const auto cells = csv::split(table.lines[r]);
        try {
            if (cells.size() != 5) throw ParseError("expected 5 cells");
            ExpertLabelRow row;
            row.date = Date::parse(cells[0]);
            row.stockname = std::string(cells[1]);
            row.id_select = csv::parse_int(cells[2], "id_select");
            row.tendency = parse_tendency(cells[3]);
            row.expert = std::string(cells[4]);
            rows.push_back(std::move(row));
        } catch (const ParseError& e) {
            throw ParseError(table.where(r) + ": " + e.what());
        }
    }
    return rows;
}

std::string format_labels(std::span<const ExpertLabelRow> rows) {
    std::string out = "date,stockname,id_select,type,username\n";
    for (const auto& r : rows) {
        out += r.date.to_string();
        out += ',';
        out += r.stockname;
        out += ',';
        out += std::to_string(r.id_select);
        out += ',';
        out += to_string(r.tendency);
        out += ',';
        out += r.expert;
        out += '\n';
    }
    return out;
}

void write_labels(const std::filesystem::path& path, std::span<const ExpertLabelRow> rows) {
    csv::write_text(path, format_labels(rows));
}

MergeResult merge_label_files(std::span<const LabelFile> files, DefectPolicy policy) {
    using Key = std::tuple<Date, std::string, std::string>;
    std::map<std::string, std::map<Date, QuoteBar>> quote_store;
    std::map<Key, ExpertLabelRow> label_store;
    std::vector<Key> order;
    MergeResult result;

    for (const auto& file : files) {
        std::string defect;
        std::set<std::pair<std::string, std::string>> owners;
        for (const auto& row : file.rows) owners.emplace(row.stockname, row.expert);
        if (owners.size() > 1) {
            throw InvariantError(file.source + ": file mixes several (stockname, expert) pairs");
        }
        if (file.quotes) {
            const auto it = quote_store.find(file.quotes->stockname);
            if (it != quote_store.end()) {
                for (const auto& bar : file.quotes->bars) {
                    const auto known = it->second.find(bar.date);
                    if (known != it->second.end() && !(known->second == bar)) {
                        defect = "quote for " + file.quotes->stockname + " on " +
                                 bar.date.to_string() + " conflicts with an earlier file";
                        break;
                    }
                }
            }
        }
        std::map<Key, const ExpertLabelRow*> fresh;
        if (defect.empty()) {
            for (const auto& row : file.rows) {
                Key key{row.date, row.stockname, row.expert};
                const auto known = label_store.find(key);
                const auto seen = fresh.find(key);
                if ((known != label_store.end() && !(known->second == row)) ||
                    (seen != fresh.end() && !(*seen->second == row))) {
                    defect = "label for " + row.stockname + "/" + row.expert + " on " +
                             row.date.to_string() + " conflicts with another row";
                    break;
                }
                if (known == label_store.end()) fresh.emplace(key, &row);
            }
        }
        if (!defect.empty()) {
            if (policy == DefectPolicy::Throw) throw DefectFileError(file.source + ": " + defect);
            result.rejected.push_back(file.source);
            continue;
        }
        if (file.quotes) {
            auto& store = quote_store[file.quotes->stockname];
            for (const auto& bar : file.quotes->bars) store.emplace(bar.date, bar);
        }
        for (const auto& row : file.rows) {
            Key key{row.date, row.stockname, row.expert};
            if (label_store.emplace(key, row).second) order.push_back(std::move(key));
        }
    }

    result.rows.reserve(order.size());
    for (const auto& key : order) result.rows.push_back(label_store.at(key));
    for (auto& [stock, bars] : quote_store) {
        QuoteSeries series{stock, {}};
        series.bars.reserve(bars.size());
        for (auto& [date, bar] : bars) series.bars.push_back(bar);
        result.quotes.emplace(stock, std::move(series));
    }
    return result;
}

}  // namespace trendlab::data
