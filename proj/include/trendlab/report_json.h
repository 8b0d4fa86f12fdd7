#pragma once

#include "trendlab/evaluation.h"
#include "trendlab/labels.h"
#include "trendlab/pipeline.h"

#include <json.hpp>

namespace trendlab::report {

using nlohmann::ordered_json;

/// Per-stock row with the Table 13 column names (Profit, Days_in, ...).
ordered_json to_json(const pipeline::StockStats& s);
/// Aggregate with numStocks, the totals and DayProfit / YearProfit / YearProfit_avg.
ordered_json to_json(const pipeline::BacktestReport& r);
ordered_json to_json(const eval::ClassReport& r);
ordered_json to_json(const labels::ContradictionStats& s);
ordered_json to_json(const labels::ClassBalance& b);

/// Pretty JSON text with a trailing newline.
std::string dump(const ordered_json& j);

}  // namespace trendlab::report
