#include "trendlab/report_json.h"

namespace trendlab::report {

ordered_json to_json(const pipeline::StockStats& s) {
    ordered_json j;
    j["Stockname"] = s.stockname;
    j["Profit"] = s.profit;
    j["Days_in"] = s.days_in;
    j["Times_in"] = s.times_in;
    j["Profit_lng"] = s.profit_lng;
    j["Days_in_lng"] = s.days_in_lng;
    j["Times_in_lng"] = s.times_in_lng;
    j["Profit_sht"] = s.profit_sht;
    j["Days_in_sht"] = s.days_in_sht;
    j["Times_in_sht"] = s.times_in_sht;
    return j;
}

ordered_json to_json(const pipeline::BacktestReport& r) {
    ordered_json j;
    j["numStocks"] = r.num_stocks;
    j["num_datapoints"] = r.num_datapoints;
    auto totals = to_json(r.totals);
    totals.erase("Stockname");
    for (auto& [k, v] : totals.items()) j[k] = v;
    j["DayProfit"] = r.day_profit;
    j["YearProfit"] = r.year_profit;
    j["YearProfit_avg"] = r.year_profit_avg;
    j["no_days_in"] = r.no_days_in;
    return j;
}

namespace {

ordered_json metrics(const eval::ClassMetrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

}  // namespace

ordered_json to_json(const eval::ClassReport& r) {
    ordered_json j;
    j["class_0"] = metrics(r.classes[0]);
    j["class_1"] = metrics(r.classes[1]);
    j["avg_total"] = metrics(r.weighted);
    j["accuracy"] = r.accuracy;
    j["f1_macro"] = r.f1_macro;
    j["auc"] = r.auc ? ordered_json(*r.auc) : ordered_json(nullptr);
    j["zero_division"] = r.zero_division;
    j["rows"] = r.count;
    return j;
}

ordered_json to_json(const labels::ContradictionStats& s) {
    return {{"text", s.to_string()},
            {"rows", s.rows},
            {"positives", s.positives},
            {"contradicting_rows", s.contradicting_rows},
            {"contradicting_positives", s.contradicting_positives},
            {"pct_of_positives", s.pct_of_positives}};
}

ordered_json to_json(const labels::ClassBalance& b) {
    return {{"text", b.to_string()},
            {"negatives", b.negatives},
            {"positives", b.positives},
            {"ratio", b.ratio()}};
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace trendlab::report
