#include "trendlab/evaluation.h"

#include "trendlab/csv.h"
#include "trendlab/error.h"
#include "trendlab/parallel.h"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

namespace trendlab::eval {

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw ShapeError("roc_auc: scores and labels differ in length");
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        // Ranks i+1 .. j share their average.
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            if (labels[idx[t]]) {
                pos_rank_sum += avg_rank;
                ++pos;
            }
        }
        i = j;
    }
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw SingleClassError("roc_auc needs both classes present");
    const double p = static_cast<double>(pos);
    return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

namespace {

double ratio(std::size_t num, std::size_t den, bool& zero_division) {
    if (den == 0) {
        zero_division = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

ClassReport class_report(std::span<const std::uint8_t> predicted,
                         std::span<const std::uint8_t> labels, std::span<const double> scores) {
    if (predicted.size() != labels.size() || (!scores.empty() && scores.size() != labels.size())) {
        throw ShapeError("class_report: inputs differ in length");
    }
    // confusion[truth][prediction]
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++confusion[labels[i] ? 1 : 0][predicted[i] ? 1 : 0];
    }
    ClassReport rep;
    rep.count = labels.size();
    for (int c = 0; c < 2; ++c) {
        const std::size_t tp = confusion[c][c];
        const std::size_t predicted_c = confusion[0][c] + confusion[1][c];
        const std::size_t actual_c = confusion[c][0] + confusion[c][1];
        auto& m = rep.classes[static_cast<std::size_t>(c)];
        m.precision = ratio(tp, predicted_c, rep.zero_division);
        m.recall = ratio(tp, actual_c, rep.zero_division);
        m.f1 = harmonic(m.precision, m.recall);
        m.support = actual_c;
    }
    bool unused = false;
    rep.accuracy = ratio(confusion[0][0] + confusion[1][1], labels.size(), unused);
    rep.f1_macro = (rep.classes[0].f1 + rep.classes[1].f1) / 2.0;
    if (!labels.empty()) {
        const double n = static_cast<double>(labels.size());
        for (const auto& m : rep.classes) {
            const double w = static_cast<double>(m.support) / n;
            rep.weighted.precision += w * m.precision;
            rep.weighted.recall += w * m.recall;
            rep.weighted.f1 += w * m.f1;
        }
        rep.weighted.support = labels.size();
    }
    if (!scores.empty() && rep.classes[0].support > 0 && rep.classes[1].support > 0) {
        rep.auc = roc_auc(scores, labels);
    }
    return rep;
}

Scoring parse_scoring(std::string_view name) {
    if (name == "f1_macro") return Scoring::F1Macro;
    if (name == "roc_auc" || name == "auc") return Scoring::RocAuc;
    if (name == "accuracy") return Scoring::Accuracy;
    if (name == "f1" || name == "f1_minority") return Scoring::F1Minority;
    throw ConfigError("unknown scoring '" + std::string(name) + "'");
}

std::string_view to_string(Scoring s) {
    switch (s) {
        case Scoring::F1Macro: return "f1_macro";
        case Scoring::RocAuc: return "roc_auc";
        case Scoring::Accuracy: return "accuracy";
        case Scoring::F1Minority: return "f1";
    }
    return "?";
}

double score(Scoring metric, std::span<const std::uint8_t> labels,
             std::span<const double> probabilities, double threshold) {
    if (metric == Scoring::RocAuc) return roc_auc(probabilities, labels);
    const auto pred = gbdt::classify(probabilities, threshold);
    const auto rep = class_report(pred, labels);
    switch (metric) {
        case Scoring::F1Macro: return rep.f1_macro;
        case Scoring::Accuracy: return rep.accuracy;
        case Scoring::F1Minority: return rep.classes[1].f1;
        case Scoring::RocAuc: break;
    }
    return 0.0;
}

std::vector<int> stratified_folds(const Matrix& X, std::span<const std::uint8_t> y, int k,
                                  std::uint64_t seed) {
    const std::size_t n = X.rows();
    if (y.size() != n) throw ShapeError("stratified_folds: X and y differ in length");
    if (k < 2 || static_cast<std::size_t>(k) > n) {
        throw FoldDegenerateError("cannot make " + std::to_string(k) + " folds from " +
                                  std::to_string(n) + " rows");
    }
    // Content order: identical rows are interchangeable, so the assignment only
    // depends on the multiset of rows.
    std::vector<std::size_t> canon(n);
    std::iota(canon.begin(), canon.end(), std::size_t{0});
    std::stable_sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
        if (y[a] != y[b]) return y[a] < y[b];
        const auto ra = X.row(a), rb = X.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    std::mt19937_64 rng(seed);
    std::vector<int> fold(n, 0);
    std::size_t dealt = 0;
    for (std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
        std::vector<std::size_t> bucket;
        for (auto i : canon) {
            if (y[i] == cls) bucket.push_back(i);
        }
        std::shuffle(bucket.begin(), bucket.end(), rng);
        for (auto i : bucket) fold[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
    }
    return fold;
}

namespace {

/// Indices sorted by (class, row content): the order folds are trained in.
std::vector<std::size_t> content_order(const Matrix& X, std::span<const std::uint8_t> y) {
    std::vector<std::size_t> canon(X.rows());
    std::iota(canon.begin(), canon.end(), std::size_t{0});
    std::stable_sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
        if (y[a] != y[b]) return y[a] < y[b];
        const auto ra = X.row(a), rb = X.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    return canon;
}

}  // namespace

CvResult kfold_cv(const Matrix& X, std::span<const std::uint8_t> y, const gbdt::GbdtParams& params,
                  int k, Scoring scoring, std::uint64_t seed) {
    const auto fold = stratified_folds(X, y, k, seed);
    const auto canon = content_order(X, y);
    CvResult result;
    result.fold_scores.assign(static_cast<std::size_t>(k), 0.0);
    result.fold_seconds.assign(static_cast<std::size_t>(k), 0.0);

    // Folds run side by side; each fit then stays single-threaded.
    const unsigned outer = std::min<unsigned>(resolve_threads(params.threads), static_cast<unsigned>(k));
    gbdt::GbdtParams inner = params;
    if (outer > 1) inner.threads = 1;

    parallel_for(static_cast<std::size_t>(k), static_cast<int>(outer), [&](std::size_t f) {
        std::vector<std::size_t> train, test;
        for (auto i : canon) (fold[i] == static_cast<int>(f) ? test : train).push_back(i);
        std::vector<std::uint8_t> y_train, y_test;
        for (auto i : train) y_train.push_back(y[i]);
        for (auto i : test) y_test.push_back(y[i]);
        const auto start = std::chrono::steady_clock::now();
        const auto model = gbdt::fit(X.select(train), y_train, inner);
        result.fold_seconds[f] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto proba = gbdt::predict_proba(model, X.select(test));
        try {
            result.fold_scores[f] = score(scoring, y_test, proba);
        } catch (const SingleClassError&) {
            throw FoldDegenerateError("fold " + std::to_string(f) + " holds a single class; " +
                                      std::string(to_string(scoring)) + " is undefined");
        }
    });
    result.mean = std::accumulate(result.fold_scores.begin(), result.fold_scores.end(), 0.0) /
                  static_cast<double>(k);
    return result;
}

std::size_t grid_size(const ParamGrid& grid) {
    std::size_t total = 1;
    for (const auto& [name, values] : grid) total *= values.size();
    return grid.empty() ? 0 : total;
}

std::vector<std::pair<std::string, double>> grid_point(const ParamGrid& grid, std::size_t index) {
    std::vector<std::pair<std::string, double>> point(grid.size());
    for (std::size_t p = grid.size(); p-- > 0;) {
        const auto& values = grid[p].second;
        point[p] = {grid[p].first, values[index % values.size()]};
        index /= values.size();
    }
    return point;
}

SearchResult grid_search(const Matrix& X, std::span<const std::uint8_t> y, const ParamGrid& grid,
                         SearchMode mode, int k, Scoring scoring, std::uint64_t seed,
                         const gbdt::GbdtParams& base) {
    if (grid.empty()) throw ConfigError("grid search needs at least one parameter");
    for (const auto& [name, values] : grid) {
        if (values.empty()) throw ConfigError("grid parameter '" + name + "' has no values");
        gbdt::GbdtParams probe = base;
        gbdt::set_param(probe, name, values.front());
    }
    const std::size_t total = grid_size(grid);
    std::vector<std::size_t> points(total);
    std::iota(points.begin(), points.end(), std::size_t{0});
    if (mode.randomized && mode.n_draws < total) {
        std::mt19937_64 rng(seed);
        std::shuffle(points.begin(), points.end(), rng);
        points.resize(mode.n_draws);
        std::sort(points.begin(), points.end());
    }

    SearchResult result;
    bool have_best = false;
    for (auto index : points) {
        Candidate c;
        c.values = grid_point(grid, index);
        gbdt::GbdtParams params = base;
        for (const auto& [name, value] : c.values) gbdt::set_param(params, name, value);
        const auto cv = kfold_cv(X, y, params, k, scoring, seed);
        c.mean_score = cv.mean;
        c.fold_seconds = cv.fold_seconds;
        c.fit_seconds = std::accumulate(cv.fold_seconds.begin(), cv.fold_seconds.end(), 0.0);
        if (!have_best || c.mean_score > result.best_score) {
            have_best = true;
            result.best_score = c.mean_score;
            result.best_index = result.candidates.size();
            result.best_params = params;
        }
        result.candidates.push_back(std::move(c));
    }
    return result;
}

std::string format_search_csv(const SearchResult& result, const ParamGrid& grid,
                              bool with_timings) {
    std::string out;
    for (const auto& [name, values] : grid) out += name + ",";
    out += with_timings ? "mean_score,fit_seconds\n" : "mean_score\n";
    for (const auto& c : result.candidates) {
        for (const auto& [name, value] : c.values) out += csv::format_double(value) + ",";
        out += csv::format_double(c.mean_score);
        if (with_timings) out += "," + csv::format_double(c.fit_seconds);
        out += '\n';
    }
    return out;
}

}  // namespace trendlab::eval
