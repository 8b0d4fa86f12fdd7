#pragma once

#include "trendlab/gbdt.h"
#include "trendlab/matrix.h"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace trendlab::eval {

/// Mann-Whitney AUC: P(score_pos > score_neg) + P(tie)/2, via average ranks.
/// Throws SingleClassError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

/// Per-class breakdown plus the support-weighted "avg/total" row.
struct ClassReport {
    std::array<ClassMetrics, 2> classes{};  ///< [0] majority (no trigger), [1] minority
    ClassMetrics weighted;
    double accuracy = 0.0;
    double f1_macro = 0.0;
    std::optional<double> auc;  ///< absent without scores or with a single class
    /// Some ratio had a zero denominator and was reported as 0.
    bool zero_division = false;
    std::size_t count = 0;
};

/// Throws ShapeError on length mismatch. `scores` may be empty.
ClassReport class_report(std::span<const std::uint8_t> predicted,
                         std::span<const std::uint8_t> labels,
                         std::span<const double> scores = {});

enum class Scoring { F1Macro, RocAuc, Accuracy, F1Minority };

Scoring parse_scoring(std::string_view name);
std::string_view to_string(Scoring s);

/// Metric value of `probabilities` thresholded at `threshold` against `labels`.
double score(Scoring metric, std::span<const std::uint8_t> labels,
             std::span<const double> probabilities, double threshold = 0.5);

struct CvResult {
    double mean = 0.0;
    std::vector<double> fold_scores;
    std::vector<double> fold_seconds;
};

/// Stratified fold ids in [0, k). Rows are bucketed by class in a content-defined
/// order before the seeded shuffle, so permuting the input rows permutes the ids.
std::vector<int> stratified_folds(const Matrix& X, std::span<const std::uint8_t> y, int k,
                                  std::uint64_t seed);

/// k-fold cross-validation of a GBDT with `params`. Throws FoldDegenerateError when
/// k < 2, k > rows, or a held-out fold cannot be scored.
CvResult kfold_cv(const Matrix& X, std::span<const std::uint8_t> y, const gbdt::GbdtParams& params,
                  int k, Scoring scoring, std::uint64_t seed);

/// Ordered list of (parameter name, candidate values).
using ParamGrid = std::vector<std::pair<std::string, std::vector<double>>>;

struct SearchMode {
    bool randomized = false;
    std::size_t n_draws = 0;

    static SearchMode full() { return {}; }
    static SearchMode random(std::size_t draws) { return {true, draws}; }
};

struct Candidate {
    std::vector<std::pair<std::string, double>> values;
    double mean_score = 0.0;
    double fit_seconds = 0.0;
    std::vector<double> fold_seconds;
};

struct SearchResult {
    std::vector<Candidate> candidates;
    std::size_t best_index = 0;
    double best_score = 0.0;
    gbdt::GbdtParams best_params;
};

/// Number of points in the Cartesian product.
std::size_t grid_size(const ParamGrid& grid);
/// Point `index` of the product; the last parameter varies fastest.
std::vector<std::pair<std::string, double>> grid_point(const ParamGrid& grid, std::size_t index);

/// Scores every grid point (or n seeded draws without replacement) by k-fold CV,
/// starting from `base` for the parameters the grid does not mention.
/// Throws ConfigError on an empty grid or an empty value list.
SearchResult grid_search(const Matrix& X, std::span<const std::uint8_t> y, const ParamGrid& grid,
                         SearchMode mode, int k, Scoring scoring, std::uint64_t seed,
                         const gbdt::GbdtParams& base = {});

/// One row per candidate: parameter columns, mean_score, fit_seconds.
std::string format_search_csv(const SearchResult& result, const ParamGrid& grid,
                              bool with_timings = true);

}  // namespace trendlab::eval
