#pragma once

#include "trendlab/matrix.h"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trendlab::gbdt {

/// Hyperparameters of the boosted ensemble. Defaults follow the usual
/// reference-library defaults (100 trees of depth 3, lr 0.1, lambda 1).
struct GbdtParams {
    int n_estimators = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    double reg_lambda = 1.0;
    double reg_alpha = 0.0;
    double subsample = 1.0;
    double scale_pos_weight = 1.0;
    double min_child_weight = 1.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    /// Worker threads for split search; 0 means all. Never changes the result.
    int threads = 0;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Names accepted by set_param / get_param (the tunable numeric fields).
const std::vector<std::string>& param_names();
void set_param(GbdtParams& params, std::string_view name, double value);
double get_param(const GbdtParams& params, std::string_view name);

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;  ///< go left iff value < threshold
    bool default_left = true;  ///< branch taken for a missing (NaN) value
    int left = -1;
    int right = -1;
    double value = 0.0;  ///< leaf output, already scaled by the learning rate
    double gain = 0.0;   ///< split gain (internal nodes)
    double cover = 0.0;  ///< hessian sum of the training rows reaching the node

    bool is_leaf() const { return feature < 0; }
};

/// Binary tree stored as a node array; node 0 is the root.
struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const;
    int depth() const;
};

struct GbdtModel {
    GbdtParams params;
    std::size_t n_features = 0;
    double base_logit = 0.0;
    std::vector<Tree> trees;

    double margin(std::span<const double> x) const;
};

struct FitReport {
    bool single_class = false;  ///< training targets held one class only
    /// Weighted mean log-loss on the training rows after each round.
    std::vector<double> train_loss;
};

/// Second-order boosting of logistic loss with exact greedy splits.
/// Throws ShapeError when X and y disagree or X is empty.
GbdtModel fit(const Matrix& X, std::span<const std::uint8_t> y, const GbdtParams& params,
              FitReport* report = nullptr);

/// sigmoid(base_logit + sum of leaf outputs), one per row.
std::vector<double> predict_proba(const GbdtModel& model, const Matrix& X);

/// 1 iff probability >= threshold; threshold must lie in (0, 1).
std::vector<std::uint8_t> predict(const GbdtModel& model, const Matrix& X, double threshold = 0.5);
std::vector<std::uint8_t> classify(std::span<const double> probabilities, double threshold);

double sigmoid(double margin);

/// Split gain for child gradient/hessian sums, including the L1 and gamma terms.
double split_gain(double g_left, double h_left, double g_right, double h_right,
                  const GbdtParams& params);
/// Unscaled optimal leaf weight -T(G)/(H + lambda), T the L1 soft threshold.
double leaf_weight(double g, double h, const GbdtParams& params);

/// Self-describing JSON: params, feature count and nested tree nodes.
std::string to_json(const GbdtModel& model);
GbdtModel from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const GbdtModel& model);
GbdtModel load_model(const std::filesystem::path& path);

}  // namespace trendlab::gbdt
