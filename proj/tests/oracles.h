#pragma once

// Independent reference computations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Solves the 2x2 normal equations of y on x = 0..n-1 in long double.
inline Line ols_normal_equations(std::span<const double> y) {
    long double n = y.size(), sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long double x = i;
        sx += x;
        sxx += x * x;
        sy += y[i];
        sxy += x * y[i];
    }
    const long double det = n * sxx - sx * sx;
    const long double b = (n * sxy - sx * sy) / det;
    const long double a = (sy - b * sx) / n;
    long double ss_res = 0, ss_tot = 0;
    const long double mean = sy / n;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const long double fit = a + b * static_cast<long double>(i);
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    Line out;
    out.slope = static_cast<double>(b);
    out.intercept = static_cast<double>(a);
    out.r2 = ss_tot == 0 ? 0.0 : static_cast<double>(1 - ss_res / ss_tot);
    return out;
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting half.
inline double pairwise_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    double good = 0, pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            pairs += 1;
            if (scores[i] > scores[j]) good += 1;
            else if (scores[i] == scores[j]) good += 0.5;
        }
    }
    return good / pairs;
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Closed-form gain without the L1 term.
inline double gain_formula(double gl, double hl, double gr, double hr, double lambda, double gamma) {
    const auto term = [&](double g, double h) { return g * g / (h + lambda); };
    return 0.5 * (term(gl, hl) + term(gr, hr) - term(gl + gr, hl + hr)) - gamma;
}

/// Exhaustive root split: every feature, every midpoint between consecutive
/// distinct values, child sums recomputed from scratch for each candidate.
/// Keeps the first strict maximum in (feature, threshold) order.
inline Split best_root_split(const std::vector<std::vector<double>>& X,
                             std::span<const double> g, std::span<const double> h, double lambda,
                             double gamma, double min_child_weight) {
    Split best;
    const std::size_t n = X.size();
    const std::size_t d = n ? X[0].size() : 0;
    for (std::size_t f = 0; f < d; ++f) {
        std::vector<double> values;
        for (const auto& row : X) values.push_back(row[f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            double t = values[k] + (values[k + 1] - values[k]) / 2.0;
            if (!(values[k] < t)) t = values[k + 1];
            double gl = 0, hl = 0, gr = 0, hr = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (X[i][f] < t) {
                    gl += g[i];
                    hl += h[i];
                } else {
                    gr += g[i];
                    hr += h[i];
                }
            }
            if (hl < min_child_weight || hr < min_child_weight) continue;
            const double gain = gain_formula(gl, hl, gr, hr, lambda, gamma);
            if (gain > best.gain) best = {static_cast<int>(f), t, gain};
        }
    }
    return best;
}

}  // namespace oracle
