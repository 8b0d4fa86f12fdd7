#pragma once

#include <span>

namespace trendlab {

/// Ordinary least squares of y on x = 0, 1, ..., n-1.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Coefficient of determination in [0, 1]; 0 when y has no variance.
    double r2 = 0.0;
};

/// Requires y.size() >= 2 (throws TooShortError otherwise).
LineFit fit_line(std::span<const double> y);

}  // namespace trendlab
