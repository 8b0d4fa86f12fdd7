#include "trendlab/regression.h"

#include "trendlab/error.h"

#include <algorithm>
#include <string>

namespace trendlab {

LineFit fit_line(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 2) throw TooShortError("line fit needs at least 2 points, got " + std::to_string(n));
    LineFit fit;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
        fit.intercept = y[0];
        return fit;
    }
    const double nd = static_cast<double>(n);
    const double x_mean = (nd - 1.0) / 2.0;
    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= nd;

    // Centered sums keep the fit stable for long windows of log prices.
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - x_mean;
        const double dy = y[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    if (syy > 0.0) {
        // 1 - SSres/SStot, with SSres = syy - sxy^2/sxx for the least squares line.
        const double ss_res = std::max(0.0, syy - sxy * sxy / sxx);
        fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

}  // namespace trendlab
