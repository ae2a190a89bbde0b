#pragma once

#include <utility>
#include <vector>

namespace dwt {

/// Least-squares line through (log x, log y) or (x, y) points.
struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::pair<double, double> window{0.0, 0.0};  ///< abscissa range (untransformed)
};

/// Ordinary least squares of y on x. Throws on zero variance in x.
ExponentFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Fit of log y against log x; window reports the range of x.
ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, int n);

}  // namespace dwt
