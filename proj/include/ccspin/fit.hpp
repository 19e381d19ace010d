#pragma once

#include <vector>

namespace ccs {

// y = intercept + slope * x
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double se_intercept = 0.0;
    double se_slope = 0.0;
    double r2 = 0.0;
    int n = 0;
};

LineFit ols_line(const std::vector<double>& x, const std::vector<double>& y);
// Least absolute deviations by iteratively reweighted least squares.
LineFit lad_line(const std::vector<double>& x, const std::vector<double>& y, int max_iter = 200);
double r_squared(const std::vector<double>& x, const std::vector<double>& y, double intercept,
                 double slope);

}  // namespace ccs
