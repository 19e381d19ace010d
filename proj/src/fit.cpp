#include "ccspin/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccs {

namespace {

LineFit weighted(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& w) {
    double sw = 0, sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw std::invalid_argument("degenerate abscissae in line fit");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.n = static_cast<int>(x.size());
    return f;
}

}  // namespace

double r_squared(const std::vector<double>& x, const std::vector<double>& y, double intercept,
                 double slope) {
    double my = 0;
    for (double v : y) my += v;
    my /= static_cast<double>(y.size());
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - intercept - slope * x[i];
        ss_res += e * e;
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    return ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
}

LineFit ols_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("need at least 3 points");
    LineFit f = weighted(x, y, std::vector<double>(x.size(), 1.0));
    const double n = static_cast<double>(x.size());
    double mx = 0;
    for (double v : x) mx += v;
    mx /= n;
    double sxx = 0, sse = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        const double e = y[i] - f.intercept - f.slope * x[i];
        sse += e * e;
    }
    const double s2 = sse / (n - 2);
    f.se_slope = std::sqrt(s2 / sxx);
    f.se_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    f.r2 = r_squared(x, y, f.intercept, f.slope);
    return f;
}

LineFit lad_line(const std::vector<double>& x, const std::vector<double>& y, int max_iter) {
    LineFit f = ols_line(x, y);
    double scale = 0;
    for (size_t i = 0; i < y.size(); ++i) scale = std::max(scale, std::abs(y[i]));
    const double floor = 1e-12 * std::max(1.0, scale);
    std::vector<double> w(x.size());
    for (int it = 0; it < max_iter; ++it) {
        for (size_t i = 0; i < x.size(); ++i)
            w[i] = 1.0 / std::max(floor, std::abs(y[i] - f.intercept - f.slope * x[i]));
        LineFit g = weighted(x, y, w);
        const bool done = std::abs(g.slope - f.slope) <= 1e-14 * (1 + std::abs(f.slope)) &&
                          std::abs(g.intercept - f.intercept) <= 1e-14 * (1 + std::abs(f.intercept));
        f.slope = g.slope;
        f.intercept = g.intercept;
        if (done) break;
    }
    f.r2 = r_squared(x, y, f.intercept, f.slope);
    f.n = static_cast<int>(x.size());
    return f;
}

}  // namespace ccs
