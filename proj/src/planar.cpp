#include "ccspin/planar.hpp"

#include "ccspin/fit.hpp"

#include <Eigen/Core>
#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ccs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double th) {
    th = std::fmod(th, kTwoPi);
    if (th < 0) th += kTwoPi;
    if (th >= kTwoPi) th -= kTwoPi;
    return th;
}

double homogeneous(const std::vector<double>& c, double x, double y) {
    const int d = static_cast<int>(c.size()) - 1;
    double s = 0;
    for (int j = 0; j <= d; ++j) s += c[j] * std::pow(x, d - j) * std::pow(y, j);
    return s;
}

// polynomial product, coefficients in ascending powers
std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> r(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

}  // namespace

double eval(const TrigPoly& p, double theta) {
    return homogeneous(p.coeff, std::cos(theta), std::sin(theta));
}

double derivative(const TrigPoly& p, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    const int d = p.degree;
    double r = 0;
    for (int j = 0; j <= d; ++j) {
        // d/dt cos^{d-j} sin^j
        double term = 0;
        if (d - j > 0) term -= (d - j) * std::pow(c, d - j - 1) * std::pow(s, j + 1);
        if (j > 0) term += j * std::pow(c, d - j + 1) * std::pow(s, j - 1);
        r += p.coeff[j] * term;
    }
    return r;
}

PlanarSystem planar_from_c(const std::array<double, 4>& c) {
    PlanarSystem s;
    s.m = 2;
    s.P = {c[0], 2.0 * c[1], c[2]};
    s.Q = {c[1], 2.0 * c[2], c[3]};
    return s;
}

std::pair<double, double> leading_rhs(const PlanarSystem& sys, double zeta, double eta) {
    return {homogeneous(sys.P, zeta, eta), homogeneous(sys.Q, zeta, eta)};
}

PolarForms polar_forms(const PlanarSystem& sys) {
    const int m = sys.m;
    if (static_cast<int>(sys.P.size()) != m + 1 || static_cast<int>(sys.Q.size()) != m + 1)
        throw std::invalid_argument("polar_forms: P and Q need m+1 coefficients");
    PolarForms f;
    f.Phi.degree = f.Psi.degree = m + 1;
    f.Phi.coeff.assign(m + 2, 0.0);
    f.Psi.coeff.assign(m + 2, 0.0);
    for (int j = 0; j <= m; ++j) {
        // P cos + Q sin ; Q cos - P sin
        f.Phi.coeff[j] += sys.P[j];
        f.Phi.coeff[j + 1] += sys.Q[j];
        f.Psi.coeff[j] += sys.Q[j];
        f.Psi.coeff[j + 1] -= sys.P[j];
    }
    return f;
}

std::vector<double> characteristic_directions(const TrigPoly& psi) {
    double scale = 0;
    for (double c : psi.coeff) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) throw IdenticallyZero();
    const int d = psi.degree;

    // t = tan(theta/2): cos = (1-t^2)/(1+t^2), sin = 2t/(1+t^2)
    std::vector<double> poly(2 * d + 1, 0.0);
    for (int j = 0; j <= d; ++j) {
        std::vector<double> term{psi.coeff[j] / scale};
        for (int k = 0; k < d - j; ++k) term = mul(term, {1.0, 0.0, -1.0});
        for (int k = 0; k < j; ++k) term = mul(term, {0.0, 2.0});
        for (size_t i = 0; i < term.size(); ++i) poly[i] += term[i];
    }
    while (poly.size() > 1 && std::abs(poly.back()) < 1e-14) poly.pop_back();

    std::vector<double> cand;
    if (poly.size() > 1) {
        Eigen::VectorXd pc = Eigen::Map<Eigen::VectorXd>(poly.data(), poly.size());
        Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(pc);
        for (int i = 0; i < solver.roots().size(); ++i) {
            const auto z = solver.roots()(i);
            if (std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z))) cand.push_back(wrap(2.0 * std::atan(z.real())));
        }
    }
    if (std::abs(eval(psi, std::numbers::pi)) <= 1e-12 * scale) cand.push_back(std::numbers::pi);

    std::vector<double> roots;
    for (double th : cand) {
        for (int it = 0; it < 30; ++it) {
            const double dv = derivative(psi, th);
            if (dv == 0.0) break;
            const double step = eval(psi, th) / dv;
            th -= step;
            if (std::abs(step) < 1e-16) break;
        }
        th = wrap(th);
        if (std::abs(eval(psi, th)) > 1e-10 * scale) continue;
        bool dup = false;
        for (double r : roots) {
            const double dd = std::abs(r - th);
            if (std::min(dd, kTwoPi - dd) < 1e-7) dup = true;
        }
        if (!dup) roots.push_back(th);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

RateEstimate rate_estimate(const TrigPoly& phi, double theta0, int m) {
    RateEstimate r;
    r.theta0 = theta0;
    r.m = m;
    r.phi = eval(phi, theta0);
    r.exponent = 1.0 / (m - 1);
    // values at rounding level of the coefficients count as zero
    double scale = 0;
    for (double c : phi.coeff) scale += std::abs(c);
    r.sharp = r.phi > 1e-12 * scale;
    if (r.sharp) r.prefactor = std::pow((m - 1) * r.phi, -r.exponent);
    return r;
}

PlanarFit simulate_and_fit(const PlanarSystem& sys, double theta_seed, double rho0,
                           double tau_start, double tau_end, int samples) {
    if (!(tau_end < tau_start && tau_start < 0))
        throw std::invalid_argument("simulate_and_fit: need tau_end < tau_start < 0");
    Rhs f = [&](const State& y, State& dy, double) {
        const auto [a, b] = sys.full_rhs ? sys.full_rhs(y[0], y[1]) : leading_rhs(sys, y[0], y[1]);
        dy[0] = a;
        dy[1] = b;
    };
    std::vector<double> times(samples);
    const double l0 = std::log(-tau_start), l1 = std::log(-tau_end);
    for (int i = 0; i < samples; ++i) times[i] = -std::exp(l0 + (l1 - l0) * i / (samples - 1));
    times.back() = tau_end;
    OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-16;
    opt.record_steps = false;
    const State y0{rho0 * std::cos(theta_seed), rho0 * std::sin(theta_seed)};
    const OdeResult res = integrate(f, y0, tau_start, tau_end, opt, nullptr, times);

    PlanarFit out;
    out.status = res.status;
    double prev = theta_seed;
    for (size_t i = 0; i < res.t.size(); ++i) {
        const double rho = std::hypot(res.y[i][0], res.y[i][1]);
        double th = std::atan2(res.y[i][1], res.y[i][0]);
        th += kTwoPi * std::round((prev - th) / kTwoPi);
        prev = th;
        out.tau.push_back(res.t[i]);
        out.rho.push_back(rho);
        out.theta.push_back(th);
    }
    if (out.tau.size() < 3) return out;
    const double e = 1.0 / (sys.m - 1);
    std::vector<double> lx, ly;
    const double cut = std::log(-out.tau.back()) - std::log(10.0);
    for (size_t i = 0; i < out.tau.size(); ++i) {
        const double l = std::log(-out.tau[i]);
        if (l >= cut && out.rho[i] > 0) {
            lx.push_back(l);
            ly.push_back(std::log(out.rho[i]));
        }
    }
    if (lx.size() >= 3) {
        const LineFit lf = ols_line(lx, ly);
        out.exponent_num = -lf.slope;
        out.r2 = lf.r2;
    }
    out.prefactor_num = out.rho.back() * std::pow(-out.tau.back(), e);
    out.theta0_num = out.theta.back();
    const PolarForms pf = polar_forms(sys);
    out.psi_at_theta0 = eval(pf.Psi, out.theta0_num);
    return out;
}

PlanarFit shoot_characteristic_ray(const PlanarSystem& sys, double theta_lo, double theta_hi,
                                   double rho0, double tau_end, int samples) {
    Rhs f = [&](const State& y, State& dy, double) {
        const auto [a, b] = sys.full_rhs ? sys.full_rhs(y[0], y[1]) : leading_rhs(sys, y[0], y[1]);
        dy[0] = a;
        dy[1] = b;
    };
    OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-16;
    // angular offset from the seed once the orbit has clearly turned away (or at tau_end)
    auto side = [&](double th) {
        const State y0{rho0 * std::cos(th), rho0 * std::sin(th)};
        auto gone = [&](double, const State& y) {
            const double a = std::atan2(y[1], y[0]) - th;
            return std::abs(std::remainder(a, kTwoPi)) > 0.2;
        };
        const OdeResult res = integrate(f, y0, -1.0, tau_end, opt, gone);
        const State& y = res.y.back();
        return std::remainder(std::atan2(y[1], y[0]) - th, kTwoPi);
    };
    const double dlo = side(theta_lo);
    const double dhi = side(theta_hi);
    if (!(dlo * dhi < 0))
        throw std::domain_error("shoot_characteristic_ray: the bracket does not straddle a repelling ray");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (theta_lo + theta_hi);
        if (mid <= theta_lo || mid >= theta_hi) break;
        const double d = side(mid);
        if (d == 0.0) {
            theta_lo = theta_hi = mid;
            break;
        }
        ((d < 0) == (dlo < 0) ? theta_lo : theta_hi) = mid;
    }
    const double th = 0.5 * (theta_lo + theta_hi);
    PlanarFit out = simulate_and_fit(sys, th, rho0, -1.0, tau_end, samples);
    out.theta0_num = th;
    out.psi_at_theta0 = eval(polar_forms(sys).Psi, th);
    return out;
}

std::pair<double, double> example1_rhs(double u, double v) {
    return {-u * u * (u * u + 1.0) * v, v};
}

double example1_invariant(double u, double v) { return 1.0 / u + std::atan(u) - v; }

SeriesSamples example2_series(double tau_start, double tau_end, int samples) {
    if (!(tau_start > 1.0 && tau_end > tau_start))
        throw std::invalid_argument("example2_series: need 1 < tau_start < tau_end");
    // integrate in x = ln tau
    Rhs f = [](const State&, State& dy, double x) {
        const double tau = std::exp(x);
        const double L = std::log(tau);
        const double A = 1.0 / std::sqrt(tau * L);
        const double dA = -0.5 * A * (L + 1.0) / (tau * L);
        const double u = A * std::sin(tau), v = A * std::cos(tau);
        const double du = dA * std::sin(tau) + A * std::cos(tau);
        const double dv = dA * std::cos(tau) - A * std::sin(tau);
        dy[0] = tau * (u * dv - v * du);
    };
    std::vector<double> xs(samples);
    const double x0 = std::log(tau_start), x1 = std::log(tau_end);
    for (int i = 0; i < samples; ++i) xs[i] = x0 + (x1 - x0) * i / (samples - 1);
    xs.back() = x1;
    OdeOptions opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-13;
    opt.dt0 = 1e-4;
    opt.record_steps = false;
    const OdeResult res = integrate(f, State{0.0}, x0, x1, opt, nullptr, xs);
    SeriesSamples out;
    for (size_t i = 0; i < res.t.size(); ++i) {
        out.tau.push_back(std::exp(res.t[i]));
        out.value.push_back(res.y[i][0]);
    }
    return out;
}

}  // namespace ccs
