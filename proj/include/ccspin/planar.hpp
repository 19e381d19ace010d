#pragma once

#include "ccspin/ode.hpp"

#include <array>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ccs {

// Homogeneous polynomial in (cos t, sin t): sum_j coeff[j] cos^{d-j} sin^j.
struct TrigPoly {
    int degree = 0;
    std::vector<double> coeff;
};
double eval(const TrigPoly& p, double theta);
double derivative(const TrigPoly& p, double theta);

// zeta' = P_m(zeta, eta) + ..., eta' = Q_m(zeta, eta) + ...
// P[j] multiplies zeta^{m-j} eta^j.
struct PlanarSystem {
    int m = 2;
    std::vector<double> P, Q;
    std::function<std::pair<double, double>(double, double)> full_rhs;  // optional
};

// m = 2 system from the reduced center coefficients:
// P = c1 zeta^2 + 2 c2 zeta eta + c3 eta^2, Q = c2 zeta^2 + 2 c3 zeta eta + c4 eta^2.
PlanarSystem planar_from_c(const std::array<double, 4>& c);
std::pair<double, double> leading_rhs(const PlanarSystem& sys, double zeta, double eta);

struct PolarForms {
    TrigPoly Phi, Psi;
};
PolarForms polar_forms(const PlanarSystem& sys);

struct IdenticallyZero : std::domain_error {
    IdenticallyZero() : std::domain_error("trigonometric polynomial is identically zero") {}
};

// All real roots in [0, 2 pi), ascending.
std::vector<double> characteristic_directions(const TrigPoly& psi);

struct RateEstimate {
    double theta0 = 0.0;
    double phi = 0.0;
    int m = 2;
    bool sharp = false;       // Phi(theta0) > 0: rho ~ prefactor * (-tau)^(-exponent)
    double prefactor = 0.0;   // ((m-1) Phi)^(-1/(m-1))
    double exponent = 0.0;    // 1/(m-1)
};
RateEstimate rate_estimate(const TrigPoly& phi, double theta0, int m);

struct PlanarFit {
    double theta0_num = 0.0;    // final polar angle
    double psi_at_theta0 = 0.0;
    double exponent_num = 0.0;  // -slope of log rho against log(-tau), last decade
    double prefactor_num = 0.0; // rho (-tau)^(1/(m-1)) at the last sample
    double r2 = 0.0;
    std::vector<double> tau, rho, theta;
    OdeStatus status = OdeStatus::Completed;
};
// Integrates backward from tau_start to tau_end (< tau_start < 0) starting at polar (rho0, theta_seed).
PlanarFit simulate_and_fit(const PlanarSystem& sys, double theta_seed, double rho0,
                           double tau_start = -1.0, double tau_end = -1e6, int samples = 400);

// Characteristic rays that repel in angle as tau -> -infinity (Psi'/Phi < 0, always the case when
// P is a gradient) are reached only by the ray itself. This locates it by shooting: the seed angle
// in [theta_lo, theta_hi] is bisected on the side toward which the orbit turns away by tau_end.
// The returned fit is the run from the final seed; theta0_num is that seed.
PlanarFit shoot_characteristic_ray(const PlanarSystem& sys, double theta_lo, double theta_hi,
                                   double rho0, double tau_end = -1e3, int samples = 400);

// Example fixtures.
// u' = -u^2 (u^2 + 1) v, v' = v; the quantity 1/u + arctan u - v is conserved.
std::pair<double, double> example1_rhs(double u, double v);
double example1_invariant(double u, double v);
// Cumulative integral of u v' - v u' for u = sin(tau)/sqrt(tau ln tau), v = cos(tau)/sqrt(tau ln tau),
// starting at tau_start, sampled at log-spaced tau up to tau_end.
struct SeriesSamples {
    std::vector<double> tau, value;
};
SeriesSamples example2_series(double tau_start, double tau_end, int samples = 200);

}  // namespace ccs
