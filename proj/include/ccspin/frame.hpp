#pragma once

#include "ccspin/cc.hpp"

#include <optional>
#include <vector>

namespace ccs {

struct DegenerateProjection : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ChartDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Chart about a CC rescaled to I = 1. Indices 0..K-1 stand for 5..2N.
struct FrameChart {
    Config base;   // unit-normalized CC
    double lambda = 0.0;
    double kappa = 0.0;
    Vec E3, E4;    // E3 = r0 / |r0|, E4 = i E3
    Mat E;         // 2N x K, columns E5_hat..E2N_hat
    Mat Q;         // K x K, q_jk = <E_j, i E_k>
    Vec mu;        // mu_k = E_k^T (lambda M + B) E_k
    std::vector<ModeKind> kind;
    double diag_residual = 0.0;  // largest off-diagonal of E^T (lambda M + B) E
    bool explicit_basis = false;

    int K() const { return static_cast<int>(E.cols()); }
    int n() const { return base.n(); }
    // a_ijk; cached for N <= 5, computed on demand otherwise
    double a(int i, int j, int k) const;
    const std::vector<double>& a_cache() const { return a_; }

    std::vector<double> a_;  // K^3 flat, empty when not precomputed
};

struct ChartPoint {
    double r = 1.0;
    double theta = 0.0;
    Vec z;
};

struct ChartOptions {
    // Replacement vectors for the leading basis slots (mass-normalized internally).
    std::vector<Vec> explicit_vectors;
    double zero_tol = 1e-8;
};

FrameChart build_chart(const SpectralReport& report, const ChartOptions& opt = {});

ChartPoint to_chart(const FrameChart& ch, const Config& c,
                    std::optional<double> theta_hint = std::nullopt);
ChartPoint to_chart(const FrameChart& ch, const Vec& x,
                    std::optional<double> theta_hint = std::nullopt);
Config from_chart(const FrameChart& ch, const ChartPoint& p);

// v(z) = z3 E3 + sum z_k E_k (unit vector); throws ChartDomainError for |z| >= 1.
Vec chart_direction(const FrameChart& ch, const Vec& z);
double z3_of(const Vec& z);

struct ChartPotential {
    double value;
    Vec grad;
};
ChartPotential potential_in_chart(const FrameChart& ch, const Vec& z);

}  // namespace ccs
