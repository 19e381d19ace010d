#pragma once

#include "ccspin/core.hpp"

#include <complex>
#include <cstdio>
#include <string>
#include <vector>

namespace ccs {

struct NoConvergence : std::runtime_error {
    static std::string fmt_residual(double r) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", r);
        return buf;
    }
    int iterations;
    double residual;
    NoConvergence(int it, double res)
        : std::runtime_error("Newton iteration did not converge (iter " + std::to_string(it) +
                             ", residual " + fmt_residual(res) + ")"),
          iterations(it), residual(res) {}
};

struct CentralConfiguration {
    Config config;
    double lambda = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

struct SolveOptions {
    double tol = 1e-12;
    int max_iter = 50;
    bool normalize = true;  // rescale to I = 1; otherwise keep the seed's I
};

CentralConfiguration solve_cc(const Config& seed, const SolveOptions& opt = {});
// Wrap a configuration known to be central (closed-form families) without iterating.
CentralConfiguration exact_cc(const Config& c);
double cc_residual(const Config& c, double lambda);

struct Partition {
    int n0 = 0, np = 0, n1 = 0, n2 = 0, n3 = 0;
    int total() const { return n0 + np + n1 + n2 + n3; }
};

enum class ModeKind { Zero, Positive, Real, Complex, Critical };
const char* to_string(ModeKind k);

struct SpectralReport {
    CentralConfiguration cc;
    double I = 1.0;
    double lambda = 0.0;       // at the configuration's own scale
    double kappa = 0.0;        // 2 lambda
    double lambda_unit = 0.0;  // after rescaling to I = 1
    double kappa_unit = 0.0;
    Vec mu;       // mu_j = sqrt(I) * eigenvalue of (lambda Id + M^-1 B) on the complement
    Vec mu_unit;  // same at I = 1 (equals I * mu)
    Vec eig_operator;  // eigenvalues of lambda Id + M^-1 B on the complement (mu / sqrt(I))
    Mat basis;         // columns E3_hat, E4_hat, E5_hat, ..., mass-orthonormal
    std::vector<std::complex<double>> tilde_mu;
    std::vector<ModeKind> kind;
    Partition partition;
    std::string scale_note;
};

struct ClassifyOptions {
    double zero_tol = 1e-8;
    double critical_tol = 1e-9;  // |mu + kappa/16| <= critical_tol * kappa -> n3
};

SpectralReport classify(const CentralConfiguration& cc, const ClassifyOptions& opt = {});

// Full 2N x 2N operator lambda Id + M^-1 B.
Mat cc_operator(const Config& c, double lambda);

// Nullity of lambda M + B + lambda M E4 E4^T M (E4 mass-normalized), symmetric form.
int bordered_nullity(const CentralConfiguration& cc, double zero_tol = 1e-8);

struct ManifoldDimension {
    int dimension;
    bool upper_bound;  // true when n0 > 0
};
ManifoldDimension collision_manifold_dimension(const SpectralReport& report);

}  // namespace ccs
