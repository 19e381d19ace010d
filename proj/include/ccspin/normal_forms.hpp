#pragma once

#include "ccspin/frame.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace ccs {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Linear part of the shifted system in y = (z, Z, gamma), gamma = Upsilon - sqrt(kappa).
// Column k of P is the eigenvector for tilde-mu_k, column K + k for its partner
// -sqrt(kappa)/2 - tilde-mu_k; for a critical index (mu = -kappa/16) the pair becomes a
// Jordan block with off-diagonal epsilon. The last coordinate (gamma) is left unchanged.
struct LinearData {
    int K = 0;
    double kappa = 0.0;
    double epsilon = 0.0;
    Vec lambda_diag;  // mu with zero and critical values snapped to 0 and -kappa/16
    std::vector<ModeKind> kind;
    Mat A;
    CMat P, P_inv, P_inv_explicit, C;
    std::vector<std::complex<double>> nu_plus, nu_minus;
    double conjugation_residual = 0.0;  // ||P^-1 A P - C|| / ||A||
    bool n3_engaged = false;
};

LinearData build_linearization(const FrameChart& ch, double epsilon = 0.0);
// Same from raw spectral data (synthetic tests).
LinearData build_linearization(const Vec& mu, double kappa, double epsilon = 0.0,
                               double zero_tol = 1e-8, double critical_tol = 1e-9);

// Eigenvalues of A computed directly, and the multiset predicted from tilde-mu.
std::vector<std::complex<double>> spectrum_direct(const LinearData& lin);
std::vector<std::complex<double>> spectrum_predicted(const LinearData& lin);
double spectrum_mismatch(const LinearData& lin);

// Quadratic parts of the nonlinearities: returns (chi_5..chi_2N, chi_0).
Vec chi_quadratic(const FrameChart& ch, const Vec& y);
// Exact right-hand side of the shifted system (from the blown-up equations at r = 0).
Vec shifted_rhs_full(const FrameChart& ch, const Vec& y);
// A y + (0, chi, chi_0) with the quadratic chi.
Vec shifted_rhs_quadratic(const FrameChart& ch, const LinearData& lin, const Vec& y);

struct EmptyCenter : std::domain_error {
    EmptyCenter() : std::domain_error("no zero eigenvalues: the center manifold is empty") {}
};

struct CenterData {
    int n0 = 0;
    std::vector<int> center;      // chart indices with mu = 0
    std::vector<int> hyperbolic;  // q indices (0..2K) outside the center
    std::vector<std::pair<int, int>> pairs;  // (i <= j) positions into `center`
    CMat H;  // (2K+1) x pairs: quadratic coefficients of the center manifold in q coordinates
    // reduced system u'_k = sum_{i,j} c[k](i,j) u_i u_j, symmetric in (i,j)
    std::vector<Mat> c;
    // m = 2 coefficients (c1..c4) of the reduced planar system, with the sign produced by the
    // flow and with the opposite sign convention (-a/sqrt(kappa))
    std::array<double, 4> c_flow{}, c_reduced{};
    bool planar = false;
};

CenterData center_manifold_quadratic(const FrameChart& ch, const LinearData& lin);
// Unstable-mode coefficient sum_{ij} a_ijk u_i u_j / (4 tilde-mu_k sqrt(mu_k + kappa/16)) of the
// closed form, for comparison with H (see tests).
double closed_form_unstable_coefficient(const FrameChart& ch, int k, int i, int j);
// Invariance residual |q'_h - DH(u) q'_c| at center point u (length n0), exact field.
double center_residual(const FrameChart& ch, const LinearData& lin, const CenterData& cd,
                       const Vec& u);

double discriminant(double a555, double a556, double a566, double a666);
double resultant4(double c1, double c2, double c3, double c4);

enum class SpinCase { Nondegenerate, DegOne, DegTwo, Undecided };
const char* to_string(SpinCase c);

struct SpinVerdict {
    SpinCase kind = SpinCase::Undecided;
    int n0 = 0;
    double discriminant = 0.0;
    double discriminant_normalized = 0.0;
    bool pass = false;
    std::string reason;
    std::array<double, 4> a{};  // a555, a556, a566, a666 on the degenerate pair
    std::array<double, 4> c{};
    std::vector<double> theta0;  // characteristic directions with Phi > 0
    std::vector<double> phi_at_theta0;
};

SpinVerdict spin_verdict(const SpectralReport& report, const FrameChart& ch,
                         double disc_tol = 1e-12);

struct Resonance {
    int k;                   // index into eigs
    std::vector<int> alpha;  // multi-index
    int order;
    double residual;         // relative
    bool near;               // true when only within the near tolerance
};
std::vector<Resonance> resonance_scan(const std::vector<std::complex<double>>& eigs, int max_order,
                                      double tol = 1e-9, double near_tol = 1e-4);

}  // namespace ccs
