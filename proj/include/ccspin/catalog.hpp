#pragma once

#include "ccspin/cc.hpp"

#include <array>
#include <vector>

namespace ccs {

struct ExcludedLocus : std::domain_error {
    using std::domain_error::domain_error;
};

// Kite: m1 = m2 = 1 at (-s, -t), (s, -t); m3 at (0, u); m4 at (0, u - 1).
// The rational parameters satisfy u + t = s (xi^2 - 1)/(2 xi), u + t - 1 = s (eta^2 - 1)/(2 eta).
struct KiteMasses {
    double xi = 0, eta = 0;
    double s = 0, t = 0, u = 0;
    double m3 = 0, m4 = 0, lambda = 0;
    double m3_rational = 0, m4_rational = 0;  // polynomial form in (xi, eta)
    bool positive = false;                    // direct sign of m3, m4
    bool predicate_positive = false;          // factored sign conditions
};

// Throws ExcludedLocus for xi, eta in {1, 2 +- sqrt 3}, xi eta = 1, or xi <= eta.
KiteMasses kite_masses(double xi, double eta);
bool on_excluded_locus(double xi, double eta, double tol = 1e-12);
bool kite_mass_predicate(double xi, double eta);

Config kite_config(double s, double t, double u, double m3, double m4);
Config kite_config(const KiteMasses& k);

struct KiteDeterminants {
    double det1 = 0;     // Det[(V~, P~)^T (lambda M + B)(V~, P~)] / lambda^2, unit-mass-norm columns
    double det2 = 0;     // same with i V~, i P~
    double min_eig = 0;  // min |eig| of lambda Id + M^-1 B on span{V~, P~, iV~, iP~}, over lambda
    double full_zero = 0;  // largest |entry| of the first Gram block over lambda
};
KiteDeterminants kite_determinants(double s, double t, double u, double m3, double m4,
                                   double lambda);
KiteDeterminants kite_determinants(const KiteMasses& k);

struct KiteCell {
    double xi, eta, m3, m4, det1, det2, min_eig;
};
struct KiteScan {
    std::vector<KiteCell> cells;  // positive-mass cells in grid order (eta fastest)
    std::vector<KiteCell> simultaneous;  // both |det| < tol
    int nx = 0, ny = 0;
    int excluded = 0, nonpositive = 0;
    int det1_sign_changes = 0, det2_sign_changes = 0;  // along eta lines
    double min_max_det = 0;  // min over cells of max(|det1|, |det2|)
};
// Cell-centred grid on (xi_lo, xi_hi) x (eta_lo, eta_hi).
KiteScan kite_two_degree_scan(int nx, int ny, double tol = 1e-8, double xi_lo = 1.0,
                              double xi_hi = 6.0, double eta_lo = 0.2, double eta_hi = 1.0);

// Rhombus: m = 1 at (+-s, 0), m_tilde at (0, +-1/2), s = (zeta^2 - 1)/(4 zeta).
struct RhombicFamily {
    double zeta = 0, s = 0, m_tilde = 0, lambda = 0, I = 0, kappa = 0;
    bool positive = false;
    Config config;  // empty unless positive
};
RhombicFamily rhombic_family(double zeta);

// Closed-form mu_5..mu_8 and kappa^{1/2}, each divided by sqrt(I).
struct RhombicEigen {
    std::array<double, 4> mu{};
    double kappa_half = 0;
};
RhombicEigen rhombic_eigenvalues(double zeta);

// Three unit masses at (+-sqrt3/2, -1/2), (0, 1) and m4 at the origin.
struct EquilateralFamily {
    double m4 = 0;
    CentralConfiguration cc;
    SpectralReport report;
    double min_restricted = 0;  // smallest eigenvalue of lambda Id + M^-1 B on the complement
    bool indefinite = false;
};
Config equilateral_config(double m4);
EquilateralFamily equilateral_family(double m4);
double equilateral_degenerate_mass_exact();  // (81 + 64 sqrt3)/249
// Closed-form eigenvectors E5, E6 at the degenerate mass (reference coordinates, side sqrt3).
std::array<Vec, 2> equilateral_degenerate_vectors();
// Bisection on the smallest restricted eigenvalue.
double locate_degenerate_mass(double lo = 0.5, double hi = 1.0, double tol = 1e-12);

}  // namespace ccs
