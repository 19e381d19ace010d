#include "ccspin/catalog.hpp"

#include <boost/math/tools/roots.hpp>
#include <tbb/parallel_for.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace ccs {

namespace {

const double kSqrt3 = std::sqrt(3.0);

double half_f(double x) { return (x * x - 1.0) / (2.0 * x); }

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

double kite_m3_rational(double x, double e) {
    const double num = -(e - 1) * (e + 1) * (e * e - 4 * e + 1) *
                       (e * e * e * e + 4 * e * e * e + 18 * e * e + 4 * e + 1) *
                       std::pow(x * x + 1, 3) * (e - x) * (e - x) * (e * x + 1) * (e * x + 1);
    const double den = 32 * std::pow(e * e + 1, 3) * x * x * (e * e * x + 2 * e - x) *
                       (std::pow(e, 4) * x * x - 3 * std::pow(e, 3) * std::pow(x, 3) +
                        std::pow(e, 3) * x + 3 * e * e * std::pow(x, 4) - 2 * e * e * x * x + e * e +
                        3 * e * std::pow(x, 3) - e * x + x * x);
    return num / den;
}

double kite_m4_rational(double x, double e) {
    const double num = std::pow(e * e + 1, 3) * (x - 1) * (x + 1) * (x * x - 4 * x + 1) *
                       (std::pow(x, 4) + 4 * std::pow(x, 3) + 18 * x * x + 4 * x + 1) * (e - x) *
                       (e - x) * (e * x + 1) * (e * x + 1);
    const double den = 32 * std::pow(e, 3) * std::pow(x * x + 1, 3) * (2 * e * x - x * x + 1) *
                       (std::pow(e, 4) * x * x - std::pow(e, 3) * std::pow(x, 3) + std::pow(e, 3) * x +
                        e * e * std::pow(x, 4) - 2 * e * e * x * x + e * e + 3 * e * std::pow(x, 3) -
                        3 * e * x + 3 * x * x);
    return num / den;
}

}  // namespace

bool on_excluded_locus(double xi, double eta, double tol) {
    for (double v : {xi, eta})
        for (double bad : {1.0, 2.0 + kSqrt3, 2.0 - kSqrt3})
            if (near(v, bad, tol)) return true;
    return near(xi * eta, 1.0, tol);
}

bool kite_mass_predicate(double xi, double eta) {
    const double e = eta, x = xi;
    const bool m3 = (1 - e) * (e * e - 4 * e + 1) * (e * e * x + 2 * e - x) > 0;
    const bool m4 = (x - 1) * (x * x - 4 * x + 1) * (2 * e * x - x * x + 1) > 0;
    return m3 && m4;
}

KiteMasses kite_masses(double xi, double eta) {
    if (!(xi > eta && eta > 0)) throw ExcludedLocus("kite: need xi > eta > 0");
    if (on_excluded_locus(xi, eta)) throw ExcludedLocus("kite: parameters on an excluded locus");
    KiteMasses k;
    k.xi = xi;
    k.eta = eta;
    k.s = 1.0 / (half_f(xi) - half_f(eta));
    const double s = k.s;
    const double w = s * half_f(xi);  // u + t
    const double A = std::pow(s * s + w * w, 1.5);
    const double B = std::pow(s * s + (w - 1) * (w - 1), 1.5);
    const double e3 = 1.0 / (8.0 * s * s * s);
    k.m3 = 2.0 * (w - 1) * (e3 - 1.0 / B) / (1.0 / A - 1.0);
    k.m4 = 2.0 * w * (e3 - 1.0 / A) / (1.0 - 1.0 / B);
    k.lambda = 1.0 / (4.0 * s * s * s) + k.m3 / A + k.m4 / B;
    k.t = (w * (k.m3 + k.m4) - k.m4) / (k.m3 + k.m4 + 2.0);
    k.u = w - k.t;
    k.m3_rational = kite_m3_rational(xi, eta);
    k.m4_rational = kite_m4_rational(xi, eta);
    k.positive = k.m3 > 0 && k.m4 > 0;
    k.predicate_positive = kite_mass_predicate(xi, eta);
    return k;
}

Config kite_config(double s, double t, double u, double m3, double m4) {
    return make_config({1.0, 1.0, m3, m4}, {{{-s, -t}}, {{s, -t}}, {{0.0, u}}, {{0.0, u - 1.0}}});
}

Config kite_config(const KiteMasses& k) { return kite_config(k.s, k.t, k.u, k.m3, k.m4); }

KiteDeterminants kite_determinants(double s, double t, double u, double m3, double m4,
                                   double lambda) {
    const Config c = kite_config(s, t, u, m3, m4);
    const Vec& m = c.m;
    const double p = 2.0 / (m3 + m4);
    Vec V(8), P(8);
    V << -1, 0, 1, 0, 0, 0, 0, 0;
    P << 0, -1, 0, -1, 0, p, 0, p;
    const Vec& E3 = c.x;
    const double ee = mass_inner(m, E3, E3);
    auto reduce = [&](Vec v) {
        v -= mass_inner(m, v, E3) / ee * E3;
        return Vec(v / mass_norm(m, v));
    };
    const Vec Vt = reduce(V), Pt = reduce(P);
    const Mat G = lambda * Mat(mass_diag(m).asDiagonal()) + hessian_blocks(c);

    Mat W1(8, 2), W2(8, 2);
    W1 << Vt, Pt;
    W2 << rot90(Vt), rot90(Pt);
    const Mat G1 = W1.transpose() * G * W1;
    const Mat G2 = W2.transpose() * G * W2;
    KiteDeterminants d;
    d.det1 = G1.determinant() / (lambda * lambda);
    d.det2 = G2.determinant() / (lambda * lambda);
    d.full_zero = G1.cwiseAbs().maxCoeff() / lambda;

    Mat F(8, 4);
    F << Vt, Pt, rot90(Vt), rot90(Pt);
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < j; ++i) F.col(j) -= mass_inner(m, F.col(i), F.col(j)) * F.col(i);
        F.col(j) /= mass_norm(m, F.col(j));
    }
    const Mat R = F.transpose() * G * F;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (R + R.transpose()), Eigen::EigenvaluesOnly);
    d.min_eig = es.eigenvalues().cwiseAbs().minCoeff() / lambda;
    return d;
}

KiteDeterminants kite_determinants(const KiteMasses& k) {
    return kite_determinants(k.s, k.t, k.u, k.m3, k.m4, k.lambda);
}

KiteScan kite_two_degree_scan(int nx, int ny, double tol, double xi_lo, double xi_hi,
                              double eta_lo, double eta_hi) {
    enum : char { kOk, kExcluded, kNonpositive };
    std::vector<KiteCell> grid(static_cast<size_t>(nx) * ny);
    std::vector<char> flag(grid.size(), kOk);
    tbb::parallel_for(0, nx, [&](int i) {
        const double xi = xi_lo + (xi_hi - xi_lo) * (i + 0.5) / nx;
        for (int j = 0; j < ny; ++j) {
            const size_t idx = static_cast<size_t>(i) * ny + j;
            const double eta = eta_lo + (eta_hi - eta_lo) * (j + 0.5) / ny;
            KiteCell cell{xi, eta, 0, 0, 0, 0, 0};
            if (!(xi > eta) || on_excluded_locus(xi, eta, 1e-9)) {
                flag[idx] = kExcluded;
                grid[idx] = cell;
                continue;
            }
            const KiteMasses k = kite_masses(xi, eta);
            cell.m3 = k.m3;
            cell.m4 = k.m4;
            if (!k.positive) {
                flag[idx] = kNonpositive;
                grid[idx] = cell;
                continue;
            }
            const KiteDeterminants d = kite_determinants(k);
            cell.det1 = d.det1;
            cell.det2 = d.det2;
            cell.min_eig = d.min_eig;
            grid[idx] = cell;
        }
    });

    KiteScan out;
    out.nx = nx;
    out.ny = ny;
    out.min_max_det = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nx; ++i) {
        const KiteCell* prev = nullptr;
        for (int j = 0; j < ny; ++j) {
            const size_t idx = static_cast<size_t>(i) * ny + j;
            if (flag[idx] == kExcluded) {
                ++out.excluded;
                prev = nullptr;
                continue;
            }
            if (flag[idx] == kNonpositive) {
                ++out.nonpositive;
                prev = nullptr;
                continue;
            }
            const KiteCell& c = grid[idx];
            out.cells.push_back(c);
            if (std::abs(c.det1) < tol && std::abs(c.det2) < tol) out.simultaneous.push_back(c);
            out.min_max_det = std::min(out.min_max_det, std::max(std::abs(c.det1), std::abs(c.det2)));
            if (prev) {
                if ((prev->det1 > 0) != (c.det1 > 0)) ++out.det1_sign_changes;
                if ((prev->det2 > 0) != (c.det2 > 0)) ++out.det2_sign_changes;
            }
            prev = &c;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

RhombicFamily rhombic_family(double z) {
    RhombicFamily r;
    r.zeta = z;
    const double z2 = z * z;
    r.s = (z2 - 1.0) / (4.0 * z);
    r.m_tilde = -8 * std::pow(z, 3) * (z2 - 3) * (7 * z2 * z2 - 6 * z2 + 3) /
                (std::pow(z2 - 1, 3) * (z2 - 4 * z + 1) *
                 (z2 * z2 + 4 * z2 * z + 18 * z2 + 4 * z + 1));
    const double D6 = std::pow(z, 6) + 3 * std::pow(z, 4) - 64 * std::pow(z, 3) + 3 * z2 + 1;
    const double lamnum = std::pow(z, 12) + 6 * std::pow(z, 10) - 512 * std::pow(z, 9) +
                          15 * std::pow(z, 8) + 1536 * std::pow(z, 7) + 20 * std::pow(z, 6) -
                          1536 * std::pow(z, 5) + 15 * std::pow(z, 4) + 512 * std::pow(z, 3) +
                          6 * z2 + 1;
    const double P6 = std::pow(z, 12) - 4 * std::pow(z, 10) - 64 * std::pow(z, 9) +
                      5 * std::pow(z, 8) + 224 * std::pow(z, 7) - 160 * std::pow(z, 5) -
                      5 * std::pow(z, 4) + 64 * std::pow(z, 3) + 4 * z2 - 1;
    r.lambda = 16 * std::pow(z, 3) * lamnum / (std::pow(z2 * z2 - 1, 3) * D6);
    r.I = std::pow(z2 + 1, 2) * P6 / (8 * z2 * std::pow(z2 - 1, 3) * D6);
    r.kappa = 2.0 * r.lambda;
    r.positive = r.m_tilde > 0 && std::isfinite(r.m_tilde);
    if (!r.positive) return r;  // no physical configuration; config stays empty
    r.config = make_config({1.0, 1.0, r.m_tilde, r.m_tilde},
                           {{{-r.s, 0.0}}, {{r.s, 0.0}}, {{0.0, 0.5}}, {{0.0, -0.5}}});
    return r;
}

RhombicEigen rhombic_eigenvalues(double z) {
    const double z2 = z * z;
    auto pw = [z](int k) { return std::pow(z, k); };
    const double D6 = pw(6) + 3 * pw(4) - 64 * pw(3) + 3 * z2 + 1;
    const double lamnum = pw(12) + 6 * pw(10) - 512 * pw(9) + 15 * pw(8) + 1536 * pw(7) +
                          20 * pw(6) - 1536 * pw(5) + 15 * pw(4) + 512 * pw(3) + 6 * z2 + 1;
    const double P6 = pw(12) - 4 * pw(10) - 64 * pw(9) + 5 * pw(8) + 224 * pw(7) - 160 * pw(5) -
                      5 * pw(4) + 64 * pw(3) + 4 * z2 - 1;
    const double a = z2 - 1, b = z2 + 1;
    RhombicEigen e;
    e.mu[0] = -48 * pw(3) *
              (7 * pw(10) - 45 * pw(8) + 70 * pw(6) + 256 * pw(5) - 90 * pw(4) + 35 * z2 - 9) /
              (std::pow(a, 3) * b * b * D6);
    e.mu[1] = 384 * pw(3) * P6 / (std::pow(a, 3) * std::pow(b, 3) * D6);
    e.mu[2] = 16 * pw(3) *
              (7 * pw(16) - 88 * pw(14) - 448 * pw(13) - 44 * pw(12) + 12352 * pw(11) +
               184 * pw(10) - 37504 * pw(9) - 70 * pw(8) + 34176 * pw(7) - 296 * pw(6) -
               13248 * pw(5) - 12 * pw(4) + 576 * pw(3) + 72 * z2 - 9) /
              (std::pow(-a, 3) * std::pow(b, 5) * D6);
    e.mu[3] = 16 * pw(3) *
              (17 * pw(16) - 56 * pw(14) - 2432 * pw(13) - 4 * pw(12) + 14720 * pw(11) +
               248 * pw(10) - 32768 * pw(9) + 70 * pw(8) + 30720 * pw(7) - 136 * pw(6) -
               14976 * pw(5) + 60 * pw(4) + 2688 * pw(3) + 72 * z2 - 15) /
              (std::pow(a, 3) * std::pow(b, 5) * D6);
    e.kappa_half = 16.0 * std::sqrt(pw(5) * lamnum / (std::pow(b, 5) * P6));
    return e;
}

// ---------------------------------------------------------------------------

Config equilateral_config(double m4) {
    if (!(m4 > 0)) throw std::invalid_argument("equilateral: m4 must be positive");
    return make_config({1.0, 1.0, 1.0, m4},
                       {{{-kSqrt3 / 2, -0.5}}, {{kSqrt3 / 2, -0.5}}, {{0.0, 1.0}}, {{0.0, 0.0}}});
}

EquilateralFamily equilateral_family(double m4) {
    EquilateralFamily f;
    f.m4 = m4;
    f.cc = exact_cc(equilateral_config(m4));
    f.report = classify(f.cc);
    f.min_restricted = f.report.eig_operator.minCoeff();
    f.indefinite = f.report.eig_operator.minCoeff() < 0 && f.report.eig_operator.maxCoeff() > 0;
    return f;
}

double equilateral_degenerate_mass_exact() { return (81.0 + 64.0 * kSqrt3) / 249.0; }

std::array<Vec, 2> equilateral_degenerate_vectors() {
    const double a = (64 * kSqrt3 + 81) / 498, b = (741 * kSqrt3 + 908) / 1494;
    const double c = (165 * kSqrt3 + 179) / 747, d = (371 * kSqrt3 + 738) / 2241;
    const double e = (2 * kSqrt3 + 9) / 27;
    Vec E5(8), E6(8);
    E5 << a, -b, a, b, 0, 0, -1, 0;
    E6 << c, -d, -c, -d, 0, e, 0, 1;
    return {E5, E6};
}

double locate_degenerate_mass(double lo, double hi, double tol) {
    auto f = [](double m4) { return equilateral_family(m4).min_restricted; };
    const double flo = f(lo), fhi = f(hi);
    if (flo * fhi > 0) throw std::domain_error("locate_degenerate_mass: bracket has no sign change");
    auto done = [tol](double a, double b) { return std::abs(b - a) <= tol; };
    const auto r = boost::math::tools::bisect(f, lo, hi, done);
    return 0.5 * (r.first + r.second);
}

}  // namespace ccs
