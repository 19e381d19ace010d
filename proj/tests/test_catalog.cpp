#include "ccspin/catalog.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace ccs;

namespace {

const double kSqrt3 = std::sqrt(3.0);

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("kite excluded locus throws") {
    CHECK_THROWS_AS(kite_masses(1.0, 0.5), ExcludedLocus);
    CHECK_THROWS_AS(kite_masses(2 + kSqrt3, 0.5), ExcludedLocus);
    CHECK_THROWS_AS(kite_masses(3.0, 2 - kSqrt3), ExcludedLocus);
    CHECK_THROWS_AS(kite_masses(2.0, 0.5), ExcludedLocus);  // xi eta = 1
    CHECK_THROWS_AS(kite_masses(0.5, 0.7), ExcludedLocus);  // xi <= eta
    CHECK(on_excluded_locus(4.0, 0.25));
    CHECK_FALSE(on_excluded_locus(3.0, 0.5));
    CHECK_NOTHROW(kite_masses(3.0, 0.5));
}

TEST_CASE("kite rational form agrees with direct masses") {
    int checked = 0;
    for (double xi = 1.1; xi < 6.0; xi += 0.37)
        for (double eta = 0.21; eta < 1.0; eta += 0.053) {
            if (on_excluded_locus(xi, eta, 1e-6) || xi <= eta) continue;
            const KiteMasses k = kite_masses(xi, eta);
            CHECK(rel(k.m3, k.m3_rational) <= 1e-9);
            CHECK(rel(k.m4, k.m4_rational) <= 1e-9);
            CHECK(k.predicate_positive == k.positive);
            CHECK(kite_mass_predicate(xi, eta) == k.positive);
            CHECK(k.positive == (k.m3 > 0 && k.m4 > 0));
            ++checked;
        }
    CHECK(checked > 100);
}

TEST_CASE("constructed kites are central configurations") {
    int positive = 0;
    for (double xi : {1.5, 2.5, 3.3, 5.0})
        for (double eta : {0.3, 0.45, 0.6, 0.85}) {
            if (on_excluded_locus(xi, eta, 1e-6)) continue;
            const KiteMasses k = kite_masses(xi, eta);
            if (!k.positive) continue;
            ++positive;
            const Config c = kite_config(k);
            const Vec g = potential_gradient(c) + k.lambda * c.x;
            CHECK(g.norm() <= 1e-10 * std::max(1.0, k.lambda * c.x.norm()));
            SolveOptions so;
            so.normalize = false;
            const CentralConfiguration cc = solve_cc(c, so);
            CHECK(cc.residual <= 1e-10);
            CHECK(cc.lambda == doctest::Approx(k.lambda).epsilon(1e-9));
        }
    CHECK(positive >= 3);
}

TEST_CASE("kites approach the rhombus as xi eta -> 1") {
    for (double xi : {2.0, 2.5, 3.0}) {
        const double zeta = (xi + 1) / (xi - 1);
        const RhombicFamily r = rhombic_family(zeta);
        const KiteMasses k = kite_masses(xi, 1.0 / xi + 1e-7);
        CHECK(std::abs(k.t) < 1e-5);
        CHECK(k.m3 == doctest::Approx(r.m_tilde).epsilon(1e-4));
        CHECK(k.m4 == doctest::Approx(r.m_tilde).epsilon(1e-4));
    }
}

TEST_CASE("rhombic mass vanishes at sqrt3 and is positive exactly on the interval") {
    CHECK(std::abs(rhombic_family(kSqrt3 + 1e-9).m_tilde) < 1e-7);
    // the other end is a pole
    CHECK(rhombic_family(kSqrt3 + 2 - 1e-6).m_tilde > 1e5);
    for (int i = 0; i < 200; ++i) {
        const double z = kSqrt3 + 2.0 * (i + 0.5) / 200.0;
        const RhombicFamily f = rhombic_family(z);
        CHECK(f.m_tilde > 0);
        CHECK(f.positive);
    }
    for (double z : {kSqrt3 - 1e-3, kSqrt3 - 0.2, kSqrt3 + 2 + 1e-3, kSqrt3 + 2.5}) {
        const RhombicFamily f = rhombic_family(z);
        CHECK(f.m_tilde <= 0);
        CHECK_FALSE(f.positive);
        CHECK(f.config.n() == 0);
    }
}

TEST_CASE("rhombic family is a CC with the reported lambda") {
    for (double z : {1.8, 2.4, 3.1, 3.6}) {
        const RhombicFamily f = rhombic_family(z);
        const Vec g = potential_gradient(f.config) + f.lambda * f.config.x;
        CHECK(g.norm() <= 1e-11 * f.lambda);
        CHECK(moment_of_inertia(f.config) == doctest::Approx(f.I).epsilon(1e-13));
        CHECK(f.kappa == doctest::Approx(2 * f.lambda));
    }
}

TEST_CASE("closed-form rhombic eigenvalues match the spectral pipeline") {
    for (int i = 0; i < 10; ++i) {
        const double z = kSqrt3 + 2.0 * (i + 0.5) / 10.0;
        const RhombicFamily f = rhombic_family(z);
        const SpectralReport rep = classify(exact_cc(f.config));
        const RhombicEigen ce = rhombic_eigenvalues(z);
        std::vector<double> a(ce.mu.begin(), ce.mu.end());
        std::vector<double> b(rep.eig_operator.data(), rep.eig_operator.data() + rep.eig_operator.size());
        REQUIRE(b.size() == 4);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        for (int k = 0; k < 4; ++k) CHECK(rel(b[k], a[k]) <= 1e-8);
        CHECK(rel(std::sqrt(rep.kappa / rep.I), ce.kappa_half) <= 1e-8);
        CHECK(rep.partition.n0 == 0);
        CHECK(0 < ce.kappa_half);
        CHECK(*std::min_element(a.begin(), a.end()) > 0);
    }
}

TEST_CASE("mu7 and mu8 cross at 1 + sqrt2") {
    const double zs = 1 + std::sqrt(2.0);
    const RhombicEigen e = rhombic_eigenvalues(zs);
    CHECK(rel(e.mu[2], e.mu[3]) <= 1e-8);
    const RhombicEigen lo = rhombic_eigenvalues(1.8);
    CHECK(lo.mu[3] < lo.mu[2]);
    const RhombicEigen hi = rhombic_eigenvalues(3.5);
    CHECK(hi.mu[2] < hi.mu[3]);
}

TEST_CASE("degenerate equilateral mass by bisection") {
    const double exact = equilateral_degenerate_mass_exact();
    CHECK(exact == doctest::Approx((81 + 64 * kSqrt3) / 249).epsilon(1e-15));
    CHECK(std::abs(locate_degenerate_mass() - exact) <= 1e-8);
    // lambda = 1/sqrt3 + m4 in side-1 coordinates
    for (double m4 : {0.3, exact, 2.0}) {
        const Config c = equilateral_config(m4);
        const Vec g = potential_gradient(c) + (1 / kSqrt3 + m4) * c.x;
        CHECK(g.norm() <= 1e-12);
    }
}

TEST_CASE("equilateral sweep changes sign at the degenerate mass") {
    const double m4s = equilateral_degenerate_mass_exact();
    CHECK(equilateral_family(m4s - 0.05).min_restricted > 0);
    CHECK_FALSE(equilateral_family(m4s - 0.05).indefinite);
    CHECK(equilateral_family(m4s + 0.05).min_restricted < 0);
    CHECK(equilateral_family(m4s + 0.05).indefinite);
    CHECK(std::abs(equilateral_family(m4s).min_restricted) <= 1e-10);
    // equal masses sit past the degenerate point: a saddle
    const EquilateralFamily one = equilateral_family(1.0);
    CHECK(one.indefinite);
    CHECK(one.report.partition.n0 == 0);
}

TEST_CASE("closed-form eigenvectors span the kernel") {
    const EquilateralFamily f = equilateral_family(equilateral_degenerate_mass_exact());
    const auto E = equilateral_degenerate_vectors();
    const Mat op = cc_operator(f.cc.config, f.cc.lambda);
    for (const Vec& v : E) {
        CHECK(v.norm() > 0);
        CHECK((op * v).norm() <= 1e-10 * f.cc.lambda * v.norm());
    }
    CHECK(f.report.partition.n0 == 2);
}

TEST_CASE("small kite scan") {
    const KiteScan scan = kite_two_degree_scan(24, 24, 1e-8);
    CHECK(scan.nx == 24);
    CHECK(scan.ny == 24);
    CHECK_FALSE(scan.cells.empty());
    CHECK(static_cast<int>(scan.cells.size()) + scan.excluded + scan.nonpositive == 24 * 24);
    CHECK(scan.simultaneous.empty());
    CHECK(scan.min_max_det > 1e-8);
    for (const KiteCell& c : scan.cells) {
        CHECK(c.m3 > 0);
        CHECK(c.m4 > 0);
        CHECK(std::max(std::abs(c.det1), std::abs(c.det2)) >= scan.min_max_det);
    }
}

TEST_CASE("kite determinants vanish at the degenerate equilateral limit") {
    // the equilateral configuration seen as a kite: unit masses at (+-sqrt3/2, -1/2), (0, 1), m4 at the origin
    const double s = kSqrt3 / 2, t = 0.5, u = 1.0;
    const double m4 = equilateral_degenerate_mass_exact();
    const KiteDeterminants d = kite_determinants(s, t, u, 1.0, m4, 1 / kSqrt3 + m4);
    CHECK(std::abs(d.det1) <= 1e-8);
    CHECK(std::abs(d.det2) <= 1e-8);
    const KiteDeterminants far = kite_determinants(s, t, u, 1.0, 0.3, 1 / kSqrt3 + 0.3);
    CHECK(std::max(std::abs(far.det1), std::abs(far.det2)) > 1e-6);
}
