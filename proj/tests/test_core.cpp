#include "ccspin/core.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ccs;

namespace {

const double kSqrt3 = std::sqrt(3.0);

Config pair_config() { return make_config({1, 1}, {{{-1, 0}}, {{1, 0}}}); }

// equal-mass side-1 triangle, centered
Config lagrange_unit() {
    return center_and_project(make_config({1, 1, 1}, {{{0, 0}}, {{1, 0}}, {{0.5, kSqrt3 / 2}}}));
}

Config random_config(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> pos(-1, 1), mass(0.2, 3);
    std::vector<double> m(n);
    std::vector<std::array<double, 2>> p(n);
    for (int k = 0; k < n; ++k) {
        m[k] = mass(rng);
        p[k] = {pos(rng), pos(rng)};
    }
    return center_and_project(make_config(m, p));
}

Vec random_vec(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g;
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = g(rng);
    return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("mass inner product on small configurations") {
    const Config two = pair_config();
    CHECK(mass_inner(two, two) == doctest::Approx(2.0).epsilon(1e-15));
    const Config tri = lagrange_unit();
    CHECK(mass_inner(tri, tri) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(mass_inner(tri.m, tri.x, rot90(tri.x))) < 1e-15);

    const Config three = make_config({1, 1, 1}, {{{0, 0}}, {{1, 0}}, {{2, 0}}});
    CHECK_THROWS_AS(mass_inner(two, three), DimensionError);
}

TEST_CASE("moment of inertia") {
    CHECK(moment_of_inertia(pair_config()) == doctest::Approx(2.0));
    CHECK(moment_of_inertia(lagrange_unit()) == doctest::Approx(1.0).epsilon(1e-14));

    std::mt19937_64 rng(3);
    const Config c = random_config(rng, 5);
    Config shifted = c;
    for (int k = 0; k < c.n(); ++k) {
        shifted.x(2 * k) += 0.7;
        shifted.x(2 * k + 1) -= 1.3;
    }
    CHECK(rel(moment_of_inertia(shifted), moment_of_inertia(c)) < 1e-13);
}

TEST_CASE("potential values and homogeneity") {
    CHECK(potential(pair_config()) == doctest::Approx(0.5));
    const Config tri = make_config({1, 1, 1}, {{{0, 0}}, {{1, 0}}, {{0.5, kSqrt3 / 2}}});
    CHECK(potential(tri) == doctest::Approx(3.0).epsilon(1e-14));

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Config c = random_config(rng, 4);
        for (double rho : {0.3, 2.0, 7.5}) {
            const Config s = rotate_scale(c, rho, 0.0);
            CHECK(rel(potential(s), potential(c) / rho) < 1e-12);
            CHECK(rel(moment_of_inertia(s), rho * rho * moment_of_inertia(c)) < 1e-12);
            const Vec g = potential_gradient(c), gs = potential_gradient(s);
            CHECK((gs - g / (rho * rho)).norm() <= 1e-12 * g.norm());
        }
    }
}

TEST_CASE("collisions raise") {
    const Config c = make_config({1, 1, 1}, {{{0, 0}}, {{1, 0}}, {{1, 0}}});
    CHECK_THROWS_AS(potential(c), CollisionError);
    CHECK_THROWS_AS(potential_gradient(c), CollisionError);
    CHECK_THROWS_AS(hessian_blocks(c), CollisionError);
}

TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS(make_config({1}, {{{0, 0}}}));
    CHECK_THROWS(make_config({1, -1}, {{{0, 0}}, {{1, 0}}}));
    CHECK_THROWS(make_config({1, 1}, {{{0, 0}}}));
    CHECK_THROWS(rotate_scale(pair_config(), 0.0, 0.0));
}

TEST_CASE("gradient examples and the Euler identity") {
    const Config tri = lagrange_unit();
    CHECK((potential_gradient(tri) + 3.0 * tri.x).norm() < 1e-13);
    const Config two = pair_config();
    CHECK((potential_gradient(two) + 0.25 * two.x).norm() < 1e-15);

    std::mt19937_64 rng(5);
    int worst = 0;
    double worst_rel = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Config c = random_config(rng, 2 + trial % 5);
        double u;
        try {
            u = potential(c);
        } catch (const CollisionError&) {
            continue;
        }
        const double e = rel(mass_inner(c.m, potential_gradient(c), c.x), -u);
        if (e > worst_rel) worst_rel = e, worst = trial;
    }
    INFO("worst trial " << worst);
    CHECK(worst_rel < 1e-10);
}

TEST_CASE("cartesian gradient matches finite differences") {
    std::mt19937_64 rng(8);
    const Config c = random_config(rng, 4);
    const Vec g = cartesian_gradient(c);
    const double h = 1e-6;
    for (int i = 0; i < c.x.size(); ++i) {
        Config p = c, q = c;
        p.x(i) += h;
        q.x(i) -= h;
        CHECK(g(i) == doctest::Approx((potential(p) - potential(q)) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("Hessian blocks: symmetry, translations, CC identities and finite differences") {
    std::mt19937_64 rng(21);
    const Config c = random_config(rng, 4);
    const Mat B = hessian_blocks(c);
    CHECK((B - B.transpose()).norm() <= 1e-14 * B.norm());
    CHECK((B * translation(4, 0)).norm() <= 1e-13 * B.norm());
    CHECK((B * translation(4, 1)).norm() <= 1e-13 * B.norm());

    // at the Lagrange CC: B r0 = 2 lambda M r0, B (i r0) = -lambda M (i r0)
    const Config tri = lagrange_unit();
    const Mat Bt = hessian_blocks(tri);
    const Vec M = mass_diag(tri.m);
    const double lambda = 3.0;
    CHECK((Bt * tri.x - 2 * lambda * M.cwiseProduct(tri.x)).norm() < 1e-12);
    CHECK((Bt * rot90(tri.x) + lambda * M.cwiseProduct(rot90(tri.x))).norm() < 1e-12);

    const double h = 1e-5;
    double worst = 0;
    for (int i = 0; i < c.x.size(); ++i) {
        Config p = c, q = c;
        p.x(i) += h;
        q.x(i) -= h;
        const Vec col = (cartesian_gradient(p) - cartesian_gradient(q)) / (2 * h);
        for (int j = 0; j < c.x.size(); ++j)
            if (std::abs(B(j, i)) > 1e-3 * B.cwiseAbs().maxCoeff()) worst = std::max(worst, rel(col(j), B(j, i)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("third directional derivative: symmetry and Richardson oracle") {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const Config c = random_config(rng, 3 + trial % 3);
        const int d = static_cast<int>(c.x.size());
        const Vec u = random_vec(rng, d), v = random_vec(rng, d), w = random_vec(rng, d);
        const double t = third_directional(c, u, v, w);
        CHECK(rel(third_directional(c, u, w, v), t) < 1e-12);
        CHECK(rel(third_directional(c, v, u, w), t) < 1e-12);
        CHECK(rel(third_directional(c, v, w, u), t) < 1e-12);
        CHECK(rel(third_directional(c, w, u, v), t) < 1e-12);
        CHECK(rel(third_directional(c, w, v, u), t) < 1e-12);

        // oracle: derivative of s -> v^T B(c + s u) w
        auto dvw = [&](double s) {
            Config p = c;
            p.x += s * u;
            return v.dot(hessian_blocks(p) * w);
        };
        auto fd = [&](double h) { return (dvw(-2 * h) - 8 * dvw(-h) + 8 * dvw(h) - dvw(2 * h)) / (12 * h); };
        const double h = 1e-3 / u.norm();
        const double rich = (16 * fd(h / 2) - fd(h)) / 15;
        CHECK(rel(rich, t) < 1e-6);
    }
}

TEST_CASE("third derivative along the configuration itself at a CC") {
    // s -> U((1 + s) r0) = U / (1 + s), whose third derivative at 0 is -6 U
    const Config tri = lagrange_unit();
    CHECK(rel(third_directional(tri, tri.x, tri.x, tri.x), -6 * potential(tri)) < 1e-12);
}

TEST_CASE("center_and_project and rotate_scale") {
    const Config tri = lagrange_unit();
    CHECK((center_and_project(tri).x - tri.x).norm() < 1e-15);
    Config moved = tri;
    for (int k = 0; k < 3; ++k) moved.x(2 * k) += 1.0;
    CHECK((center_and_project(moved).x - tri.x).norm() < 1e-14);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> pos(-5, 5);
    std::vector<std::array<double, 2>> p(6);
    for (auto& q : p) q = {pos(rng) + 10, pos(rng) - 4};
    const Config r = center_and_project(make_config({1, 2, 3, 4, 5, 6}, p));
    CHECK(center_of_mass(r).norm() <= 1e-14 * diameter(r));

    CHECK((rotate_scale(tri, 1.0, 0.0).x - tri.x).norm() == 0.0);
    const Config two = rotate_scale(pair_config(), 2.0, 0.0);
    CHECK(potential(two) == doctest::Approx(0.25));
    CHECK(moment_of_inertia(two) == doctest::Approx(8.0));
    const Config q = rotate_scale(pair_config(), 1.0, std::numbers::pi / 2);
    CHECK((q.x - rot90(pair_config().x)).norm() < 1e-15);
    CHECK(std::abs(mass_inner(q, pair_config())) < 1e-15);
}

TEST_CASE("pair table is symmetric with positive off-diagonal entries") {
    std::mt19937_64 rng(9);
    const Config c = random_config(rng, 5);
    const Mat P = pair_table(c);
    CHECK((P - P.transpose()).norm() == 0.0);
    for (int j = 0; j < 5; ++j)
        for (int k = 0; k < 5; ++k)
            if (j != k) CHECK(P(j, k) > 0);
}
