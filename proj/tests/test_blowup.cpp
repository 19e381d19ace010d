#include "ccspin/blowup.hpp"
#include "ccspin/planar.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace ccs;

namespace {

const double kPi = std::numbers::pi;

const FrameChart& lagrange_chart() {
    static const FrameChart ch = [] {
        const Config seed = make_config({1, 2, 3}, {{{0, 0}}, {{1, 0}}, {{0.5, std::sqrt(3.0) / 2}}});
        return build_chart(classify(solve_cc(seed)));
    }();
    return ch;
}

BlowupState rest_state(const FrameChart& ch) {
    BlowupState s;
    s.z = Vec::Zero(ch.K());
    s.Z = Vec::Zero(ch.K());
    s.Upsilon = std::sqrt(ch.kappa);
    return s;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("equilibrium circle of the blown-up system") {
    const FrameChart& ch = lagrange_chart();
    for (double sign : {1.0, -1.0}) {
        BlowupState s = rest_state(ch);
        s.Upsilon *= sign;
        const BlowupDerivative d = blowup_rhs(ch, s);
        CHECK(d.dz.norm() == 0.0);
        CHECK(d.dZ.norm() < 1e-14);
        CHECK(d.dr == 0.0);
        CHECK(std::abs(d.dUpsilon) < 1e-14);
        CHECK(d.dtheta == 0.0);
    }
}

TEST_CASE("homothetic states stay homothetic") {
    const FrameChart& ch = lagrange_chart();
    BlowupState s = rest_state(ch);
    s.r = 0.5;
    s.Upsilon = 0.7;
    const BlowupDerivative d = blowup_rhs(ch, s);
    CHECK(d.dZ.norm() < 1e-14);
    CHECK(d.dUpsilon == doctest::Approx(0.5 * 0.49 - ch.lambda).epsilon(1e-14));

    s.Upsilon = -std::sqrt(ch.kappa) * 0.9;
    const Trajectory tr = integrate_blowup(ch, s, 0.0, 10.0, {}, 0.0);
    REQUIRE(tr.status == OdeStatus::Completed);
    for (const BlowupState& q : tr.states) {
        CHECK(q.z.norm() <= 1e-12);
        CHECK(q.Z.norm() <= 1e-12);
    }
}

TEST_CASE("theta' vanishes with Z = 0") {
    const FrameChart& ch = lagrange_chart();
    BlowupState s = rest_state(ch);
    s.z(0) = 0.05;
    s.z(1) = -0.02;
    CHECK(blowup_rhs(ch, s).dtheta == 0.0);
}

TEST_CASE("r = 0 is invariant and the energy relation is preserved") {
    // random states of this chart reach close binaries within a tau unit, so start on a
    // collision orbit, which stays near the equilibrium backward
    const FrameChart& ch = lagrange_chart();
    CollisionOrbitOptions co;
    co.mix = {1.0, 0.5};
    co.delta = 1e-3;
    co.tau_back = 5;
    const CollisionOrbit orb = make_collision_orbit(ch, co);
    OdeOptions opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-12;
    const Trajectory tr = integrate_blowup(ch, orb.seed, 0.0, -5.0, opt);
    REQUIRE(tr.status == OdeStatus::Completed);
    for (const BlowupState& q : tr.states) CHECK(q.r == 0.0);
    CHECK(max_abs(tr.energy_residual) <= 1e-9);
    for (size_t i = 1; i < tr.tau.size(); ++i) CHECK(tr.tau[i] < tr.tau[i - 1]);
}

TEST_CASE("on-level form keeps the energy level on lifted arcs") {
    const FrameChart& ch = lagrange_chart();
    CollisionOrbitOptions co;
    co.delta = 1e-3;
    co.r0 = 1e-3;
    co.tau_back = 20;
    co.ode.rtol = 1e-10;
    const CollisionOrbit orb = make_collision_orbit(ch, co);
    REQUIRE(orb.backward.status == OdeStatus::Completed);
    CHECK(orb.backward.tau.front() == doctest::Approx(-20.0));
    CHECK(orb.seed.r == doctest::Approx(1e-3));
    CHECK(max_abs(orb.backward.energy_residual) <= 1e-9);
    for (size_t i = 1; i < orb.backward.states.size(); ++i)
        CHECK(orb.backward.states[i].r > orb.backward.states[i - 1].r);
}

TEST_CASE("physical time follows the quadrature of r^(3/2)") {
    const FrameChart& ch = lagrange_chart();
    BlowupState s = rest_state(ch);
    s.z(0) = 0.02;
    s.r = 0.8;
    s.Upsilon = project_upsilon(ch, s, 0.0);
    OdeOptions opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-13;
    const Trajectory tr = integrate_blowup(ch, s, 0.0, -0.5, opt);
    REQUIRE(tr.status == OdeStatus::Completed);
    double t = 0;
    for (size_t i = 1; i < tr.tau.size(); ++i) {
        // trapezoid over the accepted steps
        t += 0.5 * (tr.tau[i] - tr.tau[i - 1]) *
             (std::pow(tr.states[i].r, 1.5) + std::pow(tr.states[i - 1].r, 1.5));
    }
    CHECK(tr.states.back().t == doctest::Approx(t).epsilon(1e-5));
}

TEST_CASE("blown-up states agree with direct integration in physical time") {
    const FrameChart& ch = lagrange_chart();
    BlowupState s = rest_state(ch);
    s.z(0) = 0.04;
    s.z(1) = -0.03;
    s.Z(0) = 0.02;
    s.r = 1.0;
    s.Upsilon = project_upsilon(ch, s, 0.0, -std::sqrt(ch.kappa));
    OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-14;
    const Trajectory tr = integrate_blowup(ch, s, 0.0, 1.0, opt);
    REQUIRE(tr.status == OdeStatus::Completed);

    const auto [x0, v0] = blowup_to_cartesian(ch, s);
    CHECK(std::abs(angular_momentum(ch.base.m, x0, v0)) < 1e-13);
    CHECK(std::abs(total_energy(ch.base.m, x0, v0)) < 1e-12);
    const BlowupState& end = tr.states.back();
    const auto [x1, v1] = blowup_to_cartesian(ch, end);
    const CartesianTrajectory ct = integrate_cartesian(ch.base.m, x0, v0, 0.0, end.t, opt);
    REQUIRE(ct.status == OdeStatus::Completed);
    CHECK((ct.x.back() - x1).norm() <= 1e-6 * x1.norm());
    CHECK((ct.v.back() - v1).norm() <= 1e-6 * v1.norm());
}

TEST_CASE("two-body circular orbit has the Kepler period") {
    const double a = 0.5;  // each body at distance a from the centre, separation 1
    const double v = std::sqrt(1.0 / (4 * a));
    const double T = 2 * kPi * a / v;
    Vec m(2), x(4), vel(4);
    m << 1, 1;
    x << -a, 0, a, 0;
    vel << 0, -v, 0, v;
    OdeOptions opt;
    opt.rtol = 1e-13;
    opt.atol = 1e-15;
    const CartesianTrajectory one = integrate_cartesian(m, x, vel, 0.0, T, opt);
    REQUIRE(one.status == OdeStatus::Completed);
    CHECK((one.x.back() - x).norm() <= 1e-8);

    const CartesianTrajectory ten = integrate_cartesian(m, x, vel, 0.0, 10 * T, opt);
    REQUIRE(ten.status == OdeStatus::Completed);
    const double J0 = ten.J.front();
    double drift = 0;
    for (double j : ten.J) drift = std::max(drift, std::abs(j - J0));
    CHECK(drift <= 1e-10);
}

TEST_CASE("zero-velocity Lagrange start collapses homothetically") {
    const FrameChart& ch = lagrange_chart();
    OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-14;
    const CartesianTrajectory tr =
        integrate_cartesian(ch.base.m, ch.base.x, Vec::Zero(ch.base.x.size()), 0.0, 10.0, opt, 1e-4);
    CHECK(tr.status == OdeStatus::StepFailure);
    double theta = 0.0;
    for (size_t i = 0; i < tr.t.size(); ++i) {
        const ChartPoint p = to_chart(ch, tr.x[i], theta);
        theta = p.theta;
        CHECK(p.z.norm() <= 1e-10);
    }
}

TEST_CASE("homothetic orbit formula") {
    const FrameChart& ch = lagrange_chart();
    const HomotheticState h = homothetic_orbit(ch, 1.0);
    CHECK(h.r == doctest::Approx(std::pow(1.5, 2.0 / 3.0) * std::cbrt(ch.kappa)).epsilon(1e-15));
    CHECK(h.residual <= 1e-12);
    for (double t : {0.01, 0.3, 7.0})
        CHECK(homothetic_orbit(ch, t).r * std::pow(t, -2.0 / 3.0) == doctest::Approx(h.r).epsilon(1e-14));
    // U(0)/r against the asymptotic law
    const double t = 0.25;
    const HomotheticState q = homothetic_orbit(ch, t);
    CHECK(ch.lambda / q.r ==
          doctest::Approx(std::cbrt(1.0 / 18.0) * std::pow(ch.kappa, 2.0 / 3.0) * std::pow(t, -2.0 / 3.0))
              .epsilon(1e-13));
    CHECK_THROWS(homothetic_orbit(ch, 0.0));

    // equal masses at I = 1: kappa = 6
    const FrameChart eq = build_chart(classify(
        solve_cc(make_config({1, 1, 1}, {{{0, 0}}, {{1, 0}}, {{0.5, std::sqrt(3.0) / 2}}}))));
    CHECK(homothetic_orbit(eq, 1.0).r == doctest::Approx(2.3811).epsilon(1e-4));
}

TEST_CASE("frame residuals along Cartesian arcs") {
    const FrameChart& ch = lagrange_chart();
    OdeOptions opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-12;

    SUBCASE("homothetic arc") {
        const HomotheticState h = homothetic_orbit(ch, 1.0);
        const CartesianTrajectory tr = integrate_cartesian(ch.base.m, h.x, h.v, 1.0, 1e-3, opt);
        const CrosscheckReport rep = crosscheck_frames(ch, tr);
        CHECK(rep.max_full <= 1e-9);
        CHECK(rep.max_reduced <= 1e-9);
    }
    SUBCASE("rotating arc with J != 0") {
        Vec v = 0.3 * rot90(ch.base.x) + 0.1 * ch.E.col(0);
        const CartesianTrajectory tr = integrate_cartesian(ch.base.m, ch.base.x, v, 0.0, 0.5, opt);
        REQUIRE(tr.status == OdeStatus::Completed);
        const CrosscheckReport rep = crosscheck_frames(ch, tr);
        CHECK(rep.max_J > 1e-3);
        CHECK(rep.max_full <= 1e-6);
        CHECK(rep.max_roundtrip <= 1e-12);
    }
}

TEST_CASE("theta' identity on a J = 0 arc") {
    const FrameChart& ch = lagrange_chart();
    // a J = 0 start: shape velocity along E5 has no angular momentum about the CC
    Vec v = 0.2 * ch.E.col(0) - 0.1 * ch.E3;
    const double J = angular_momentum(ch.base.m, ch.base.x, v);
    v -= J / mass_inner(ch.base.m, rot90(ch.base.x), rot90(ch.base.x)) * rot90(ch.base.x);
    REQUIRE(std::abs(angular_momentum(ch.base.m, ch.base.x, v)) < 1e-14);
    OdeOptions opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-13;
    const CartesianTrajectory tr = integrate_cartesian(ch.base.m, ch.base.x, v, 0.0, 0.3, opt);
    REQUIRE(tr.status == OdeStatus::Completed);
    double worst = 0;
    for (size_t i = 0; i < tr.t.size(); ++i) {
        const Vec a = Vec::Zero(tr.x[i].size());  // only the J = 0 identity is used here
        worst = std::max(worst, frame_residual(ch, tr.x[i], tr.v[i], a).theta_dot_identity);
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("generated collision orbit approaches the equilibrium") {
    const FrameChart& ch = lagrange_chart();
    CollisionOrbitOptions co;
    co.delta = 1e-3;
    co.tau_back = 12;
    const CollisionOrbit orb = make_collision_orbit(ch, co);
    REQUIRE(orb.backward.status == OdeStatus::Completed);
    CHECK(orb.approached);
    CHECK(std::abs(orb.fitted_rate - orb.seeded_rate) <= 0.25 * orb.seeded_rate);
    CHECK(max_abs(orb.backward.J_residual) <= 1e-10);
    // Upsilon increases in tau along the r = 0 orbit and tends to sqrt(kappa) backward
    const auto& st = orb.backward.states;
    for (size_t i = 1; i < st.size(); ++i) CHECK(st[i].Upsilon >= st[i - 1].Upsilon - 1e-12);
    CHECK(st.front().Upsilon == doctest::Approx(std::sqrt(ch.kappa)).epsilon(1e-8));
}

TEST_CASE("zero seed stays at the equilibrium") {
    const FrameChart& ch = lagrange_chart();
    CollisionOrbitOptions co;
    co.delta = 0.0;
    co.tau_back = 5;
    const CollisionOrbit orb = make_collision_orbit(ch, co);
    for (const BlowupState& s : orb.backward.states) {
        CHECK(s.z.norm() == 0.0);
        CHECK(s.Z.norm() == 0.0);
        CHECK(s.Upsilon == doctest::Approx(std::sqrt(ch.kappa)).epsilon(1e-14));
    }
}

TEST_CASE("theta limit of a mixed-mode orbit is exponential") {
    const FrameChart& ch = lagrange_chart();
    CollisionOrbitOptions co;
    co.mix = {1.0, 0.6};
    co.delta = 1e-3;
    co.tau_back = 12;
    const ThetaLimit tl = theta_limit(make_collision_orbit(ch, co).backward);
    CHECK(tl.converged);
    CHECK(tl.model == TailModel::Exponential);
    CHECK(tl.sigma > 0);
    CHECK(tl.r2_exp >= 0.99);
}

TEST_CASE("theta limit of constant data") {
    std::vector<double> s, th;
    for (int i = 0; i < 100; ++i) s.push_back(i + 1.0), th.push_back(0.25);
    const ThetaLimit tl = theta_limit(s, th);
    CHECK(tl.converged);
    CHECK(tl.model == TailModel::Constant);
    CHECK(tl.theta0 == 0.25);
}

TEST_CASE("theta limit of a power-law tail") {
    std::vector<double> s, th;
    for (int i = 0; i < 400; ++i) {
        const double x = std::pow(10.0, 4.0 * i / 399.0);
        s.push_back(x);
        th.push_back(1.0 + 2.0 / x);
    }
    const ThetaLimit tl = theta_limit(s, th);
    CHECK(tl.converged);
    CHECK(tl.model == TailModel::PowerLaw);
    CHECK(tl.theta0 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(tl.p == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("the slowly divergent series is reported as not converging") {
    const SeriesSamples ser = example2_series(3.0, 1e8, 400);
    const ThetaLimit tl = theta_limit(ser.tau, ser.value);
    CHECK_FALSE(tl.converged);
    CHECK(tl.model == TailModel::Divergent);
    CHECK(ratios_indicate_divergence(decade_ratios(ser.tau, ser.value)));
}

TEST_CASE("gradient-like property on a small sample") {
    const FrameChart& ch = lagrange_chart();
    BlowupState s = rest_state(ch);
    s.Z(0) = 0.1;
    s.Upsilon = project_upsilon(ch, s);
    CHECK(blowup_rhs(ch, s).dUpsilon > 0);

    const GradientLikeReport rep = gradient_like_check(ch, 50, 5.0, 2024);
    CHECK(rep.samples == 50);
    CHECK(rep.violations == 0);
    CHECK(rep.derivative_violations == 0);
    CHECK(rep.arcs_completed + rep.domain_exits <= 50);
}

TEST_CASE("homothetic asymptotic exponents") {
    const FrameChart& ch = lagrange_chart();
    const HomotheticState h = homothetic_orbit(ch, 1.0);
    OdeOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-14;
    const CartesianTrajectory tr = integrate_cartesian(ch.base.m, h.x, h.v, 1.0, 0.0, opt, 1e-5);
    const AsymptoticReport a = asymptotic_exponents(tr, 0.0, 2.0);
    CHECK(a.I.slope == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
    CHECK(a.U.slope == doctest::Approx(-2.0 / 3.0).epsilon(1e-3));
    CHECK(a.I.prefactor == doctest::Approx(std::pow(1.5, 4.0 / 3.0) * std::pow(ch.kappa, 2.0 / 3.0)).epsilon(5e-3));
    CHECK(a.U.prefactor == doctest::Approx(std::cbrt(1.0 / 18.0) * std::pow(ch.kappa, 2.0 / 3.0)).epsilon(5e-3));
    CHECK(a.max_abs_J <= 1e-10);

    CartesianTrajectory shortened = tr;
    shortened.t.resize(3);
    shortened.x.resize(3);
    shortened.v.resize(3);
    CHECK_THROWS_AS(asymptotic_exponents(shortened, 0.0, 2.0), std::invalid_argument);
}
