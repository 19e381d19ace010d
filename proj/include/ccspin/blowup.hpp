#pragma once

#include "ccspin/fit.hpp"
#include "ccspin/frame.hpp"
#include "ccspin/ode.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ccs {

// State of the tau-time system. Packed layout: [z (K), Z (K), r, Upsilon, theta, t].
struct BlowupState {
    Vec z, Z;
    double r = 0.0;
    double Upsilon = 0.0;
    double theta = 0.0;
    double t = 0.0;  // physical time, dt = r^{3/2} dtau
};

State pack(const BlowupState& s);
BlowupState unpack(const State& y, int K);

struct BlowupDerivative {
    Vec dz, dZ;
    double dr = 0, dUpsilon = 0, dtheta = 0, dt = 0;
};

// Throws ChartDomainError when |z| >= 1.
BlowupDerivative blowup_rhs(const FrameChart& ch, const BlowupState& s);
// Twice the reduced kinetic form: (z.Z)^2/z3^2 + |Z|^2 - (Z^T Q z)^2.
double kinetic2(const FrameChart& ch, const Vec& z, const Vec& Z);
// Upsilon^2 + 2K - 2U - 2 r H (zero on the energy level H).
double energy_relation(const FrameChart& ch, const BlowupState& s, double H = 0.0);
// <i v, v'> + theta' evaluated with the basis vectors themselves; zero when J = 0.
double angular_residual(const FrameChart& ch, const BlowupState& s);
// Cartesian position and velocity of a blown-up state (r > 0).
std::pair<Vec, Vec> blowup_to_cartesian(const FrameChart& ch, const BlowupState& s);

struct Trajectory {
    std::vector<double> tau;
    std::vector<BlowupState> states;
    std::vector<double> energy_residual;
    std::vector<double> J_residual;
    double H = 0.0;
    OdeStatus status = OdeStatus::Completed;
    std::string message;
};

// on_level = true integrates the form with U eliminated from the Upsilon equation through the
// energy relation; it keeps the level H invariant, which the full form does not do numerically
// when Upsilon > 0 for long spans.
Trajectory integrate_blowup(const FrameChart& ch, const BlowupState& s0, double tau0, double tau1,
                            const OdeOptions& opt = {}, double H = 0.0,
                            const std::function<bool(double, const BlowupState&)>& stop = nullptr,
                            bool on_level = false);

// ---- physical coordinates ----

struct CartesianTrajectory {
    Vec m;
    std::vector<double> t;
    std::vector<Vec> x, v;
    std::vector<double> energy, J;
    OdeStatus status = OdeStatus::Completed;
    std::string message;
};

double total_energy(const Vec& m, const Vec& x, const Vec& v);
double angular_momentum(const Vec& m, const Vec& x, const Vec& v);
double kinetic_energy(const Vec& m, const Vec& v);

// Direct Newton integration. Stops with StepFailure once the smallest separation drops below
// min_sep_rel times the initial diameter.
CartesianTrajectory integrate_cartesian(const Vec& m, const Vec& x0, const Vec& v0, double t0,
                                        double t1, const OdeOptions& opt = {},
                                        double min_sep_rel = 1e-9);

// Residuals of the moving-frame equations at one Cartesian state, in tau units
// (each equation multiplied by r^3, the r-equation by r^2).
struct FrameResidual {
    double full = 0.0;     // equations with theta-dot, theta-ddot terms (any J)
    double reduced = 0.0;  // J = 0 reduced system; NaN when |J| is not small
    double J = 0.0;
    double theta_dot_identity = 0.0;  // |theta_dot + zdot^T Q z| scaled, valid when J = 0
};
FrameResidual frame_residual(const FrameChart& ch, const Vec& x, const Vec& v, const Vec& a);

struct CrosscheckReport {
    double max_full = 0.0;
    double max_reduced = 0.0;
    double max_roundtrip = 0.0;
    double max_J = 0.0;
    int samples = 0;
};
CrosscheckReport crosscheck_frames(const FrameChart& ch, const CartesianTrajectory& traj);

// ---- exact and generated collision orbits ----

struct HomotheticState {
    double r, rdot, rddot;
    Vec x, v;
    double residual;  // |rddot + kappa / (2 r^2)| relative to kappa / (2 r^2)
};
HomotheticState homothetic_orbit(const FrameChart& ch, double t);

struct CollisionOrbitOptions {
    std::vector<double> mix;  // coefficients over the unstable modes; empty = leading mode only
    double delta = 1e-4;
    double r0 = 0.0;          // > 0 lifts the orbit off the collision manifold
    double tau_back = 30.0;
    double tau_forward = 0.0;
    OdeOptions ode{};
};

struct CollisionOrbit {
    BlowupState seed;
    Trajectory backward;  // tau in [-tau_back, 0], ascending; ends at the seed
    Trajectory forward;
    std::vector<int> unstable_modes;  // chart indices with mu > 0
    std::vector<double> unstable_rates;  // tilde-mu of those modes
    double seeded_rate = 0.0;  // smallest rate present in the mix
    double fitted_rate = 0.0;  // exponential decay rate of |(z, Z, Upsilon - sqrt(kappa))| backward
    double fit_r2 = 0.0;
    bool approached = false;
};

// Collision orbit through the unstable manifold of (0, 0, 0, sqrt(kappa)). The seed (tau = 0)
// has size delta along the mixed unstable modes; the arc back to tau = -tau_back is produced by
// integrating forward from the linearised flow there.
CollisionOrbit make_collision_orbit(const FrameChart& ch, const CollisionOrbitOptions& opt);
// Newton correction of Upsilon onto the energy level H (starts from sqrt(kappa) or the sign given).
double project_upsilon(const FrameChart& ch, const BlowupState& s, double H = 0.0,
                       double start = 0.0);

// ---- spin diagnostics ----

enum class TailModel { Constant, Exponential, PowerLaw, Divergent, Insufficient };
const char* to_string(TailModel m);

struct ThetaLimit {
    double theta0 = 0.0;
    TailModel model = TailModel::Insufficient;
    bool converged = false;
    double sigma = 0.0, log_c_exp = 0.0, r2_exp = 0.0;
    double p = 0.0, log_c_pow = 0.0, r2_pow = 0.0;
    int n_fit = 0;
    std::vector<double> decade_ratios;
    std::string note;
};

// Generic form: samples (s_i, theta_i) with the limit at s -> +infinity.
ThetaLimit theta_limit(const std::vector<double>& s, const std::vector<double>& theta);
// Trajectory form: the collision end is tau -> -infinity (backward arcs).
ThetaLimit theta_limit(const Trajectory& traj);
// Decade-ratio test on the increments of theta over successive decades of s.
std::vector<double> decade_ratios(const std::vector<double>& s, const std::vector<double>& theta);
bool ratios_indicate_divergence(const std::vector<double>& ratios);

struct GradientLikeReport {
    int samples = 0;
    int arcs_completed = 0;
    int domain_exits = 0;
    int violations = 0;         // steps where Upsilon decreased by more than tol
    int derivative_violations = 0;  // Upsilon' < -tol at a sample
    double max_decrease = 0.0;
    double min_upsilon_prime = 0.0;
    long steps_checked = 0;
};
GradientLikeReport gradient_like_check(const FrameChart& ch, int samples, double tau_span,
                                       std::uint64_t seed, double tol = 1e-12,
                                       double z_radius = 0.2, double Z_scale = 0.3,
                                       const OdeOptions& opt = {});

// ---- asymptotics of physical collision orbits ----

struct ExponentFit {
    double slope = 0, slope_se = 0;
    double prefactor = 0, prefactor_rel_se = 0;
    double r2 = 0;
};
struct AsymptoticReport {
    ExponentFit I, U, K, r;
    double max_abs_J = 0.0;
    double t_min = 0.0, t_max = 0.0;
    int n = 0;
};
// Time to collision is |t - t_collision|; the fit uses the last two decades before collision.
AsymptoticReport asymptotic_exponents(const CartesianTrajectory& traj, double t_collision,
                                      double decades = 2.0);

}  // namespace ccs
