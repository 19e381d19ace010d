#include "ccspin/blowup.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ccs {

State pack(const BlowupState& s) {
    const auto K = s.z.size();
    State y(2 * K + 4);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(K); ++i) {
        y[i] = s.z(i);
        y[K + i] = s.Z(i);
    }
    y[2 * K] = s.r;
    y[2 * K + 1] = s.Upsilon;
    y[2 * K + 2] = s.theta;
    y[2 * K + 3] = s.t;
    return y;
}

BlowupState unpack(const State& y, int K) {
    BlowupState s;
    s.z = Eigen::Map<const Vec>(y.data(), K);
    s.Z = Eigen::Map<const Vec>(y.data() + K, K);
    s.r = y[2 * K];
    s.Upsilon = y[2 * K + 1];
    s.theta = y[2 * K + 2];
    s.t = y[2 * K + 3];
    return s;
}

double kinetic2(const FrameChart& ch, const Vec& z, const Vec& Z) {
    const double z3 = z3_of(z);
    const double s = z.dot(Z);
    const double w = Z.dot(ch.Q * z);
    return s * s / (z3 * z3) + Z.squaredNorm() - w * w;
}

namespace {

// constrained = true eliminates U from the Upsilon equation with the energy relation, so the
// level H is exactly invariant instead of being repelling (E' = Upsilon E for the full form).
BlowupDerivative rhs_impl(const FrameChart& ch, const BlowupState& s, bool constrained, double H) {
    const Vec& z = s.z;
    const Vec& Z = s.Z;
    const double z3 = z3_of(z);
    const double z32 = z3 * z3;
    const ChartPotential cp = potential_in_chart(ch, z);
    const Vec Qz = ch.Q * z;
    const Vec QZ = ch.Q * Z;
    const double sz = z.dot(Z);
    const double w = Z.dot(Qz);
    const double Z2 = Z.squaredNorm();
    const double twoK = sz * sz / z32 + Z2 - w * w;
    const double ups = s.Upsilon;

    const int K = static_cast<int>(z.size());
    Vec rhs = cp.grad - z * (Z2 / z32) - z * (sz * sz / (z32 * z32)) + 2.0 * w * QZ -
              0.5 * ups * (Z + z * (sz / z32) - w * Qz);
    Mat M = Mat::Identity(K, K) + z * z.transpose() / z32 - Qz * Qz.transpose();

    BlowupDerivative d;
    d.dz = Z;
    d.dZ = M.ldlt().solve(rhs);
    d.dr = s.r * ups;
    d.dUpsilon = constrained ? 0.5 * twoK + s.r * H : 0.5 * ups * ups + twoK - cp.value;
    d.dtheta = z.dot(QZ);
    d.dt = s.r > 0 ? std::pow(s.r, 1.5) : 0.0;
    return d;
}

Rhs make_blowup_rhs(const FrameChart& ch, bool constrained, double H = 0.0) {
    const int K = ch.K();
    return [&ch, K, constrained, H](const State& y, State& dy, double) {
        dy.assign(y.size(), 0.0);
        try {
            const BlowupState s = unpack(y, K);
            const BlowupDerivative d = rhs_impl(ch, s, constrained, H);
            for (int i = 0; i < K; ++i) {
                dy[i] = d.dz(i);
                dy[K + i] = d.dZ(i);
            }
            dy[2 * K] = d.dr;
            dy[2 * K + 1] = d.dUpsilon;
            dy[2 * K + 2] = d.dtheta;
            dy[2 * K + 3] = d.dt;
        } catch (const std::exception&) {
            std::fill(dy.begin(), dy.end(), kOutsideDomain);
        }
    };
}

}  // namespace

BlowupDerivative blowup_rhs(const FrameChart& ch, const BlowupState& s) {
    if (s.z.size() != ch.K() || s.Z.size() != ch.K())
        throw DimensionError("blowup state dimension does not match chart");
    return rhs_impl(ch, s, false, 0.0);
}

double energy_relation(const FrameChart& ch, const BlowupState& s, double H) {
    const double U = potential_in_chart(ch, s.z).value;
    return s.Upsilon * s.Upsilon + kinetic2(ch, s.z, s.Z) - 2.0 * U - 2.0 * s.r * H;
}

double angular_residual(const FrameChart& ch, const BlowupState& s) {
    const Vec v = chart_direction(ch, s.z);
    const double z3 = z3_of(s.z);
    const Vec vp = (-s.z.dot(s.Z) / z3) * ch.E3 + ch.E * s.Z;
    const double thp = s.z.dot(ch.Q * s.Z);
    return mass_inner(ch.base.m, rot90(v), vp) + thp;
}

std::pair<Vec, Vec> blowup_to_cartesian(const FrameChart& ch, const BlowupState& s) {
    const Vec v = chart_direction(ch, s.z);
    const double z3 = z3_of(s.z);
    const Vec vp = (-s.z.dot(s.Z) / z3) * ch.E3 + ch.E * s.Z;
    const double thp = s.z.dot(ch.Q * s.Z);
    const Vec x = rotate_scale(v, s.r, s.theta);
    // dx/dt = r^{-1/2} e^{i theta} (Upsilon v + v' + theta' i v)
    const Vec body = s.Upsilon * v + vp + thp * rot90(v);
    const Vec xd = rotate_scale(body, 1.0 / std::sqrt(s.r), s.theta);
    return {x, xd};
}

Trajectory integrate_blowup(const FrameChart& ch, const BlowupState& s0, double tau0, double tau1,
                            const OdeOptions& opt, double H,
                            const std::function<bool(double, const BlowupState&)>& stop,
                            bool on_level) {
    (void)z3_of(s0.z);
    const int K = ch.K();
    const Rhs f = make_blowup_rhs(ch, on_level, H);
    std::function<bool(double, const State&)> st;
    if (stop) st = [&](double t, const State& y) { return stop(t, unpack(y, K)); };
    const OdeResult res = integrate(f, pack(s0), tau0, tau1, opt, st);
    Trajectory tr;
    tr.H = H;
    tr.status = res.status;
    tr.message = res.message;
    for (size_t i = 0; i < res.t.size(); ++i) {
        BlowupState s = unpack(res.y[i], K);
        tr.tau.push_back(res.t[i]);
        tr.energy_residual.push_back(energy_relation(ch, s, H));
        tr.J_residual.push_back(angular_residual(ch, s));
        tr.states.push_back(std::move(s));
    }
    return tr;
}

// ---------------------------------------------------------------------------

double kinetic_energy(const Vec& m, const Vec& v) { return 0.5 * mass_inner(m, v, v); }

double total_energy(const Vec& m, const Vec& x, const Vec& v) {
    return kinetic_energy(m, v) - potential(Config{m, x});
}

double angular_momentum(const Vec& m, const Vec& x, const Vec& v) {
    return mass_inner(m, rot90(x), v);
}

CartesianTrajectory integrate_cartesian(const Vec& m, const Vec& x0, const Vec& v0, double t0,
                                        double t1, const OdeOptions& opt, double min_sep_rel) {
    const Config c0{m, x0};
    validate(c0);
    if (v0.size() != x0.size()) throw DimensionError("velocity vector has wrong length");
    (void)potential(c0);
    const int d = static_cast<int>(x0.size());
    const double diam0 = diameter(c0);
    Rhs f = [&m, d](const State& y, State& dy, double) {
        dy.resize(y.size());
        Config c{m, Eigen::Map<const Vec>(y.data(), d)};
        for (int i = 0; i < d; ++i) dy[i] = y[d + i];
        try {
            const Vec a = potential_gradient(c);
            for (int i = 0; i < d; ++i) dy[d + i] = a(i);
        } catch (const CollisionError&) {
            std::fill(dy.begin(), dy.end(), kOutsideDomain);
        }
    };
    bool collided = false;
    auto stop = [&](double, const State& y) {
        Config c{m, Eigen::Map<const Vec>(y.data(), d)};
        const Mat r = pair_table(c);
        double mn = std::numeric_limits<double>::infinity();
        for (int j = 0; j < c.n(); ++j)
            for (int k = j + 1; k < c.n(); ++k) mn = std::min(mn, r(j, k));
        collided = mn < min_sep_rel * diam0;
        return collided;
    };
    State y0(2 * d);
    for (int i = 0; i < d; ++i) {
        y0[i] = x0(i);
        y0[d + i] = v0(i);
    }
    const OdeResult res = integrate(f, y0, t0, t1, opt, stop);
    CartesianTrajectory tr;
    tr.m = m;
    tr.status = res.status;
    tr.message = res.message;
    if (collided && res.status == OdeStatus::Stopped) {
        tr.status = OdeStatus::StepFailure;
        tr.message = "near collision: separation below threshold";
    }
    for (size_t i = 0; i < res.t.size(); ++i) {
        const Vec x = Eigen::Map<const Vec>(res.y[i].data(), d);
        const Vec v = Eigen::Map<const Vec>(res.y[i].data() + d, d);
        tr.t.push_back(res.t[i]);
        tr.x.push_back(x);
        tr.v.push_back(v);
        tr.energy.push_back(total_energy(m, x, v));
        tr.J.push_back(angular_momentum(m, x, v));
    }
    return tr;
}

// ---------------------------------------------------------------------------

namespace {

Vec remove_mean(const Vec& m, const Vec& y) {
    Config c{m, y};
    return center_and_project(c).x;
}

}  // namespace

FrameResidual frame_residual(const FrameChart& ch, const Vec& x_in, const Vec& v_in,
                             const Vec& a_in) {
    const Vec& m = ch.base.m;
    const Vec x = remove_mean(m, x_in);
    const Vec v = remove_mean(m, v_in);
    const Vec a = remove_mean(m, a_in);
    const ChartPoint p = to_chart(ch, x);
    const double th = p.theta;

    const Vec W = rotate_scale(x, 1.0, -th);
    const Vec Vd = rotate_scale(v, 1.0, -th);
    const Vec Ad = rotate_scale(a, 1.0, -th);
    const double W3 = mass_inner(m, W, ch.E3);
    const double thd = mass_inner(m, Vd, ch.E4) / W3;
    const Vec Wd = Vd - thd * rot90(W);
    const Vec part = -thd * rot90(Vd) + Ad - thd * rot90(Wd);
    const double thdd = mass_inner(m, part, ch.E4) / W3;
    const Vec Wdd = part - thdd * rot90(W);

    const double r = mass_norm(m, W);
    const double rd = mass_inner(m, W, Wd) / r;
    const double rdd = (mass_inner(m, Wd, Wd) + mass_inner(m, W, Wdd) - rd * rd) / r;
    const int K = ch.K();
    Vec z(K), zd(K), zdd(K);
    for (int k = 0; k < K; ++k) {
        z(k) = mass_inner(m, W, ch.E.col(k)) / r;
        zd(k) = (mass_inner(m, Wd, ch.E.col(k)) - rd * z(k)) / r;
        zdd(k) = (mass_inner(m, Wdd, ch.E.col(k)) - rdd * z(k) - 2.0 * rd * zd(k)) / r;
    }
    const double z3 = z3_of(z);
    const double z32 = z3 * z3;
    const ChartPotential cp = potential_in_chart(ch, z);
    const Vec Qz = ch.Q * z;
    const Vec Qzd = ch.Q * zd;
    const double s = z.dot(zd);
    const double zd2 = zd.squaredNorm();
    const double sdot = zd2 + z.dot(zdd);
    const double r3 = r * r * r;

    FrameResidual out;
    out.J = angular_momentum(m, x, v);

    // full equations
    const double pq = zd.dot(Qz);  // zdot^T Q z
    Vec Fz = (2.0 * rd / r) * (zd + z * (s / z32) + thd * Qz) + zdd + z * (sdot / z32) +
             z * (s * s / (z32 * z32)) + thdd * Qz + 2.0 * thd * Qzd - cp.grad / r3;
    const double Fr = rdd - r * (zd2 + s * s / z32 + thd * thd + 2.0 * thd * pq) + cp.value / (r * r);
    const double Fth = 2.0 * r * rd * (thd + pq) + r * r * (thdd + zdd.dot(Qz));
    out.full = std::max({(r3 * Fz).cwiseAbs().maxCoeff(), std::abs(r * r * Fr), std::abs(r * Fth)});

    const double scale = mass_norm(m, x) * mass_norm(m, v) + 1e-300;
    if (std::abs(out.J) <= 1e-8 * scale) {
        const double pdot = zdd.dot(Qz);
        const Vec P = zd + z * (s / z32) - pq * Qz;
        const Vec dP = zdd + z * (sdot / z32) + zd * (s / z32) + z * (2.0 * s * s / (z32 * z32)) -
                       pdot * Qz - pq * Qzd;
        const Vec dK = zd * (s / z32) + z * (s * s / (z32 * z32)) + pq * Qzd;
        const Vec Rz = (2.0 * rd / r) * P + dP - dK - cp.grad / r3;
        const double Rr = rdd - r * (zd2 + s * s / z32 - pq * pq) + cp.value / (r * r);
        out.reduced = std::max((r3 * Rz).cwiseAbs().maxCoeff(), std::abs(r * r * Rr));
        out.theta_dot_identity = std::abs(thd + pq) * std::pow(r, 1.5);
    } else {
        out.reduced = std::numeric_limits<double>::quiet_NaN();
        out.theta_dot_identity = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

CrosscheckReport crosscheck_frames(const FrameChart& ch, const CartesianTrajectory& traj) {
    CrosscheckReport rep;
    std::optional<double> hint;
    for (size_t i = 0; i < traj.t.size(); ++i) {
        const Vec& x = traj.x[i];
        const Vec a = potential_gradient(Config{traj.m, x});
        const FrameResidual fr = frame_residual(ch, x, traj.v[i], a);
        rep.max_full = std::max(rep.max_full, fr.full);
        if (!std::isnan(fr.reduced)) rep.max_reduced = std::max(rep.max_reduced, fr.reduced);
        rep.max_J = std::max(rep.max_J, std::abs(fr.J));
        const Vec xc = remove_mean(traj.m, x);
        const ChartPoint p = to_chart(ch, xc, hint);
        hint = p.theta;
        const Config back = from_chart(ch, p);
        rep.max_roundtrip =
            std::max(rep.max_roundtrip, (back.x - xc).cwiseAbs().maxCoeff() / std::max(1.0, xc.cwiseAbs().maxCoeff()));
        ++rep.samples;
    }
    return rep;
}

// ---------------------------------------------------------------------------

HomotheticState homothetic_orbit(const FrameChart& ch, double t) {
    if (!(t > 0)) throw std::invalid_argument("homothetic_orbit: t must be positive");
    HomotheticState h;
    const double kap = ch.kappa;
    h.r = std::pow(1.5, 2.0 / 3.0) * std::cbrt(kap) * std::pow(t, 2.0 / 3.0);
    h.rdot = (2.0 / 3.0) * h.r / t;
    h.rddot = -(2.0 / 9.0) * h.r / (t * t);
    h.x = h.r * ch.E3;
    h.v = h.rdot * ch.E3;
    const double force = kap / (2.0 * h.r * h.r);
    h.residual = std::abs(h.rddot + force) / force;
    return h;
}

double project_upsilon(const FrameChart& ch, const BlowupState& s, double H, double start) {
    const double U = potential_in_chart(ch, s.z).value;
    const double c = kinetic2(ch, s.z, s.Z) - 2.0 * U - 2.0 * s.r * H;
    double y = start != 0.0 ? start : std::sqrt(ch.kappa);
    for (int it = 0; it < 60; ++it) {
        const double f = y * y + c;
        const double step = f / (2.0 * y);
        y -= step;
        if (std::abs(step) <= 1e-16 * std::abs(y)) break;
    }
    if (!std::isfinite(y) || std::abs(y * y + c) > 1e-12 * std::max(1.0, std::abs(c)))
        throw std::domain_error("energy level not reachable from this (z, Z)");
    return y;
}

CollisionOrbit make_collision_orbit(const FrameChart& ch, const CollisionOrbitOptions& opt) {
    CollisionOrbit out;
    const int K = ch.K();
    const double sk = std::sqrt(ch.kappa);
    for (int k = 0; k < K; ++k)
        if (ch.mu(k) > 0 && ch.kind[k] == ModeKind::Positive) {
            out.unstable_modes.push_back(k);
            out.unstable_rates.push_back(-sk / 4.0 + std::sqrt(ch.mu(k) + ch.kappa / 16.0));
        }
    if (out.unstable_modes.empty()) throw std::domain_error("chart has no unstable modes");
    std::vector<double> mix = opt.mix;
    if (mix.empty()) {
        mix.assign(out.unstable_modes.size(), 0.0);
        const auto it = std::max_element(out.unstable_rates.begin(), out.unstable_rates.end());
        mix[it - out.unstable_rates.begin()] = 1.0;
    }
    if (mix.size() != out.unstable_modes.size())
        throw DimensionError("mode mix must have one coefficient per unstable mode");
    double nrm = 0;
    for (double c : mix) nrm += c * c;
    nrm = std::sqrt(nrm);

    // The arc is generated forward from the linearised flow at tau = -tau_back: integrating
    // backward from the seed would amplify the stable directions like exp(|nu_-| tau_back).
    const double T = opt.tau_back;
    BlowupState s;
    s.z = Vec::Zero(K);
    s.Z = Vec::Zero(K);
    out.seeded_rate = std::numeric_limits<double>::infinity();
    if (nrm > 0) {
        for (size_t j = 0; j < mix.size(); ++j) {
            const int k = out.unstable_modes[j];
            const double c = opt.delta * mix[j] / nrm * std::exp(-out.unstable_rates[j] * T);
            s.z(k) += c;
            s.Z(k) += c * out.unstable_rates[j];
            if (mix[j] != 0.0) out.seeded_rate = std::min(out.seeded_rate, out.unstable_rates[j]);
        }
    }
    s.r = opt.r0 > 0 ? std::exp(-sk * T) : 0.0;
    s.Upsilon = project_upsilon(ch, s, 0.0, sk);

    // Unit chunks with the absolute tolerance tied to the current size of (z, Z): the modes can
    // differ by many orders of magnitude and rounding leaks between them.
    Trajectory& arc = out.backward;
    arc.tau.push_back(-T);
    arc.states.push_back(s);
    for (double a = -T; a < 0.0;) {
        const double b = std::min(0.0, a + 1.0);
        const BlowupState& cur = arc.states.back();
        OdeOptions ode = opt.ode;
        const double size = std::max(cur.z.cwiseAbs().maxCoeff(), cur.Z.cwiseAbs().maxCoeff());
        ode.atol = std::min(opt.ode.atol, std::max(1e-2 * opt.ode.rtol * size, 1e-300));
        ode.dt0 = std::min(opt.ode.dt0, b - a);
        const Trajectory part = integrate_blowup(ch, cur, a, b, ode, 0.0, nullptr, true);
        arc.tau.insert(arc.tau.end(), part.tau.begin() + 1, part.tau.end());
        arc.states.insert(arc.states.end(), part.states.begin() + 1, part.states.end());
        if (part.status != OdeStatus::Completed) {
            arc.status = part.status;
            arc.message = part.message;
            break;
        }
        a = b;
    }
    for (const BlowupState& b : arc.states) {
        arc.energy_residual.push_back(energy_relation(ch, b, 0.0));
        arc.J_residual.push_back(angular_residual(ch, b));
    }
    if (arc.status != OdeStatus::Completed) {
        out.seed = arc.states.back();
        return out;
    }
    // r enters linearly when H = 0: rescale so that r(0) = r0
    if (opt.r0 > 0) {
        const double g = opt.r0 / out.backward.states.back().r;
        for (BlowupState& b : out.backward.states) {
            b.r *= g;
            b.t *= std::pow(g, 1.5);
        }
    }
    out.seed = out.backward.states.back();

    if (opt.tau_forward > 0) {
        auto leave = [](double, const BlowupState& st) { return st.z.squaredNorm() > 0.8; };
        out.forward = integrate_blowup(ch, out.seed, 0.0, opt.tau_forward, opt.ode, 0.0, leave, true);
    }

    std::vector<double> xs, ys;
    double dmin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < out.backward.tau.size(); ++i) {
        const BlowupState& b = out.backward.states[i];
        const double dd = std::sqrt(b.z.squaredNorm() + b.Z.squaredNorm() +
                                    (b.Upsilon - sk) * (b.Upsilon - sk));
        if (i == 0) dmin = dd;
        if (dd > 0 && dd < 0.5 * opt.delta) {
            xs.push_back(out.backward.tau[i]);
            ys.push_back(std::log(dd));
        }
    }
    if (xs.size() >= 5) {
        const LineFit f = lad_line(xs, ys);
        out.fitted_rate = f.slope;
        out.fit_r2 = f.r2;
    }
    out.approached = nrm == 0 || dmin < 1e-3 * opt.delta;
    return out;
}

// ---------------------------------------------------------------------------

const char* to_string(TailModel m) {
    switch (m) {
        case TailModel::Constant: return "constant";
        case TailModel::Exponential: return "exponential";
        case TailModel::PowerLaw: return "power_law";
        case TailModel::Divergent: return "divergent";
        case TailModel::Insufficient: return "insufficient";
    }
    return "?";
}

std::vector<double> decade_ratios(const std::vector<double>& s, const std::vector<double>& th) {
    std::vector<double> out;
    if (s.size() < 2) return out;
    auto interp = [&](double q) {
        auto it = std::lower_bound(s.begin(), s.end(), q);
        if (it == s.begin()) return th.front();
        if (it == s.end()) return th.back();
        const size_t i = it - s.begin();
        const double w = (q - s[i - 1]) / (s[i] - s[i - 1]);
        return th[i - 1] + w * (th[i] - th[i - 1]);
    };
    const double s0 = std::max(s.front(), 1e-300);
    if (s0 <= 0 || s.back() <= 0) return out;
    const double lo = std::ceil(std::log10(std::max(s0, 1e-12)));
    const double hi = std::floor(std::log10(s.back()));
    std::vector<double> inc;
    for (double k = lo; k + 1 <= hi; k += 1.0)
        inc.push_back(std::abs(interp(std::pow(10.0, k + 1)) - interp(std::pow(10.0, k))));
    for (size_t i = 1; i < inc.size(); ++i) out.push_back(inc[i - 1] > 0 ? inc[i] / inc[i - 1] : 0.0);
    return out;
}

bool ratios_indicate_divergence(const std::vector<double>& r) {
    if (r.size() < 3) return false;
    const size_t n = r.size();
    const bool rising = r[n - 1] > r[n - 2] * (1 + 1e-3) && r[n - 2] > r[n - 3] * (1 + 1e-3);
    return r.back() >= 0.99 || (rising && r.back() > 0.75);
}

namespace {

double interp_sorted(const std::vector<double>& s, const std::vector<double>& y, double x) {
    const auto it = std::lower_bound(s.begin(), s.end(), x);
    if (it == s.begin()) return y.front();
    if (it == s.end()) return y.back();
    const size_t j = static_cast<size_t>(it - s.begin());
    const double w = (x - s[j - 1]) / (s[j] - s[j - 1]);
    return y[j - 1] + w * (y[j] - y[j - 1]);
}

// Remaining change beyond the last sample, from Aitken's delta-squared on theta at geometrically
// spaced s. Exact for power-law tails. Returns zero unless two successive increment ratios
// agree and the increments sit above the rounding floor (exponential tails end there).
double aitken_tail(const std::vector<double>& s, const std::vector<double>& th, double floor) {
    double s0 = 0;
    for (double v : s)
        if (v > 0) {
            s0 = v;
            break;
        }
    const double s2 = s.back();
    if (!(s0 > 0) || s2 <= s0) return 0.0;
    const double rho = std::min(10.0, std::pow(s2 / s0, 0.25));
    if (rho < 1.5) return 0.0;
    const double a0 = interp_sorted(s, th, s2 / (rho * rho * rho));
    const double a = interp_sorted(s, th, s2 / (rho * rho));
    const double b = interp_sorted(s, th, s2 / rho);
    const double c = th.back();
    const double d0 = a - a0, d1 = b - a, d2 = c - b;
    if (std::abs(d2) < 1e3 * floor) return 0.0;
    const double q = d2 / d1, q0 = d1 / d0;
    if (!(q > 0 && q < 0.9) || std::abs(q / q0 - 1) > 0.2) return 0.0;
    return d2 * q / (1 - q);
}

}  // namespace

ThetaLimit theta_limit(const std::vector<double>& s_in, const std::vector<double>& th_in) {
    if (s_in.size() != th_in.size()) throw DimensionError("theta_limit: length mismatch");
    ThetaLimit out;
    if (s_in.size() < 2) {
        out.note = "too few samples";
        return out;
    }
    std::vector<size_t> idx(s_in.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return s_in[a] < s_in[b]; });
    std::vector<double> s, th;
    for (size_t i : idx) {
        s.push_back(s_in[i]);
        th.push_back(th_in[i]);
    }
    out.theta0 = th.back();
    out.decade_ratios = decade_ratios(s, th);
    if (ratios_indicate_divergence(out.decade_ratios)) {
        out.model = TailModel::Divergent;
        out.converged = false;
        out.note = "increments per decade do not shrink geometrically";
        return out;
    }
    double mx = 0, big = std::abs(out.theta0);
    for (double v : th) {
        mx = std::max(mx, std::abs(v - out.theta0));
        big = std::max(big, std::abs(v));
    }
    // rounding in theta is relative to the largest value carried along the arc
    const double floor = std::max(1e-13 * big, 1e-300);
    out.theta0 += aitken_tail(s, th, floor);
    if (mx <= floor) {
        out.model = TailModel::Constant;
        out.converged = true;
        out.note = "theta constant to within rounding";
        return out;
    }
    std::vector<double> xs, ls, lx;
    for (size_t i = 0; i + 1 < s.size(); ++i) {
        const double dlt = std::abs(th[i] - out.theta0);
        if (dlt > 100.0 * floor && s[i] > 0) {
            xs.push_back(s[i]);
            ls.push_back(std::log(dlt));
        }
    }
    // window: the 40% of informative samples nearest the limit
    const size_t n = xs.size();
    const size_t keep = static_cast<size_t>(std::ceil(0.4 * static_cast<double>(n)));
    if (keep < 5) {
        out.model = TailModel::Insufficient;
        out.converged = true;
        out.note = "too few informative tail samples";
        return out;
    }
    std::vector<double> wx(xs.end() - keep, xs.end()), wl(ls.end() - keep, ls.end());
    for (double v : wx) lx.push_back(std::log(v));
    const LineFit fe = lad_line(wx, wl);
    out.sigma = -fe.slope;
    out.log_c_exp = fe.intercept;
    out.r2_exp = fe.r2;
    const LineFit fp = lad_line(lx, wl);
    out.p = -fp.slope;
    out.log_c_pow = fp.intercept;
    out.r2_pow = fp.r2;
    out.n_fit = static_cast<int>(keep);
    out.converged = true;
    if (out.r2_exp >= out.r2_pow && out.sigma > 0)
        out.model = TailModel::Exponential;
    else if (out.p > 0)
        out.model = TailModel::PowerLaw;
    else {
        out.model = TailModel::Insufficient;
        out.converged = false;
        out.note = "tail does not decay";
    }
    return out;
}

ThetaLimit theta_limit(const Trajectory& traj) {
    std::vector<double> s, th;
    for (size_t i = 0; i < traj.tau.size(); ++i) {
        s.push_back(-traj.tau[i]);
        th.push_back(traj.states[i].theta);
    }
    return theta_limit(s, th);
}

// ---------------------------------------------------------------------------

GradientLikeReport gradient_like_check(const FrameChart& ch, int samples, double tau_span,
                                       std::uint64_t seed, double tol, double z_radius,
                                       double Z_scale, const OdeOptions& opt) {
    const int K = ch.K();
    struct Arc {
        bool completed = false, exited = false;
        int violations = 0, dviol = 0;
        double max_dec = 0, min_up = std::numeric_limits<double>::infinity();
        long steps = 0;
    };
    std::vector<Arc> arcs(samples);
    const Rhs f = make_blowup_rhs(ch, true);
    tbb::parallel_for(0, samples, [&](int i) {
        std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1));
        std::normal_distribution<double> nd(0.0, 1.0);
        std::uniform_real_distribution<double> ud(0.0, 1.0);
        Arc& arc = arcs[i];
        BlowupState s;
        s.z.resize(K);
        s.Z.resize(K);
        double U = 0, twoK = 0;
        for (int attempt = 0; attempt < 100; ++attempt) {
            for (int k = 0; k < K; ++k) s.z(k) = nd(rng);
            s.z *= z_radius * std::pow(ud(rng), 1.0 / K) / s.z.norm();
            for (int k = 0; k < K; ++k) s.Z(k) = Z_scale * nd(rng) / std::sqrt(double(K));
            U = potential_in_chart(ch, s.z).value;
            twoK = kinetic2(ch, s.z, s.Z);
            if (2 * U - twoK > 0) break;
        }
        s.r = 0.0;
        s.Upsilon = (ud(rng) < 0.5 ? -1.0 : 1.0) * std::sqrt(std::max(0.0, 2 * U - twoK));
        // leave the sampled region near the chart boundary or at a close binary encounter (U
        // large); the unregularised binary motion would otherwise collapse the step size
        auto leave = [&ch, K](double, const State& y) {
            const Vec z = Eigen::Map<const Vec>(y.data(), K);
            if (z.squaredNorm() > 0.9) return true;
            try {
                return potential_in_chart(ch, z).value > 10.0 * ch.lambda;
            } catch (const std::exception&) {
                return true;
            }
        };
        const OdeResult res = integrate(f, pack(s), 0.0, tau_span, opt, leave);
        arc.completed = res.status == OdeStatus::Completed;
        arc.exited = !arc.completed;
        State dy;
        for (size_t j = 0; j < res.y.size(); ++j) {
            const double up = res.y[j][2 * K + 1];
            f(res.y[j], dy, 0.0);
            if (std::abs(dy[2 * K + 1]) < 0.5 * kOutsideDomain) {
                arc.min_up = std::min(arc.min_up, dy[2 * K + 1]);
                if (dy[2 * K + 1] < -tol) ++arc.dviol;
            }
            if (j > 0) {
                const double dec = res.y[j - 1][2 * K + 1] - up;
                arc.max_dec = std::max(arc.max_dec, dec);
                if (dec > tol) ++arc.violations;
                ++arc.steps;
            }
        }
    });
    GradientLikeReport rep;
    rep.samples = samples;
    rep.min_upsilon_prime = std::numeric_limits<double>::infinity();
    for (const Arc& a : arcs) {
        rep.arcs_completed += a.completed;
        rep.domain_exits += a.exited;
        rep.violations += a.violations;
        rep.derivative_violations += a.dviol;
        rep.max_decrease = std::max(rep.max_decrease, a.max_dec);
        rep.min_upsilon_prime = std::min(rep.min_upsilon_prime, a.min_up);
        rep.steps_checked += a.steps;
    }
    return rep;
}

// ---------------------------------------------------------------------------

AsymptoticReport asymptotic_exponents(const CartesianTrajectory& traj, double t_collision,
                                      double decades) {
    AsymptoticReport rep;
    std::vector<double> tt;
    for (double t : traj.t) tt.push_back(std::abs(t - t_collision));
    double tmin = std::numeric_limits<double>::infinity();
    for (double t : tt)
        if (t > 0) tmin = std::min(tmin, t);
    const double tmax = tmin * std::pow(10.0, decades);
    std::vector<double> lt, lI, lU, lK, lr;
    for (size_t i = 0; i < tt.size(); ++i) {
        if (!(tt[i] > 0) || tt[i] > tmax * (1 + 1e-12)) continue;
        const Config c{traj.m, traj.x[i]};
        const double I = moment_of_inertia(c);
        lt.push_back(std::log(tt[i]));
        lI.push_back(std::log(I));
        lU.push_back(std::log(potential(c)));
        lK.push_back(std::log(kinetic_energy(traj.m, traj.v[i])));
        lr.push_back(0.5 * std::log(I));
        rep.max_abs_J = std::max(rep.max_abs_J, std::abs(traj.J[i]));
    }
    rep.n = static_cast<int>(lt.size());
    if (rep.n < 5) throw std::invalid_argument("insufficient range for the asymptotic fit");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : lt) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    rep.t_min = std::exp(lo);
    rep.t_max = std::exp(hi);
    if (hi - lo < 0.5 * std::log(10.0) * decades)
        throw std::invalid_argument("insufficient range for the asymptotic fit");
    auto fit = [&](const std::vector<double>& ly) {
        const LineFit f = ols_line(lt, ly);
        ExponentFit e;
        e.slope = f.slope;
        e.slope_se = f.se_slope;
        e.prefactor = std::exp(f.intercept);
        e.prefactor_rel_se = f.se_intercept;
        e.r2 = f.r2;
        return e;
    };
    rep.I = fit(lI);
    rep.U = fit(lU);
    rep.K = fit(lK);
    rep.r = fit(lr);
    return rep;
}

}  // namespace ccs
