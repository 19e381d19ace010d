#include "ccspin/normal_forms.hpp"

#include "ccspin/blowup.hpp"
#include "ccspin/planar.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>

namespace ccs {

using cd = std::complex<double>;

LinearData build_linearization(const Vec& mu, double kappa, double epsilon, double zero_tol,
                               double critical_tol) {
    LinearData L;
    const int K = static_cast<int>(mu.size());
    L.K = K;
    L.kappa = kappa;
    const double sk = std::sqrt(kappa);
    L.epsilon = epsilon > 0 ? epsilon : sk / 8.0;
    L.lambda_diag = mu;
    const double lam = kappa / 2.0;
    for (int k = 0; k < K; ++k) {
        if (std::abs(mu(k)) <= zero_tol * lam) {
            L.kind.push_back(ModeKind::Zero);
            L.lambda_diag(k) = 0.0;
        } else if (std::abs(mu(k) + kappa / 16.0) <= critical_tol * kappa) {
            L.kind.push_back(ModeKind::Critical);
            L.lambda_diag(k) = -kappa / 16.0;
            L.n3_engaged = true;
        } else if (mu(k) > 0) {
            L.kind.push_back(ModeKind::Positive);
        } else if (mu(k) > -kappa / 16.0) {
            L.kind.push_back(ModeKind::Real);
        } else {
            L.kind.push_back(ModeKind::Complex);
        }
    }

    const int D = 2 * K + 1;
    L.A = Mat::Zero(D, D);
    L.A.block(0, K, K, K) = Mat::Identity(K, K);
    L.A.block(K, 0, K, K) = L.lambda_diag.asDiagonal();
    L.A.block(K, K, K, K) = -0.5 * sk * Mat::Identity(K, K);
    L.A(2 * K, 2 * K) = sk;

    L.P = CMat::Zero(D, D);
    L.P_inv_explicit = CMat::Zero(D, D);
    L.C = CMat::Zero(D, D);
    const double eps = L.epsilon;
    for (int k = 0; k < K; ++k) {
        if (L.kind[k] == ModeKind::Critical) {
            const double l3 = -sk / 4.0;
            L.P(k, k) = 1.0;
            L.P(K + k, k) = l3;
            L.P(k, K + k) = 1.0;
            L.P(K + k, K + k) = l3 + eps;
            L.P_inv_explicit(k, k) = 1.0 + l3 / eps;
            L.P_inv_explicit(k, K + k) = -1.0 / eps;
            L.P_inv_explicit(K + k, k) = -l3 / eps;
            L.P_inv_explicit(K + k, K + k) = 1.0 / eps;
            L.C(k, k) = l3;
            L.C(k, K + k) = eps;
            L.C(K + k, K + k) = l3;
            L.nu_plus.push_back(l3);
            L.nu_minus.push_back(l3);
            continue;
        }
        const cd sq = std::sqrt(cd(L.lambda_diag(k) + kappa / 16.0, 0.0));
        const cd np = -sk / 4.0 + sq;
        const cd nm = -sk / 4.0 - sq;
        L.nu_plus.push_back(np);
        L.nu_minus.push_back(nm);
        L.P(k, k) = 1.0;
        L.P(K + k, k) = np;
        L.P(k, K + k) = 1.0;
        L.P(K + k, K + k) = nm;
        L.P_inv_explicit(k, k) = 0.5 + sk / (8.0 * sq);
        L.P_inv_explicit(k, K + k) = 1.0 / (2.0 * sq);
        L.P_inv_explicit(K + k, k) = 0.5 - sk / (8.0 * sq);
        L.P_inv_explicit(K + k, K + k) = -1.0 / (2.0 * sq);
        L.C(k, k) = np;
        L.C(K + k, K + k) = nm;
    }
    L.P(2 * K, 2 * K) = 1.0;
    L.P_inv_explicit(2 * K, 2 * K) = 1.0;
    L.C(2 * K, 2 * K) = sk;
    L.P_inv = L.P.partialPivLu().inverse();
    const CMat diff = L.P_inv * L.A.cast<cd>() * L.P - L.C;
    L.conjugation_residual = diff.norm() / L.A.norm();
    return L;
}

LinearData build_linearization(const FrameChart& ch, double epsilon) {
    return build_linearization(ch.mu, ch.kappa, epsilon);
}

std::vector<cd> spectrum_direct(const LinearData& lin) {
    Eigen::EigenSolver<Mat> es(lin.A, false);
    std::vector<cd> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return out;
}

std::vector<cd> spectrum_predicted(const LinearData& lin) {
    std::vector<cd> out;
    for (int k = 0; k < lin.K; ++k) {
        out.push_back(lin.nu_plus[k]);
        out.push_back(lin.nu_minus[k]);
    }
    out.push_back(std::sqrt(lin.kappa));
    return out;
}

double spectrum_mismatch(const LinearData& lin) {
    // greedy matching of two multisets
    std::vector<cd> a = spectrum_direct(lin), b = spectrum_predicted(lin);
    double worst = 0.0;
    std::vector<bool> used(b.size(), false);
    for (const cd& x : a) {
        double best = 1e300;
        size_t bi = 0;
        for (size_t j = 0; j < b.size(); ++j)
            if (!used[j] && std::abs(x - b[j]) < best) {
                best = std::abs(x - b[j]);
                bi = j;
            }
        used[bi] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

Vec chi_quadratic(const FrameChart& ch, const Vec& y) {
    const int K = ch.K();
    const Vec z = y.head(K), Z = y.segment(K, K);
    const double g = y(2 * K);
    Vec out(K + 1);
    for (int k = 0; k < K; ++k) {
        double s = 0;
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < K; ++j) s += ch.a(i, j, k) * z(i) * z(j);
        out(k) = 0.5 * (s - g * Z(k));
    }
    double m2 = 0;
    for (int k = 0; k < K; ++k) m2 += ch.mu(k) * z(k) * z(k);
    out(K) = 0.5 * g * g + Z.squaredNorm() - 0.5 * m2;
    return out;
}

Vec shifted_rhs_full(const FrameChart& ch, const Vec& y) {
    const int K = ch.K();
    BlowupState s;
    s.z = y.head(K);
    s.Z = y.segment(K, K);
    s.r = 0.0;
    s.Upsilon = std::sqrt(ch.kappa) + y(2 * K);
    const BlowupDerivative d = blowup_rhs(ch, s);
    Vec out(2 * K + 1);
    out.head(K) = d.dz;
    out.segment(K, K) = d.dZ;
    out(2 * K) = d.dUpsilon;
    return out;
}

Vec shifted_rhs_quadratic(const FrameChart& ch, const LinearData& lin, const Vec& y) {
    const int K = ch.K();
    Vec out = lin.A * y;
    const Vec chi = chi_quadratic(ch, y);
    out.segment(K, K) += chi.head(K);
    out(2 * K) += chi(K);
    return out;
}

// ---------------------------------------------------------------------------

CenterData center_manifold_quadratic(const FrameChart& ch, const LinearData& lin) {
    CenterData cdat;
    const int K = ch.K();
    const int D = 2 * K + 1;
    for (int k = 0; k < K; ++k)
        if (lin.kind[k] == ModeKind::Zero) cdat.center.push_back(k);
    cdat.n0 = static_cast<int>(cdat.center.size());
    if (cdat.n0 == 0) throw EmptyCenter();
    for (int q = 0; q < D; ++q)
        if (std::find(cdat.center.begin(), cdat.center.end(), q) == cdat.center.end())
            cdat.hyperbolic.push_back(q);
    const int n0 = cdat.n0;
    for (int i = 0; i < n0; ++i)
        for (int j = i; j < n0; ++j) cdat.pairs.emplace_back(i, j);
    const int np = static_cast<int>(cdat.pairs.size());
    const int nh = static_cast<int>(cdat.hyperbolic.size());

    CMat Chh(nh, nh);
    for (int a = 0; a < nh; ++a)
        for (int b = 0; b < nh; ++b) Chh(a, b) = lin.C(cdat.hyperbolic[a], cdat.hyperbolic[b]);
    const auto Chh_lu = Chh.partialPivLu();

    cdat.H = CMat::Zero(D, np);
    cdat.c.assign(n0, Mat::Zero(n0, n0));
    for (int p = 0; p < np; ++p) {
        const int ci = cdat.center[cdat.pairs[p].first];
        const int cj = cdat.center[cdat.pairs[p].second];
        // forcing in y-space for the monomial u_i u_j
        CVec f = CVec::Zero(D);
        for (int l = 0; l < K; ++l) f(K + l) = (ci == cj ? 0.5 : 1.0) * ch.a(ci, cj, l);
        const CVec g = lin.P_inv * f;
        CVec gh(nh);
        for (int a = 0; a < nh; ++a) gh(a) = g(cdat.hyperbolic[a]);
        const CVec h = -Chh_lu.solve(gh);
        for (int a = 0; a < nh; ++a) cdat.H(cdat.hyperbolic[a], p) = h(a);
        const int i = cdat.pairs[p].first, j = cdat.pairs[p].second;
        for (int k = 0; k < n0; ++k) {
            const double v = g(cdat.center[k]).real();
            if (i == j)
                cdat.c[k](i, i) = v;
            else
                cdat.c[k](i, j) = cdat.c[k](j, i) = 0.5 * v;
        }
    }
    if (n0 == 2) {
        cdat.planar = true;
        cdat.c_flow = {cdat.c[0](0, 0), cdat.c[0](0, 1), cdat.c[0](1, 1), cdat.c[1](1, 1)};
        for (int i = 0; i < 4; ++i) cdat.c_reduced[i] = -cdat.c_flow[i];
    }
    return cdat;
}

double closed_form_unstable_coefficient(const FrameChart& ch, int k, int i, int j) {
    const double sk = std::sqrt(ch.kappa);
    const double sq = std::sqrt(ch.mu(k) + ch.kappa / 16.0);
    const double tm = -sk / 4.0 + sq;
    const double mult = (i == j) ? 1.0 : 2.0;
    return mult * ch.a(i, j, k) / (4.0 * tm * sq);
}

double center_residual(const FrameChart& ch, const LinearData& lin, const CenterData& cdat,
                       const Vec& u) {
    const int K = ch.K();
    const int D = 2 * K + 1;
    const int np = static_cast<int>(cdat.pairs.size());
    Vec mono(np);
    for (int p = 0; p < np; ++p) mono(p) = u(cdat.pairs[p].first) * u(cdat.pairs[p].second);
    CVec q = cdat.H * mono.cast<cd>();
    for (int i = 0; i < cdat.n0; ++i) q(cdat.center[i]) = u(i);
    const Vec y = (lin.P * q).real();
    const CVec qd = lin.P_inv * shifted_rhs_full(ch, y).cast<cd>();
    CVec dmono(np);
    for (int p = 0; p < np; ++p) {
        const int i = cdat.pairs[p].first, j = cdat.pairs[p].second;
        dmono(p) = u(i) * qd(cdat.center[j]) + u(j) * qd(cdat.center[i]);
    }
    const CVec pred = cdat.H * dmono;
    double r = 0;
    for (int h : cdat.hyperbolic) r = std::max(r, std::abs(qd(h) - pred(h)));
    (void)D;
    return r;
}

double discriminant(double a555, double a556, double a566, double a666) {
    return a555 * a555 * a666 * a666 - 6.0 * a555 * a556 * a566 * a666 +
           4.0 * a555 * a566 * a566 * a566 + 4.0 * a556 * a556 * a556 * a666 -
           3.0 * a556 * a556 * a566 * a566;
}

double resultant4(double c1, double c2, double c3, double c4) {
    Eigen::Matrix4d M;
    M << c1, 2 * c2, c3, 0, 0, c1, 2 * c2, c3, c2, 2 * c3, c4, 0, 0, c2, 2 * c3, c4;
    return M.determinant();
}

const char* to_string(SpinCase c) {
    switch (c) {
        case SpinCase::Nondegenerate: return "Nondegenerate";
        case SpinCase::DegOne: return "DegOne";
        case SpinCase::DegTwo: return "DegTwo";
        case SpinCase::Undecided: return "Undecided";
    }
    return "?";
}

SpinVerdict spin_verdict(const SpectralReport& report, const FrameChart& ch, double disc_tol) {
    SpinVerdict v;
    v.n0 = report.partition.n0;
    if (v.n0 == 0) {
        v.kind = SpinCase::Nondegenerate;
        v.pass = true;
        return v;
    }
    if (v.n0 == 1) {
        v.kind = SpinCase::DegOne;
        v.pass = true;
        return v;
    }
    if (v.n0 >= 3) {
        v.kind = SpinCase::Undecided;
        v.reason = "n0_ge_3";
        return v;
    }
    const LinearData lin = build_linearization(ch);
    const CenterData cdat = center_manifold_quadratic(ch, lin);
    if (cdat.n0 != 2) {
        v.kind = SpinCase::Undecided;
        v.reason = "chart_partition_mismatch";
        return v;
    }
    const int i = cdat.center[0], j = cdat.center[1];
    v.a = {ch.a(i, i, i), ch.a(i, i, j), ch.a(i, j, j), ch.a(j, j, j)};
    v.c = cdat.c_flow;
    double amax = 0;
    for (double x : v.a) amax = std::max(amax, std::abs(x));
    v.discriminant = discriminant(v.a[0], v.a[1], v.a[2], v.a[3]);
    if (amax == 0.0) {
        v.kind = SpinCase::Undecided;
        v.reason = "all_tested_orders_zero";
        return v;
    }
    v.discriminant_normalized = v.discriminant / std::pow(amax, 4);
    if (std::abs(v.discriminant_normalized) <= disc_tol) {
        v.kind = SpinCase::Undecided;
        v.reason = "zero_discriminant";
        return v;
    }
    v.kind = SpinCase::DegTwo;
    v.pass = true;
    const PlanarSystem sys = planar_from_c(v.c);
    const PolarForms pf = polar_forms(sys);
    try {
        for (double th : characteristic_directions(pf.Psi)) {
            const double phi = eval(pf.Phi, th);
            if (phi > 0) {
                v.theta0.push_back(th);
                v.phi_at_theta0.push_back(phi);
            }
        }
    } catch (const IdenticallyZero&) {
    }
    return v;
}

// ---------------------------------------------------------------------------

namespace {

void enumerate(int n, int order, std::vector<int>& cur, int pos, int left,
               std::vector<std::vector<int>>& out) {
    if (pos == n - 1) {
        cur[pos] = left;
        out.push_back(cur);
        return;
    }
    for (int v = left; v >= 0; --v) {
        cur[pos] = v;
        enumerate(n, order, cur, pos + 1, left - v, out);
    }
}

}  // namespace

std::vector<Resonance> resonance_scan(const std::vector<cd>& eigs, int max_order, double tol,
                                      double near_tol) {
    if (max_order > 12) throw std::invalid_argument("resonance_scan: max_order must be <= 12");
    const int n = static_cast<int>(eigs.size());
    std::vector<Resonance> all;
    if (n == 0 || max_order < 2) return all;
    std::vector<std::vector<Resonance>> shells(max_order + 1);
    tbb::parallel_for(2, max_order + 1, [&](int order) {
        std::vector<std::vector<int>> idx;
        std::vector<int> cur(n);
        enumerate(n, order, cur, 0, order, idx);
        for (const auto& al : idx) {
            cd s = 0;
            double mag = 0;
            for (int j = 0; j < n; ++j) {
                s += static_cast<double>(al[j]) * eigs[j];
                mag += al[j] * std::abs(eigs[j]);
            }
            for (int k = 0; k < n; ++k) {
                const double denom = std::max({std::abs(eigs[k]), mag, 1e-300});
                const double res = std::abs(eigs[k] - s) / denom;
                if (res <= near_tol) shells[order].push_back({k, al, order, res, res > tol});
            }
        }
    });
    for (auto& sh : shells) all.insert(all.end(), sh.begin(), sh.end());
    return all;
}

}  // namespace ccs
