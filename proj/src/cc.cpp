#include "ccspin/cc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ccs {

double cc_residual(const Config& c, double lambda) {
    return (potential_gradient(c) + lambda * c.x).norm();
}

CentralConfiguration exact_cc(const Config& c) {
    validate(c);
    CentralConfiguration cc;
    cc.config = center_and_project(c);
    cc.lambda = potential(cc.config) / moment_of_inertia(cc.config);
    cc.residual = cc_residual(cc.config, cc.lambda);
    cc.iterations = 0;
    return cc;
}

CentralConfiguration solve_cc(const Config& seed_in, const SolveOptions& opt) {
    validate(seed_in);
    const int n = seed_in.n();
    const int d = 2 * n;
    Config c = center_and_project(seed_in);
    const double I0 = moment_of_inertia(c);
    if (!(I0 > 0.0)) throw CollisionError(0, 1, 0.0);
    const double target_I = opt.normalize ? 1.0 : I0;
    c.x *= std::sqrt(target_I / I0);

    const Vec md = mass_diag(c.m);
    const Vec gauge = md.cwiseProduct(rot90(c.x));  // row for <r, i seed> = 0
    double lambda = potential(c) / moment_of_inertia(c);

    // Residual vector: grad U + lambda x (2N), I - target, phase, two COM rows.
    auto residual_vec = [&](const Vec& x, double lam) {
        Config t{c.m, x};
        Vec F(d + 4);
        F.head(d) = potential_gradient(t) + lam * x;
        F(d) = mass_inner(c.m, x, x) - target_I;
        F(d + 1) = gauge.dot(x);
        F(d + 2) = md.dot(x.cwiseProduct(translation(n, 0)));
        F(d + 3) = md.dot(x.cwiseProduct(translation(n, 1)));
        return F;
    };

    int it = 0;
    Vec F = residual_vec(c.x, lambda);
    double res = cc_residual(c, lambda);
    while (res > opt.tol || F.tail(4).cwiseAbs().maxCoeff() > opt.tol) {
        if (it >= opt.max_iter) throw NoConvergence(it, res);
        Config t{c.m, c.x};
        Mat J = Mat::Zero(d + 4, d + 1);
        J.topLeftCorner(d, d) = md.cwiseInverse().asDiagonal() * hessian_blocks(t);
        J.topLeftCorner(d, d).diagonal().array() += lambda;
        J.col(d).head(d) = c.x;
        J.row(d).head(d) = 2.0 * md.cwiseProduct(c.x).transpose();
        J.row(d + 1).head(d) = gauge.transpose();
        J.row(d + 2).head(d) = md.cwiseProduct(translation(n, 0)).transpose();
        J.row(d + 3).head(d) = md.cwiseProduct(translation(n, 1)).transpose();
        const Vec step = J.colPivHouseholderQr().solve(-F);
        c.x += step.head(d);
        lambda += step(d);
        ++it;
        F = residual_vec(c.x, lambda);
        res = cc_residual(c, lambda);
        if (!std::isfinite(res)) throw NoConvergence(it, res);
    }
    // keep <r, seed> > 0 (the phase row also admits the antipodal solution)
    if (mass_inner(c.m, c.x, center_and_project(seed_in).x) < 0.0) c.x = -c.x;

    CentralConfiguration out;
    out.config = c;
    out.lambda = potential(c) / moment_of_inertia(c);
    out.residual = cc_residual(c, out.lambda);
    out.iterations = it;
    return out;
}

const char* to_string(ModeKind k) {
    switch (k) {
        case ModeKind::Zero: return "zero";
        case ModeKind::Positive: return "positive";
        case ModeKind::Real: return "real";
        case ModeKind::Complex: return "complex";
        case ModeKind::Critical: return "critical";
    }
    return "?";
}

Mat cc_operator(const Config& c, double lambda) {
    Mat S = mass_diag(c.m).cwiseInverse().asDiagonal() * hessian_blocks(c);
    S.diagonal().array() += lambda;
    return S;
}

namespace {

// Orthonormal (Euclidean) basis of the complement of the columns of V.
Mat complement_basis(const Mat& V) {
    const int d = static_cast<int>(V.rows());
    Eigen::HouseholderQR<Mat> qr(V);
    Mat Q = qr.householderQ() * Mat::Identity(d, d);
    return Q.rightCols(d - V.cols());
}

void fix_sign(Eigen::Ref<Vec> v) {
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > 1e-9 * scale) {
            if (v(i) < 0) v = -v;
            return;
        }
}

}  // namespace

SpectralReport classify(const CentralConfiguration& cc, const ClassifyOptions& opt) {
    const Config& c = cc.config;
    const int n = c.n();
    const int d = 2 * n;
    SpectralReport rep;
    rep.cc = cc;
    rep.I = moment_of_inertia(c);
    rep.lambda = potential(c) / rep.I;
    rep.kappa = 2.0 * rep.lambda;
    rep.lambda_unit = rep.lambda * std::pow(rep.I, 1.5);
    rep.kappa_unit = 2.0 * rep.lambda_unit;

    const Vec md = mass_diag(c.m);
    const Vec sq = md.cwiseSqrt();
    const Vec isq = sq.cwiseInverse();

    Mat T = isq.asDiagonal() * hessian_blocks(c) * isq.asDiagonal();
    T = 0.5 * (T + T.transpose());
    T.diagonal().array() += rep.lambda;

    const double rn = mass_norm(c.m, c.x);
    const Vec e3 = c.x / rn;
    const Vec e4 = rot90(e3);
    Mat V(d, 4);
    V.col(0) = sq.cwiseProduct(translation(n, 0));
    V.col(1) = sq.cwiseProduct(translation(n, 1));
    V.col(2) = sq.cwiseProduct(e3);
    V.col(3) = sq.cwiseProduct(e4);
    const Mat C = complement_basis(V);
    Mat R = C.transpose() * T * C;
    R = 0.5 * (R + R.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(R);

    const int k = d - 4;
    rep.eig_operator = es.eigenvalues();
    rep.mu = std::sqrt(rep.I) * rep.eig_operator;
    rep.mu_unit = rep.I * rep.mu;
    rep.basis.resize(d, d - 2);
    rep.basis.col(0) = e3;
    rep.basis.col(1) = e4;
    for (int j = 0; j < k; ++j) {
        Vec v = isq.cwiseProduct(C * es.eigenvectors().col(j));
        v /= mass_norm(c.m, v);
        fix_sign(v);
        rep.basis.col(2 + j) = v;
    }

    const double kap = rep.kappa_unit;
    const double skap = std::sqrt(kap);
    for (int j = 0; j < k; ++j) {
        const double mu = rep.mu_unit(j);
        ModeKind kind;
        if (std::abs(mu) <= opt.zero_tol * rep.lambda_unit) {
            kind = ModeKind::Zero;
            ++rep.partition.n0;
        } else if (mu > 0) {
            kind = ModeKind::Positive;
            ++rep.partition.np;
        } else if (std::abs(mu + kap / 16.0) <= opt.critical_tol * kap) {
            kind = ModeKind::Critical;
            ++rep.partition.n3;
        } else if (mu > -kap / 16.0) {
            kind = ModeKind::Real;
            ++rep.partition.n1;
        } else {
            kind = ModeKind::Complex;
            ++rep.partition.n2;
        }
        rep.kind.push_back(kind);
        rep.tilde_mu.push_back(-skap / 4.0 + std::sqrt(std::complex<double>(mu + kap / 16.0, 0.0)));
    }

    std::ostringstream note;
    note.precision(17);
    note << "mu_j = sqrt(I) * eigenvalue of (lambda Id + M^-1 B) on the complement of "
            "{E1, E2, r0, i r0}; I = "
         << rep.I << "; partition and tilde_mu use I = 1 values (mu_unit = I * mu, lambda_unit = "
         << "lambda * I^1.5)";
    rep.scale_note = note.str();
    return rep;
}

int bordered_nullity(const CentralConfiguration& cc, double zero_tol) {
    const Config& c = cc.config;
    const double I = moment_of_inertia(c);
    const double lambda = potential(c) / I;
    const Vec md = mass_diag(c.m);
    const Vec isq = md.cwiseSqrt().cwiseInverse();
    const Vec e4 = rot90(c.x) / std::sqrt(I);
    const Vec Me4 = md.cwiseProduct(e4);
    Mat H = hessian_blocks(c) + lambda * Mat(md.asDiagonal()) + lambda * Me4 * Me4.transpose();
    H = isq.asDiagonal() * H * isq.asDiagonal();
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    // the remaining directions E1, E2, r0 carry eigenvalues lambda, lambda, 3 lambda, so no
    // kernel is forced once i r0 is bordered
    int count = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) <= zero_tol * lambda) ++count;
    return count;
}

ManifoldDimension collision_manifold_dimension(const SpectralReport& report) {
    const auto& p = report.partition;
    if (p.n0 == 0) return {p.np + 8, false};
    return {p.n0 + p.np + 8, true};
}

}  // namespace ccs
