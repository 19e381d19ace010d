#include "ccspin/frame.hpp"

#include <cmath>
#include <numbers>

namespace ccs {

double FrameChart::a(int i, int j, int k) const {
    const int K = this->K();
    if (!a_.empty()) return a_[(static_cast<size_t>(i) * K + j) * K + k];
    return third_directional(base, E.col(i), E.col(j), E.col(k));
}

FrameChart build_chart(const SpectralReport& report, const ChartOptions& opt) {
    FrameChart ch;
    const Config& c = report.cc.config;
    const double I = moment_of_inertia(c);
    ch.base = c;
    ch.base.x = c.x / std::sqrt(I);
    ch.lambda = potential(ch.base);
    ch.kappa = 2.0 * ch.lambda;
    const Vec& m = ch.base.m;
    ch.E3 = ch.base.x;
    ch.E4 = rot90(ch.E3);

    const int d = static_cast<int>(c.x.size());
    const int K = d - 4;
    std::vector<Vec> cols;
    auto project_out = [&](Vec v) {
        v -= mass_inner(m, v, ch.E3) * ch.E3;
        v -= mass_inner(m, v, ch.E4) * ch.E4;
        for (const Vec& w : cols) v -= mass_inner(m, v, w) * w;
        return v;
    };
    for (const Vec& v0 : opt.explicit_vectors) {
        if (v0.size() != d) throw DimensionError("explicit basis vector has wrong length");
        Vec v = project_out(v0 / mass_norm(m, v0));
        v /= mass_norm(m, v);
        cols.push_back(v);
    }
    ch.explicit_basis = !opt.explicit_vectors.empty();
    for (int j = 2; j < report.basis.cols() && static_cast<int>(cols.size()) < K; ++j) {
        Vec v = project_out(report.basis.col(j));
        const double nv = mass_norm(m, v);
        if (nv < 1e-6) continue;
        cols.push_back(v / nv);
    }
    if (static_cast<int>(cols.size()) != K)
        throw DimensionError("could not complete the chart basis");

    ch.E.resize(d, K);
    for (int j = 0; j < K; ++j) ch.E.col(j) = cols[j];

    const Vec md = mass_diag(m);
    Mat H = hessian_blocks(ch.base);
    H.diagonal() += ch.lambda * md;
    const Mat D = ch.E.transpose() * H * ch.E;
    ch.mu = D.diagonal();
    ch.diag_residual = (D - Mat(D.diagonal().asDiagonal())).cwiseAbs().maxCoeff();

    ch.Q.resize(K, K);
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k) ch.Q(j, k) = mass_inner(m, ch.E.col(j), rot90(ch.E.col(k)));

    for (int j = 0; j < K; ++j) {
        const double mu = ch.mu(j);
        if (std::abs(mu) <= opt.zero_tol * ch.lambda)
            ch.kind.push_back(ModeKind::Zero);
        else if (mu > 0)
            ch.kind.push_back(ModeKind::Positive);
        else if (std::abs(mu + ch.kappa / 16.0) <= 1e-9 * ch.kappa)
            ch.kind.push_back(ModeKind::Critical);
        else if (mu > -ch.kappa / 16.0)
            ch.kind.push_back(ModeKind::Real);
        else
            ch.kind.push_back(ModeKind::Complex);
    }

    if (ch.n() <= 5) {
        ch.a_.assign(static_cast<size_t>(K) * K * K, 0.0);
        for (int i = 0; i < K; ++i)
            for (int j = i; j < K; ++j)
                for (int k = j; k < K; ++k) {
                    const double v = third_directional(ch.base, ch.E.col(i), ch.E.col(j), ch.E.col(k));
                    const int idx[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
                    for (auto& p : idx) ch.a_[(static_cast<size_t>(p[0]) * K + p[1]) * K + p[2]] = v;
                }
    }
    return ch;
}

double z3_of(const Vec& z) {
    const double s = z.squaredNorm();
    if (!(s < 1.0)) throw ChartDomainError("chart coordinates leave the unit ball");
    return std::sqrt(1.0 - s);
}

Vec chart_direction(const FrameChart& ch, const Vec& z) {
    return z3_of(z) * ch.E3 + ch.E * z;
}

ChartPoint to_chart(const FrameChart& ch, const Vec& x_in, std::optional<double> theta_hint) {
    Config c{ch.base.m, x_in};
    c = center_and_project(c);
    const Vec& m = ch.base.m;
    ChartPoint p;
    p.r = mass_norm(m, c.x);
    const double c3 = mass_inner(m, c.x, ch.E3);
    const double c4 = mass_inner(m, c.x, ch.E4);
    if (std::hypot(c3, c4) <= 1e-14 * p.r) throw DegenerateProjection("configuration projects to zero on the base plane");
    double th = std::atan2(c4, c3);
    if (theta_hint) th += 2.0 * std::numbers::pi * std::round((*theta_hint - th) / (2.0 * std::numbers::pi));
    p.theta = th;
    const double ct = std::cos(th), st = std::sin(th);
    const Vec xh = c.x / p.r;
    const Vec ixh = rot90(xh);
    const int K = ch.K();
    p.z.resize(K);
    // <x, e^{i th} E_k> = cos <x, E_k> + sin <x, i E_k> = cos <x,E_k> - sin <i x, E_k>
    for (int k = 0; k < K; ++k)
        p.z(k) = ct * mass_inner(m, xh, ch.E.col(k)) - st * mass_inner(m, ixh, ch.E.col(k));
    return p;
}

ChartPoint to_chart(const FrameChart& ch, const Config& c, std::optional<double> theta_hint) {
    if (c.n() != ch.n()) throw DimensionError("configuration size does not match chart");
    return to_chart(ch, c.x, theta_hint);
}

Config from_chart(const FrameChart& ch, const ChartPoint& p) {
    if (p.z.size() != ch.K()) throw DimensionError("chart point has wrong dimension");
    const Vec v = chart_direction(ch, p.z);
    Config c{ch.base.m, p.r * (std::cos(p.theta) * v + std::sin(p.theta) * rot90(v))};
    return c;
}

ChartPotential potential_in_chart(const FrameChart& ch, const Vec& z) {
    const double z3 = z3_of(z);
    const Vec& m = ch.base.m;
    const int n = ch.base.n();
    // Work with the displacement from the base point so that the gradient keeps its relative
    // accuracy as z -> 0; the base is taken to be an exact central configuration.
    const Vec dx = (-z.squaredNorm() / (1.0 + z3)) * ch.E3 + ch.E * z;
    const Vec x = ch.E3 + dx;
    ChartPotential out;
    out.value = potential(Config{m, x});
    Vec dg = Vec::Zero(2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const Eigen::Vector2d d0(ch.E3(2 * i) - ch.E3(2 * j), ch.E3(2 * i + 1) - ch.E3(2 * j + 1));
            const Eigen::Vector2d dd(dx(2 * i) - dx(2 * j), dx(2 * i + 1) - dx(2 * j + 1));
            const double q0 = d0.squaredNorm();
            const double rel = (2.0 * d0.dot(dd) + dd.squaredNorm()) / q0;
            if (!(rel > -1.0)) throw CollisionError(i, j, 0.0);
            const double inv0 = 1.0 / (q0 * std::sqrt(q0));
            // change of d / |d|^3; the expansion only pays off for small relative changes
            Eigen::Vector2d f;
            if (std::abs(rel) < 0.25) {
                const double dinv = inv0 * std::expm1(-1.5 * std::log1p(rel));
                f = dd * (inv0 + dinv) + d0 * dinv;
            } else {
                const Eigen::Vector2d d = d0 + dd;
                const double q = d.squaredNorm();
                f = d / (q * std::sqrt(q)) - d0 * inv0;
            }
            const double w = m(i) * m(j);
            dg.segment<2>(2 * i) -= w * f;
            dg.segment<2>(2 * j) += w * f;
        }
    // gradient at the base is -lambda M E3, orthogonal to every E column in the mass metric
    const double g3 = -ch.lambda + dg.dot(ch.E3);
    out.grad = ch.E.transpose() * dg - (g3 / z3) * z;
    return out;
}

}  // namespace ccs
