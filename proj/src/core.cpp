#include "ccspin/core.hpp"

#include <cmath>

namespace ccs {

namespace {

// Minimum allowed separation relative to the configuration diameter.
constexpr double kCollisionRel = 1e-12;

void check_pairs(const Config& c) {
    const int n = c.n();
    const double diam = diameter(c);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            const double r = (c.point(j) - c.point(k)).norm();
            if (!(r >= kCollisionRel * diam) || r == 0.0) throw CollisionError(j, k, r);
        }
}

}  // namespace

Config make_config(const std::vector<double>& masses,
                   const std::vector<std::array<double, 2>>& points) {
    if (masses.size() != points.size())
        throw DimensionError("masses and points differ in length");
    Config c;
    c.m = Eigen::Map<const Vec>(masses.data(), static_cast<Eigen::Index>(masses.size()));
    c.x.resize(2 * static_cast<Eigen::Index>(points.size()));
    for (size_t k = 0; k < points.size(); ++k) {
        c.x(2 * k) = points[k][0];
        c.x(2 * k + 1) = points[k][1];
    }
    validate(c);
    return c;
}

void validate(const Config& c) {
    if (c.n() < 2) throw DimensionError("need at least two bodies");
    if (c.x.size() != 2 * c.m.size()) throw DimensionError("coordinate vector must have length 2N");
    for (int k = 0; k < c.n(); ++k)
        if (!(c.m(k) > 0.0) || !std::isfinite(c.m(k)))
            throw std::invalid_argument("masses must be finite and positive");
    if (!c.x.allFinite()) throw std::invalid_argument("non-finite coordinates");
}

Vec mass_diag(const Vec& m) {
    Vec d(2 * m.size());
    for (Eigen::Index k = 0; k < m.size(); ++k) d(2 * k) = d(2 * k + 1) = m(k);
    return d;
}

double mass_inner(const Vec& m, const Vec& a, const Vec& b) {
    if (a.size() != 2 * m.size() || b.size() != a.size())
        throw DimensionError("mass_inner: dimension mismatch");
    double s = 0.0;
    for (Eigen::Index k = 0; k < m.size(); ++k)
        s += m(k) * (a(2 * k) * b(2 * k) + a(2 * k + 1) * b(2 * k + 1));
    return s;
}

double mass_inner(const Config& a, const Config& b) {
    if (a.m.size() != b.m.size() || (a.m - b.m).cwiseAbs().maxCoeff() > 0.0)
        throw DimensionError("mass_inner: configurations carry different masses");
    return mass_inner(a.m, a.x, b.x);
}

double mass_norm(const Vec& m, const Vec& a) { return std::sqrt(mass_inner(m, a, a)); }

Vec rot90(const Vec& x) {
    Vec y(x.size());
    for (Eigen::Index k = 0; k + 1 < x.size(); k += 2) {
        y(k) = -x(k + 1);
        y(k + 1) = x(k);
    }
    return y;
}

Vec translation(int n, int axis) {
    Vec e = Vec::Zero(2 * n);
    for (int k = 0; k < n; ++k) e(2 * k + axis) = 1.0;
    return e;
}

Eigen::Vector2d center_of_mass(const Config& c) {
    Eigen::Vector2d s = Eigen::Vector2d::Zero();
    for (int k = 0; k < c.n(); ++k) s += c.m(k) * c.point(k);
    return s / c.m.sum();
}

double moment_of_inertia(const Config& c) {
    const Eigen::Vector2d rc = center_of_mass(c);
    double s = 0.0;
    for (int k = 0; k < c.n(); ++k) s += c.m(k) * (c.point(k) - rc).squaredNorm();
    return s;
}

double diameter(const Config& c) {
    double d = 0.0;
    for (int j = 0; j < c.n(); ++j)
        for (int k = j + 1; k < c.n(); ++k) d = std::max(d, (c.point(j) - c.point(k)).norm());
    return d;
}

Mat pair_table(const Config& c) {
    Mat r = Mat::Zero(c.n(), c.n());
    for (int j = 0; j < c.n(); ++j)
        for (int k = j + 1; k < c.n(); ++k) r(j, k) = r(k, j) = (c.point(j) - c.point(k)).norm();
    return r;
}

double potential(const Config& c) {
    check_pairs(c);
    double u = 0.0;
    for (int j = 0; j < c.n(); ++j)
        for (int k = j + 1; k < c.n(); ++k)
            u += c.m(j) * c.m(k) / (c.point(j) - c.point(k)).norm();
    return u;
}

Vec cartesian_gradient(const Config& c) {
    check_pairs(c);
    Vec g = Vec::Zero(c.x.size());
    for (int j = 0; j < c.n(); ++j)
        for (int k = j + 1; k < c.n(); ++k) {
            const Eigen::Vector2d d = c.point(j) - c.point(k);
            const double r = d.norm();
            const Eigen::Vector2d f = -c.m(j) * c.m(k) / (r * r * r) * d;
            g.segment<2>(2 * j) += f;
            g.segment<2>(2 * k) -= f;
        }
    return g;
}

Vec potential_gradient(const Config& c) {
    return cartesian_gradient(c).cwiseQuotient(mass_diag(c.m));
}

Mat hessian_blocks(const Config& c) {
    check_pairs(c);
    const int n = c.n();
    Mat B = Mat::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (j == k) continue;
            const Eigen::Vector2d d = c.point(j) - c.point(k);
            const double r2 = d.squaredNorm();
            const double r = std::sqrt(r2);
            const Eigen::Matrix2d b = c.m(j) * c.m(k) / (r2 * r) *
                                      (Eigen::Matrix2d::Identity() - 3.0 * d * d.transpose() / r2);
            B.block<2, 2>(2 * j, 2 * k) = b;
            B.block<2, 2>(2 * j, 2 * j) -= b;
        }
    return B;
}

double third_directional(const Config& c, const Vec& u, const Vec& v, const Vec& w) {
    if (u.size() != c.x.size() || v.size() != c.x.size() || w.size() != c.x.size())
        throw DimensionError("third_directional: direction dimension mismatch");
    check_pairs(c);
    double s = 0.0;
    for (int j = 0; j < c.n(); ++j)
        for (int k = j + 1; k < c.n(); ++k) {
            const Eigen::Vector2d d = c.point(j) - c.point(k);
            const Eigen::Vector2d a = u.segment<2>(2 * j) - u.segment<2>(2 * k);
            const Eigen::Vector2d b = v.segment<2>(2 * j) - v.segment<2>(2 * k);
            const Eigen::Vector2d e = w.segment<2>(2 * j) - w.segment<2>(2 * k);
            const double r2 = d.squaredNorm();
            const double r5 = r2 * r2 * std::sqrt(r2);
            const double da = d.dot(a), db = d.dot(b), de = d.dot(e);
            // d^3 (1/|d|) contracted with (a, b, e)
            const double t = -15.0 * da * db * de / (r5 * r2) +
                             3.0 * (a.dot(b) * de + a.dot(e) * db + b.dot(e) * da) / r5;
            s += c.m(j) * c.m(k) * t;
        }
    return s;
}

Config center_and_project(const Config& c) {
    Config out = c;
    const Eigen::Vector2d rc = center_of_mass(c);
    for (int k = 0; k < c.n(); ++k) out.x.segment<2>(2 * k) -= rc;
    return out;
}

Vec rotate_scale(const Vec& x, double rho, double alpha) {
    if (!(rho > 0.0)) throw std::invalid_argument("rotate_scale: rho must be positive");
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    Vec y(x.size());
    for (Eigen::Index k = 0; k + 1 < x.size(); k += 2) {
        y(k) = rho * (ca * x(k) - sa * x(k + 1));
        y(k + 1) = rho * (sa * x(k) + ca * x(k + 1));
    }
    return y;
}

Config rotate_scale(const Config& c, double rho, double alpha) {
    Config out = c;
    out.x = rotate_scale(c.x, rho, alpha);
    return out;
}

}  // namespace ccs
