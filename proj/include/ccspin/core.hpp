#pragma once

// Mass-metric geometry of planar N-body configurations.
// A configuration stores masses m (N) and positions x (2N, interleaved x,y).

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct CollisionError : std::runtime_error {
    int j, k;
    double separation;
    CollisionError(int j_, int k_, double sep)
        : std::runtime_error("collision between bodies " + std::to_string(j_) + " and " +
                             std::to_string(k_)),
          j(j_), k(k_), separation(sep) {}
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Config {
    Vec m;  // N masses
    Vec x;  // 2N coordinates
    int n() const { return static_cast<int>(m.size()); }
    Eigen::Vector2d point(int k) const { return x.segment<2>(2 * k); }
};

Config make_config(const std::vector<double>& masses,
                   const std::vector<std::array<double, 2>>& points);
void validate(const Config& c);

// Diagonal of the 2N x 2N mass matrix.
Vec mass_diag(const Vec& m);

double mass_inner(const Vec& m, const Vec& a, const Vec& b);
double mass_inner(const Config& a, const Config& b);
double mass_norm(const Vec& m, const Vec& a);

// Multiplication by i on every point: (x, y) -> (-y, x).
Vec rot90(const Vec& x);
// Translation generators E1 (all x = 1) and E2 (all y = 1).
Vec translation(int n, int axis);

Eigen::Vector2d center_of_mass(const Config& c);
double moment_of_inertia(const Config& c);
double diameter(const Config& c);
Mat pair_table(const Config& c);

double potential(const Config& c);
// Cartesian partials dU/dx.
Vec cartesian_gradient(const Config& c);
// Mass-metric gradient: component k is (1/m_k) dU/dr_k, so a CC reads grad U = -lambda r.
Vec potential_gradient(const Config& c);
// Cartesian Hessian of U (the block matrix B).
Mat hessian_blocks(const Config& c);
// d^3 U (u, v, w) from the closed-form third derivative of 1/|d|.
double third_directional(const Config& c, const Vec& u, const Vec& v, const Vec& w);

Config center_and_project(const Config& c);
Config rotate_scale(const Config& c, double rho, double alpha);
// Same as rotate_scale but for a bare coordinate vector.
Vec rotate_scale(const Vec& x, double rho, double alpha);

}  // namespace ccs
