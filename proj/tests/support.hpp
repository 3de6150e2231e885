#pragma once
// Helpers shared by the unit tests and the acceptance binary.

#include <Eigen/Geometry>

#include <cmath>
#include <random>
#include <vector>

#include "flexlab/core.hpp"
#include "flexlab/exact.hpp"
#include "flexlab/flex_hierarchy.hpp"
#include "flexlab/rigidity.hpp"

namespace flexlab::fixtures {

/// Small integers keep rational arithmetic cheap and the doubles exact.
inline Configuration<double> random_configuration(std::mt19937& rng, std::size_t n) {
    std::uniform_int_distribution<int> coord(-4, 4);
    std::bernoulli_distribution keep(0.6);
    for (;;) {
        std::vector<Vec3d> p(n);
        for (auto& x : p) x = {double(coord(rng)), double(coord(rng)), double(coord(rng))};
        std::vector<Edge> edges;
        bool degenerate = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!keep(rng)) continue;
                if (p[i] == p[j]) degenerate = true;
                edges.push_back({i, j});
            }
        }
        if (edges.empty() || degenerate) continue;
        return Configuration<double>(make_framework(n, std::move(edges)), std::move(p));
    }
}

/// Dyadic entries so every product is exact in double as well.
inline FlexJet<double> random_jet(std::mt19937& rng, std::size_t n, std::size_t order) {
    std::uniform_int_distribution<int> num(-8, 8);
    std::vector<FlexField<double>> fields;
    for (std::size_t k = 0; k < order; ++k) {
        std::vector<Vec3d> v(n);
        for (auto& x : v) x = {num(rng) / 4.0, num(rng) / 4.0, num(rng) / 4.0};
        fields.emplace_back(std::move(v));
    }
    return FlexJet<double>(std::move(fields));
}

/// Non-dyadic variant: generic doubles, so double-mode comparisons see rounding.
inline Configuration<double> random_real_configuration(std::mt19937& rng, std::size_t n) {
    const auto c = random_configuration(rng, n);
    std::uniform_real_distribution<double> wiggle(-0.3, 0.3);
    std::vector<Vec3d> p = c.positions();
    for (auto& x : p) x += Vec3d{wiggle(rng), wiggle(rng), wiggle(rng)};
    return Configuration<double>(c.framework_ptr(), std::move(p));
}

inline FlexJet<double> random_real_jet(std::mt19937& rng, std::size_t n, std::size_t order) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<FlexField<double>> fields;
    for (std::size_t k = 0; k < order; ++k) {
        std::vector<Vec3d> v(n);
        for (auto& x : v) x = {d(rng), d(rng), d(rng)};
        fields.emplace_back(std::move(v));
    }
    return FlexJet<double>(std::move(fields));
}

inline Eigen::Matrix3d random_rotation(std::mt19937& rng) {
    std::normal_distribution<double> g;
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    return q.normalized().toRotationMatrix();
}

inline Vec3d apply(const Eigen::Matrix3d& R, const Vec3d& v) {
    const Eigen::Vector3d w = R * Eigen::Vector3d(v[0], v[1], v[2]);
    return {w(0), w(1), w(2)};
}

inline Configuration<double> transformed(const Configuration<double>& c, const Eigen::Matrix3d& R, const Vec3d& t,
                                         double scale = 1.0) {
    std::vector<Vec3d> p;
    for (const auto& x : c.positions()) p.push_back(scale * apply(R, x) + t);
    return Configuration<double>(c.framework_ptr(), std::move(p));
}

inline FlexField<double> rotated(const FlexField<double>& f, const Eigen::Matrix3d& R) {
    std::vector<Vec3d> v;
    for (const auto& x : f.vectors) v.push_back(apply(R, x));
    return FlexField<double>(std::move(v));
}

/// Largest principal angle (radians) between the column spans of A and B.
/// Measured through its sine, which stays accurate near zero.
inline double max_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.cols() != B.cols()) return M_PI / 2;
    if (A.cols() == 0) return 0.0;
    auto orthonormal = [](const Eigen::MatrixXd& M) -> Eigen::MatrixXd {
        return Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols());
    };
    const Eigen::MatrixXd Qa = orthonormal(A);
    const Eigen::MatrixXd Qb = orthonormal(B);
    const Eigen::MatrixXd residual = Qb - Qa * (Qa.transpose() * Qb);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
    return std::asin(std::clamp(svd.singularValues()(0), 0.0, 1.0));
}

inline Eigen::MatrixXd nontrivial_columns(const FlexSpaceReport& r) {
    Eigen::MatrixXd m(r.flex_basis.rows(), Eigen::Index(r.nontrivial_basis.size()));
    for (std::size_t k = 0; k < r.nontrivial_basis.size(); ++k) m.col(Eigen::Index(k)) = stack(r.nontrivial_basis[k]);
    return m;
}

/// Lagrange interpolation through (t, |x_i(t) - x_j(t)|^2 - |x_i - x_j|^2) at
/// t = 0..deg, in exact arithmetic. Coefficients indexed by power of t.
inline std::vector<Rational> interpolated_length_polynomial(const Configuration<Rational>& c,
                                                            const FlexJet<Rational>& j, const Edge& e) {
    const std::size_t deg = 2 * j.order();
    const auto base = c.edge_vector(e);
    const Rational l0 = dot(base, base);
    std::vector<Rational> ys;
    for (std::size_t t = 0; t <= deg; ++t) {
        const auto d = evaluate_deformation(c, j, Rational(long(t))).edge_vector(e);
        ys.push_back(dot(d, d) - l0);
    }
    std::vector<Rational> coeff(deg + 1, Rational(0));
    for (std::size_t a = 0; a <= deg; ++a) {
        // Basis polynomial prod_{b != a} (t - b) / (a - b), expanded.
        std::vector<Rational> poly{Rational(1)};
        Rational denom(1);
        for (std::size_t b = 0; b <= deg; ++b) {
            if (b == a) continue;
            std::vector<Rational> next(poly.size() + 1, Rational(0));
            for (std::size_t k = 0; k < poly.size(); ++k) {
                next[k + 1] += poly[k];
                next[k] -= Rational(long(b)) * poly[k];
            }
            poly = std::move(next);
            denom *= Rational(long(a) - long(b));
        }
        for (std::size_t k = 0; k <= deg; ++k) coeff[k] += ys[a] * poly[k] / denom;
    }
    return coeff;
}

}  // namespace flexlab::fixtures
