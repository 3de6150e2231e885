#pragma once
// First-order rigidity of bar-joint frameworks.
//
// The rigidity operator R(x) maps a stacked velocity field xi (3 entries per
// vertex) to per-edge values (x_i - x_j).(xi_i - xi_j). Its nullspace is the
// space of first-order flexes, its left nullspace the equilibrium stresses.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "flexlab/core.hpp"
#include "flexlab/exact.hpp"
#include "flexlab/numerics.hpp"

namespace flexlab {

inline Eigen::VectorXd stack(const FlexField<double>& f) {
    Eigen::VectorXd out(Eigen::Index(3 * f.size()));
    for (std::size_t v = 0; v < f.size(); ++v)
        for (std::size_t k = 0; k < 3; ++k) out(Eigen::Index(3 * v + k)) = f[v][k];
    return out;
}

inline FlexField<double> unstack(const Eigen::VectorXd& x) {
    std::vector<Vec3d> out(std::size_t(x.size() / 3));
    for (std::size_t v = 0; v < out.size(); ++v) {
        const auto b = Eigen::Index(3 * v);
        out[v] = {x(b), x(b + 1), x(b + 2)};
    }
    return FlexField<double>(std::move(out));
}

inline Eigen::VectorXd stack(const Stress& s) {
    return Eigen::Map<const Eigen::VectorXd>(s.weights.data(), Eigen::Index(s.weights.size()));
}

/// Flip sign so the entry of largest magnitude (first one on ties) is positive.
inline Eigen::VectorXd canonical_sign(Eigen::VectorXd v) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(arg)) * (1.0 + 1e-9)) arg = i;
    if (v.size() > 0 && v(arg) < 0.0) v = -v;
    return v;
}

struct RigidityOperator {
    Eigen::MatrixXd matrix;  // edge_count x 3 * vertex_count

    Eigen::VectorXd apply(const FlexField<double>& xi) const { return matrix * stack(xi); }
};

inline RigidityOperator assemble_rigidity_operator(const Configuration<double>& c) {
    const auto& f = c.framework();
    RigidityOperator out{Eigen::MatrixXd::Zero(Eigen::Index(f.edge_count()), Eigen::Index(3 * c.vertex_count()))};
    for (std::size_t e = 0; e < f.edge_count(); ++e) {
        const Edge& ed = f.edge(e);
        const Vec3d d = c.edge_vector(ed);
        for (std::size_t k = 0; k < 3; ++k) {
            out.matrix(Eigen::Index(e), Eigen::Index(3 * ed.i + k)) = d[k];
            out.matrix(Eigen::Index(e), Eigen::Index(3 * ed.j + k)) = -d[k];
        }
    }
    return out;
}

/// Same operator over an exact field.
template <class S>
ExactMatrix<S> rigidity_matrix_exact(const Configuration<S>& c) {
    const auto& f = c.framework();
    ExactMatrix<S> m(f.edge_count(), 3 * c.vertex_count());
    for (std::size_t e = 0; e < f.edge_count(); ++e) {
        const Edge& ed = f.edge(e);
        const Vec3<S> d = c.edge_vector(ed);
        for (std::size_t k = 0; k < 3; ++k) {
            m(e, 3 * ed.i + k) = d[k];
            m(e, 3 * ed.j + k) = -d[k];
        }
    }
    return m;
}

struct TrivialMotions {
    Eigen::MatrixXd basis;  // orthonormal columns, 3n x dimension
    std::size_t dimension() const { return std::size_t(basis.cols()); }
};

/// Orthonormalized span of the three translations and three linearized
/// rotations. Dimension is detected, not assumed: 6 in general, 5 for
/// collinear points, 3 for a single point.
inline TrivialMotions trivial_motion_basis(const Configuration<double>& c, const TolerancePolicy& policy = {}) {
    const std::size_t n = c.vertex_count();
    Vec3d centroid;
    for (const auto& p : c.positions()) centroid += p;
    centroid = (1.0 / double(n)) * centroid;

    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(Eigen::Index(3 * n), 6);
    for (std::size_t v = 0; v < n; ++v) {
        const Vec3d p = c.position(v) - centroid;
        for (std::size_t k = 0; k < 3; ++k) {
            gen(Eigen::Index(3 * v + k), Eigen::Index(k)) = 1.0;
            Vec3d axis;
            axis[k] = 1.0;
            const Vec3d w = cross(axis, p);
            for (std::size_t m = 0; m < 3; ++m) gen(Eigen::Index(3 * v + m), Eigen::Index(3 + k)) = w[m];
        }
    }
    const RankRevealing d = decompose(gen, policy);
    return {d.U.leftCols(d.rank())};
}

struct FlexSpaceReport {
    std::size_t trivial_dim = 0;
    std::size_t total_flex_dim = 0;
    std::size_t nontrivial_dim = 0;
    std::vector<FlexField<double>> nontrivial_basis;  // orthonormal, orthogonal to trivial motions
    ToleranceJudgment judgment;
    Eigen::MatrixXd flex_basis;     // orthonormal basis of the whole flex space
    Eigen::MatrixXd trivial_basis;  // orthonormal basis of trivial motions

    bool nonrigid() const { return nontrivial_dim > 0; }
    bool marginal() const { return judgment.marginal; }
};

inline FlexSpaceReport first_order_flex_space(const Configuration<double>& c, const TolerancePolicy& policy = {}) {
    const RigidityOperator R = assemble_rigidity_operator(c);
    const RankRevealing d = decompose(R.matrix, policy);
    FlexSpaceReport out;
    out.judgment = d.judgment;
    out.flex_basis = nullspace_basis(d);
    out.trivial_basis = trivial_motion_basis(c, policy).basis;
    out.total_flex_dim = std::size_t(out.flex_basis.cols());
    out.trivial_dim = std::size_t(out.trivial_basis.cols());

    // Component of the flex space orthogonal to trivial motions. Its singular
    // values are ~1 for genuine directions and ~0 for trivial ones.
    const Eigen::MatrixXd& T = out.trivial_basis;
    const Eigen::MatrixXd projected = out.flex_basis - T * (T.transpose() * out.flex_basis);
    if (projected.cols() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(projected, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        for (Eigen::Index k = 0; k < s.size(); ++k) {
            if (s(k) < 0.5) break;
            out.nontrivial_basis.push_back(unstack(canonical_sign(svd.matrixU().col(k))));
        }
    }
    out.nontrivial_dim = out.nontrivial_basis.size();
    return out;
}

struct StressSpace {
    std::vector<Stress> stresses;  // orthonormal basis of equilibrium stresses
    ToleranceJudgment judgment;

    std::size_t dimension() const { return stresses.size(); }
};

inline StressSpace equilibrium_stress_space(const Configuration<double>& c, const TolerancePolicy& policy = {}) {
    const RankRevealing d = decompose(assemble_rigidity_operator(c).matrix, policy);
    StressSpace out;
    out.judgment = d.judgment;
    const Eigen::MatrixXd W = cokernel_basis(d);
    for (Eigen::Index k = 0; k < W.cols(); ++k) {
        const Eigen::VectorXd w = canonical_sign(W.col(k));
        out.stresses.push_back(Stress{std::vector<double>(w.data(), w.data() + w.size())});
    }
    return out;
}

/// Per-vertex force imbalance sum_j w_ij (x_j - x_i); zero for an equilibrium stress.
inline std::vector<Vec3d> stress_imbalance(const Configuration<double>& c, const Stress& s) {
    std::vector<Vec3d> out(c.vertex_count());
    const auto& f = c.framework();
    for (std::size_t e = 0; e < f.edge_count(); ++e) {
        const Edge& ed = f.edge(e);
        const Vec3d d = c.edge_vector(ed);  // x_i - x_j
        out[ed.i] += (-s.weights[e]) * d;
        out[ed.j] += s.weights[e] * d;
    }
    return out;
}

struct AnchoredFlex {
    FlexField<double> field;
    double anchor_residual = 0.0;  // norm of the field on the anchor vertices
};

/// Adds the trivial motion that best cancels `xi` on the anchor vertices
/// (least squares). For a flex whose restriction to a rigid sub-framework is
/// trivial, the result vanishes on that sub-framework.
inline AnchoredFlex anchor_flex(const Configuration<double>& c, const FlexField<double>& xi,
                                const std::vector<std::size_t>& anchors, const TolerancePolicy& policy = {}) {
    const Eigen::MatrixXd T = trivial_motion_basis(c, policy).basis;
    const Eigen::VectorXd x = stack(xi);
    Eigen::MatrixXd A(Eigen::Index(3 * anchors.size()), T.cols());
    Eigen::VectorXd b(Eigen::Index(3 * anchors.size()));
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        for (Eigen::Index k = 0; k < 3; ++k) {
            const auto row = Eigen::Index(3 * a) + k;
            const auto src = Eigen::Index(3 * anchors[a]) + k;
            A.row(row) = T.row(src);
            b(row) = -x(src);
        }
    }
    const LinearSolveReport ls = least_squares_with_certificate(A, b, policy);
    const Eigen::VectorXd y = x + T * ls.solution;
    double res = 0.0;
    for (auto a : anchors) res += y.segment(Eigen::Index(3 * a), 3).squaredNorm();
    return {unstack(y), std::sqrt(res)};
}

}  // namespace flexlab
