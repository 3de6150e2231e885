#pragma once
// Dense rank-revealing linear algebra shared by every analysis.
//
// All rank decisions go through one TolerancePolicy so that "nonrigid" means
// the same thing everywhere. Decompositions are full SVDs; corpus matrices have
// at most a few hundred columns.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flexlab {

class NumericsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TolerancePolicy {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    double solve_rel_tol = 1e-9;   // solve tolerance = solve_rel_tol * (1 + |b|)
    double marginal_gap = 100.0;   // gap ratios below this flag the judgment

    double solve_tolerance(double rhs_norm) const { return solve_rel_tol * (1.0 + rhs_norm); }
};

struct ToleranceJudgment {
    std::size_t rank = 0;
    std::vector<double> singular_values;  // descending
    double threshold_used = 0.0;
    double gap_ratio = std::numeric_limits<double>::infinity();
    bool marginal = false;
};

/// Full SVD plus the rank decision made under a policy.
struct RankRevealing {
    Eigen::MatrixXd U;  // rows x rows
    Eigen::MatrixXd V;  // cols x cols
    ToleranceJudgment judgment;

    Eigen::Index rows() const { return U.rows(); }
    Eigen::Index cols() const { return V.rows(); }
    Eigen::Index rank() const { return Eigen::Index(judgment.rank); }
};

inline void require_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) throw NumericsError(std::string("non-finite entries in ") + what);
}

inline RankRevealing decompose(const Eigen::MatrixXd& m, const TolerancePolicy& policy) {
    require_finite(m, "matrix");
    RankRevealing out;
    const Eigen::Index r = m.rows();
    const Eigen::Index c = m.cols();
    if (r == 0 || c == 0) {
        out.U = Eigen::MatrixXd::Identity(r, r);
        out.V = Eigen::MatrixXd::Identity(c, c);
        out.judgment.threshold_used = policy.abs_tol;
        return out;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.U = svd.matrixU();
    out.V = svd.matrixV();
    const Eigen::VectorXd& s = svd.singularValues();
    auto& j = out.judgment;
    j.singular_values.assign(s.data(), s.data() + s.size());
    const double largest = s.size() > 0 ? s(0) : 0.0;
    j.threshold_used = std::max(policy.rel_tol * largest * double(std::max(r, c)), policy.abs_tol);
    j.rank = std::size_t(std::count_if(j.singular_values.begin(), j.singular_values.end(),
                                       [&](double x) { return x >= j.threshold_used; }));
    if (j.rank > 0 && j.rank < j.singular_values.size()) {
        const double dropped = j.singular_values[j.rank];
        j.gap_ratio = dropped > 0.0 ? j.singular_values[j.rank - 1] / dropped
                                    : std::numeric_limits<double>::infinity();
    }
    j.marginal = j.gap_ratio < policy.marginal_gap;
    return out;
}

inline ToleranceJudgment numerical_rank(const Eigen::MatrixXd& m, const TolerancePolicy& policy = {}) {
    return decompose(m, policy).judgment;
}

/// Orthonormal columns spanning the right nullspace.
inline Eigen::MatrixXd nullspace_basis(const RankRevealing& d) {
    return d.V.rightCols(d.cols() - d.rank());
}

inline Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& m, const TolerancePolicy& policy = {}) {
    return nullspace_basis(decompose(m, policy));
}

/// Orthonormal columns spanning the left nullspace.
inline Eigen::MatrixXd cokernel_basis(const RankRevealing& d) {
    return d.U.rightCols(d.rows() - d.rank());
}

inline Eigen::MatrixXd cokernel_basis(const Eigen::MatrixXd& m, const TolerancePolicy& policy = {}) {
    return cokernel_basis(decompose(m, policy));
}

enum class Consistency { Solvable, Obstructed };

struct LinearSolveReport {
    Eigen::VectorXd solution;  // minimum-norm least-squares minimizer (always computed)
    double residual_norm = 0.0;
    double tolerance = 0.0;
    double cokernel_projection_norm = 0.0;
    Consistency consistency = Consistency::Solvable;
    std::optional<Eigen::VectorXd> certificate;  // unit cokernel vector, only when obstructed
    ToleranceJudgment judgment;

    bool solvable() const { return consistency == Consistency::Solvable; }
};

/// Minimum-norm least squares with a Fredholm certificate. When b has a
/// component outside the range, the certificate is the unit cokernel
/// direction maximizing |<w, b>|, i.e. the normalized projection of b, with
/// sign chosen so that <w, b> > 0.
inline LinearSolveReport least_squares_with_certificate(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                                                        const TolerancePolicy& policy = {}) {
    if (m.rows() != b.size()) {
        throw NumericsError("dimension mismatch: matrix has " + std::to_string(m.rows()) + " rows, rhs has " +
                            std::to_string(b.size()));
    }
    require_finite(b, "right-hand side");
    const RankRevealing d = decompose(m, policy);
    LinearSolveReport out;
    out.judgment = d.judgment;
    const Eigen::Index k = d.rank();
    const Eigen::VectorXd ub = d.U.leftCols(k).transpose() * b;
    Eigen::VectorXd scaled(k);
    for (Eigen::Index i = 0; i < k; ++i) scaled(i) = ub(i) / d.judgment.singular_values[std::size_t(i)];
    out.solution = d.V.leftCols(k) * scaled;
    out.residual_norm = (m * out.solution - b).norm();
    out.tolerance = policy.solve_tolerance(b.norm());

    const Eigen::MatrixXd W = cokernel_basis(d);
    const Eigen::VectorXd coeffs = W.transpose() * b;
    out.cokernel_projection_norm = coeffs.norm();
    if (out.residual_norm > out.tolerance && out.cokernel_projection_norm > 0.0) {
        out.consistency = Consistency::Obstructed;
        out.certificate = W * (coeffs / out.cokernel_projection_norm);
    }
    return out;
}

}  // namespace flexlab
