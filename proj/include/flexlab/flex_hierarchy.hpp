#pragma once
// Higher-order flexes of frameworks.
//
// For the deformation x + 2 t xi(1) + ... + 2 t^n xi(n), the order-k equation
// on edge (i, j) reads
//
//     (x_i - x_j).(d xi(k)) + sum_{m=1}^{k-1} (d xi(m)).(d xi(k-m)) = 0,
//
// with d xi = xi_i - xi_j. Given a jet satisfying orders 1..k, the next field
// solves the linear system R(x) xi(k+1) = -b; it exists iff b is orthogonal to
// every equilibrium stress.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "flexlab/core.hpp"
#include "flexlab/numerics.hpp"
#include "flexlab/rigidity.hpp"

namespace flexlab {

template <class S>
struct OrderResidual {
    std::size_t order = 0;
    std::vector<S> values;  // one per edge, canonical edge order
    double norm = 0.0;
};

template <class S>
struct HierarchyResidual {
    std::vector<OrderResidual<S>> per_order;
    std::size_t max_order_checked = 0;

    double max_norm() const {
        double m = 0.0;
        for (const auto& r : per_order) m = std::max(m, r.norm);
        return m;
    }
};

/// Quadratic part of the order-k equation: sum_{m=1}^{k-1} (d xi(m)).(d xi(k-m)).
template <class S>
S hierarchy_coupling(const FlexJet<S>& j, std::size_t k, const Edge& e) {
    S acc(0);
    for (std::size_t m = 1; m < k; ++m) acc += dot(j[m].edge_difference(e), j[k - m].edge_difference(e));
    return acc;
}

template <class S>
HierarchyResidual<S> hierarchy_residuals(const Configuration<S>& c, const FlexJet<S>& j, std::size_t up_to) {
    require_sized(c, j);
    if (up_to > j.order()) {
        throw ModelError("jet of order " + std::to_string(j.order()) + " cannot be checked to order " +
                         std::to_string(up_to));
    }
    HierarchyResidual<S> out;
    out.max_order_checked = up_to;
    const auto& edges = c.framework().edges();
    for (std::size_t k = 1; k <= up_to; ++k) {
        OrderResidual<S> r;
        r.order = k;
        double sq = 0.0;
        for (const Edge& e : edges) {
            S val = dot(c.edge_vector(e), j[k].edge_difference(e)) + hierarchy_coupling(j, k, e);
            const double d = to_double(val);
            sq += d * d;
            r.values.push_back(std::move(val));
        }
        r.norm = std::sqrt(sq);
        out.per_order.push_back(std::move(r));
    }
    return out;
}

/// Input jet failed the residual gate; carries the offending order and value.
class PreconditionError : public std::runtime_error {
public:
    PreconditionError(std::size_t order, double residual, double gate)
        : std::runtime_error("input is not a flex to order " + std::to_string(order) + ": residual " +
                             std::to_string(residual) + " exceeds gate " + std::to_string(gate)),
          order_(order),
          residual_(residual),
          gate_(gate) {}
    std::size_t order() const { return order_; }
    double residual() const { return residual_; }
    double gate() const { return gate_; }

private:
    std::size_t order_;
    double residual_;
    double gate_;
};

enum class ExtensionStatus { Extended, Obstructed };

struct ExtensionReport {
    ExtensionStatus status = ExtensionStatus::Extended;
    std::size_t target_order = 0;              // order of the field that was solved for
    std::optional<FlexField<double>> new_field;  // when extended
    std::optional<Stress> certificate;           // unit norm, when obstructed
    double stress_energy = 0.0;                  // <certificate, b> when obstructed
    LinearSolveReport solve_report;

    bool extended() const { return status == ExtensionStatus::Extended; }
};

inline double precondition_gate(const Configuration<double>& c) { return 1e-8 * diameter(c); }

/// Per-edge quadratic load b_e = sum_{m=1}^{k} (d xi(m)).(d xi(k+1-m)).
inline Eigen::VectorXd extension_load(const Configuration<double>& c, const FlexJet<double>& j) {
    const auto& edges = c.framework().edges();
    Eigen::VectorXd b(Eigen::Index(edges.size()));
    const std::size_t next = j.order() + 1;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        double acc = 0.0;
        for (std::size_t m = 1; m < next; ++m)
            acc += dot(j[m].edge_difference(edges[e]), j[next - m].edge_difference(edges[e]));
        b(Eigen::Index(e)) = acc;
    }
    return b;
}

inline void require_flex_to_own_order(const Configuration<double>& c, const FlexJet<double>& j) {
    const double gate = precondition_gate(c);
    const auto res = hierarchy_residuals(c, j, j.order());
    for (const auto& r : res.per_order) {
        if (r.norm > gate) throw PreconditionError(r.order, r.norm, gate);
    }
}

/// Solve for xi(k+1) given a jet that is a flex to its own order k.
inline ExtensionReport extend_one_order(const Configuration<double>& c, const FlexJet<double>& j,
                                        const TolerancePolicy& policy = {}) {
    require_sized(c, j);
    require_flex_to_own_order(c, j);
    const RigidityOperator R = assemble_rigidity_operator(c);
    const Eigen::VectorXd b = extension_load(c, j);

    ExtensionReport out;
    out.target_order = j.order() + 1;
    out.solve_report = least_squares_with_certificate(R.matrix, -b, policy);
    if (out.solve_report.solvable()) {
        out.status = ExtensionStatus::Extended;
        out.new_field = unstack(out.solve_report.solution);
    } else {
        out.status = ExtensionStatus::Obstructed;
        // The solver's certificate is aligned with -b; flip so <w, b> > 0.
        const Eigen::VectorXd w = -*out.solve_report.certificate;
        out.certificate = Stress{std::vector<double>(w.data(), w.data() + w.size())};
        out.stress_energy = w.dot(b);
    }
    return out;
}

struct GreedyExtension {
    FlexJet<double> jet;           // longest jet achieved
    ExtensionReport last_report;   // first obstruction, or the final successful step
    std::size_t requested_order = 0;

    bool reached() const { return jet.order() >= requested_order; }
};

/// Repeated extend_one_order until `max_order` is reached or a step is obstructed.
/// Each step takes the minimum-norm solution; a different choice at a lower
/// order could in principle unblock a later one, which this does not explore.
inline GreedyExtension extend_greedily(const Configuration<double>& c, const FlexField<double>& xi1,
                                       std::size_t max_order, const TolerancePolicy& policy = {}) {
    GreedyExtension out{FlexJet<double>({xi1}), {}, max_order};
    require_sized(c, out.jet);
    require_flex_to_own_order(c, out.jet);
    while (out.jet.order() < max_order) {
        out.last_report = extend_one_order(c, out.jet, policy);
        if (!out.last_report.extended()) break;
        out.jet = out.jet.extended(*out.last_report.new_field);
    }
    return out;
}

}  // namespace flexlab
