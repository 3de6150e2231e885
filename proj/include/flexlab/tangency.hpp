#pragma once
// Curves of nonrigid configurations and the second-order extension they induce.
//
// A first-order flex xi of x is tangent to the nonrigid set when x sits on a
// smooth curve x(r) of nonrigid configurations carrying flexes xi(r) with
// x'(0) = 2 xi(0) and xi(0) = xi. Differentiating R(x(r)) xi(r) = 0 at r = 0
// shows that xi2 = xi'(0) / 2 completes xi to a second-order flex.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flexlab/core.hpp"
#include "flexlab/flex_hierarchy.hpp"
#include "flexlab/numerics.hpp"
#include "flexlab/rigidity.hpp"

namespace flexlab {

enum class CurveCondition { Nonrigidity, FlexFamily, VelocityMatch };

inline const char* condition_label(CurveCondition c) {
    switch (c) {
        case CurveCondition::Nonrigidity: return "(i) nonrigidity";
        case CurveCondition::FlexFamily: return "(ii) flex family";
        case CurveCondition::VelocityMatch: return "(ii) velocity match";
    }
    return "?";
}

struct CurveValidation {
    std::vector<bool> nonrigid_at_each_sample;
    std::vector<FlexSpaceReport> flex_spaces;
    std::vector<double> flex_residuals_along_curve;
    double flex_tolerance = 0.0;
    double velocity_match_error = 0.0;  // |x'(0) - 2 xi(0)|, central difference
    double velocity_tolerance = 0.0;
    double velocity_step = 0.0;
    std::vector<CurveCondition> failed;
    std::vector<std::string> reasons;
    std::vector<std::string> warnings;

    bool valid() const { return failed.empty(); }
    bool failed_on(CurveCondition c) const { return std::find(failed.begin(), failed.end(), c) != failed.end(); }
};

inline double curve_diameter(const ConfigCurve& curve) {
    double d = 0.0;
    for (const auto& s : curve.samples()) d = std::max(d, diameter(s.configuration));
    return d;
}

namespace detail {

inline Eigen::VectorXd stacked_positions(const Configuration<double>& c) {
    return stack(FlexField<double>(c.positions()));
}

inline void require_centered_base(const ConfigCurve& curve) {
    if (curve.size() < 3) {
        throw CurveError(CurveError::Code::TooFewSamples,
                         "curve needs at least 3 samples, has " + std::to_string(curve.size()));
    }
    const std::size_t i0 = curve.base_index();
    if (i0 == 0 || i0 + 1 >= curve.size()) {
        throw CurveError(CurveError::Code::TooFewSamples, "base sample needs neighbors on both sides");
    }
}

}  // namespace detail

inline CurveValidation validate_curve(const ConfigCurve& curve, const TolerancePolicy& policy = {}) {
    detail::require_centered_base(curve);
    CurveValidation out;
    const double diam = curve_diameter(curve);
    out.flex_tolerance = 1e-8 * diam;

    std::size_t bad_rigid = 0;
    std::size_t bad_flex = 0;
    std::optional<std::size_t> first_dim;
    for (const auto& s : curve.samples()) {
        FlexSpaceReport rep = first_order_flex_space(s.configuration, policy);
        const double res = assemble_rigidity_operator(s.configuration).apply(s.flex).norm();
        out.nonrigid_at_each_sample.push_back(rep.nonrigid());
        out.flex_residuals_along_curve.push_back(res);
        if (!rep.nonrigid()) ++bad_rigid;
        if (res > out.flex_tolerance) ++bad_flex;
        if (rep.marginal()) out.warnings.push_back("marginal rank decision at r = " + std::to_string(s.r));
        if (first_dim && *first_dim != rep.nontrivial_dim) {
            out.warnings.push_back("nontrivial flex dimension changes along the curve at r = " + std::to_string(s.r));
        }
        first_dim = rep.nontrivial_dim;
        out.flex_spaces.push_back(std::move(rep));
    }

    const std::size_t i0 = curve.base_index();
    const auto& S = curve.samples();
    const double hm = S[i0].r - S[i0 - 1].r;
    const double hp = S[i0 + 1].r - S[i0].r;
    const Eigen::VectorXd xm = detail::stacked_positions(S[i0 - 1].configuration);
    const Eigen::VectorXd x0 = detail::stacked_positions(S[i0].configuration);
    const Eigen::VectorXd xp = detail::stacked_positions(S[i0 + 1].configuration);
    // Three-point first derivative on a possibly non-uniform stencil.
    const Eigen::VectorXd velocity =
        (-hp / (hm * (hm + hp))) * xm + ((hp - hm) / (hm * hp)) * x0 + (hm / (hp * (hm + hp))) * xp;
    out.velocity_match_error = (velocity - 2.0 * stack(S[i0].flex)).norm();
    out.velocity_step = std::max(hm, hp);
    out.velocity_tolerance = 10.0 * out.velocity_step * out.velocity_step * diam;

    if (bad_rigid > 0) {
        out.failed.push_back(CurveCondition::Nonrigidity);
        out.reasons.push_back(std::to_string(bad_rigid) + " sample(s) are first-order rigid");
    }
    if (bad_flex > 0) {
        out.failed.push_back(CurveCondition::FlexFamily);
        out.reasons.push_back(std::to_string(bad_flex) + " attached field(s) are not first-order flexes");
    }
    if (out.velocity_match_error > out.velocity_tolerance) {
        out.failed.push_back(CurveCondition::VelocityMatch);
        out.reasons.push_back("velocity of the curve at r = 0 differs from twice the attached flex by " +
                              std::to_string(out.velocity_match_error));
    }
    return out;
}

class InvalidCurveError : public std::runtime_error {
public:
    explicit InvalidCurveError(CurveValidation v)
        : std::runtime_error(describe(v)), validation_(std::move(v)) {}
    const CurveValidation& validation() const { return validation_; }

private:
    static std::string describe(const CurveValidation& v) {
        std::string s = "invalid curve:";
        for (std::size_t k = 0; k < v.failed.size(); ++k) s += std::string(" ") + condition_label(v.failed[k]) + " (" + v.reasons[k] + ")";
        return s;
    }
    CurveValidation validation_;
};

struct ConvergenceEntry {
    double h = 0.0;
    double residual = 0.0;
};

struct TangentExtensionResult {
    FlexField<double> xi1;  // attached flex at r = 0
    FlexField<double> xi2;
    double fd_step = 0.0;
    int stencil_order = 2;  // 4 when Richardson extrapolation was applied
    double second_order_residual = 0.0;
    std::vector<ConvergenceEntry> convergence_table;  // ascending h = h0 * 2^m, plain central differences

    FlexJet<double> jet() const { return FlexJet<double>({xi1, xi2}); }
};

/// Least-squares slope of log(residual) against log(h).
inline double convergence_slope(const std::vector<ConvergenceEntry>& table) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(table.size());
    for (const auto& e : table) {
        const double x = std::log(e.h);
        const double y = std::log(e.residual);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline TangentExtensionResult tangent_extension(const ConfigCurve& curve, const TolerancePolicy& policy = {}) {
    CurveValidation v = validate_curve(curve, policy);
    if (!v.valid()) throw InvalidCurveError(std::move(v));

    const auto& S = curve.samples();
    const std::size_t i0 = curve.base_index();
    const Configuration<double>& base = S[i0].configuration;
    TangentExtensionResult out;
    out.xi1 = S[i0].flex;

    auto order2_residual = [&](const FlexField<double>& xi2) {
        return hierarchy_residuals(base, FlexJet<double>({out.xi1, xi2}), 2).per_order[1].norm;
    };

    // Central differences over every symmetric pair r = -h, +h around the base.
    struct Stencil {
        double h;
        Eigen::VectorXd derivative;
    };
    std::vector<Stencil> stencils;
    for (std::size_t m = 1; m <= i0 && i0 + m < S.size(); ++m) {
        const double h = S[i0 + m].r;
        if (std::abs(S[i0 - m].r + h) > 1e-12 * h) continue;
        stencils.push_back({h, (stack(S[i0 + m].flex) - stack(S[i0 - m].flex)) / (2.0 * h)});
    }

    if (stencils.empty()) {
        const double hm = S[i0].r - S[i0 - 1].r;
        const double hp = S[i0 + 1].r - S[i0].r;
        const Eigen::VectorXd d = (-hp / (hm * (hm + hp))) * stack(S[i0 - 1].flex) +
                                  ((hp - hm) / (hm * hp)) * stack(S[i0].flex) +
                                  (hm / (hp * (hm + hp))) * stack(S[i0 + 1].flex);
        stencils.push_back({std::max(hm, hp), d});
    }

    // Table over the halving ladder h0, 2 h0, 4 h0, ... so the slope is read at
    // evenly spaced log steps.
    for (const auto& s : stencils) {
        const double ratio = s.h / stencils.front().h;
        const double ladder = std::exp2(std::round(std::log2(ratio)));
        if (std::abs(ratio - ladder) > 1e-9 * ratio) continue;
        out.convergence_table.push_back({s.h, order2_residual(unstack(0.5 * s.derivative))});
    }

    const Stencil& finest = stencils.front();
    out.fd_step = finest.h;
    Eigen::VectorXd derivative = finest.derivative;
    for (const auto& s : stencils) {
        if (std::abs(s.h - 2.0 * finest.h) <= 1e-12 * s.h) {
            derivative = (4.0 * finest.derivative - s.derivative) / 3.0;
            out.stencil_order = 4;
            break;
        }
    }
    out.xi2 = unstack(0.5 * derivative);
    out.second_order_residual = order2_residual(out.xi2);
    return out;
}

class ContinuationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ContinuationOptions {
    std::size_t max_newton_iterations = 100;
    double min_progress = 0.5;   // fraction of the predicted nontrivial advance that must survive correction
    double min_overlap = 0.9;    // flex transport between adjacent samples
};

namespace detail {

/// Gauss-Newton projection onto the set of configurations with the given
/// squared edge lengths; minimum-norm steps.
inline std::optional<Eigen::VectorXd> project_to_lengths(const FrameworkPtr& f, Eigen::VectorXd y,
                                                          const std::vector<double>& sq_lengths,
                                                          const TolerancePolicy& policy,
                                                          std::size_t max_iterations) {
    double scale = 0.0;
    for (double l : sq_lengths) scale = std::max(scale, l);
    for (std::size_t it = 0; it <= max_iterations; ++it) {
        const Configuration<double> c(f, unstack(y).vectors);
        Eigen::VectorXd g(Eigen::Index(sq_lengths.size()));
        for (std::size_t e = 0; e < sq_lengths.size(); ++e) {
            const Vec3d d = c.edge_vector(f->edge(e));
            g(Eigen::Index(e)) = dot(d, d) - sq_lengths[e];
        }
        if (g.lpNorm<Eigen::Infinity>() <= 1e-13 * scale) return y;
        if (it == max_iterations) break;
        const Eigen::MatrixXd J = 2.0 * assemble_rigidity_operator(c).matrix;
        y += least_squares_with_certificate(J, -g, policy).solution;
    }
    return std::nullopt;
}

}  // namespace detail

/// Numerically follows an edge-length-preserving motion from `c` with initial
/// velocity 2 xi1, `steps` samples of spacing h on each side of r = 0.
/// Predictor: Euler step along 2 xi(r). Corrector: Gauss-Newton back onto the
/// constraint set. The attached flex is transported as the projection of the
/// previous one onto the new flex space, rescaled to constant norm.
inline ConfigCurve make_flexible_motion_curve(const Configuration<double>& c, const FlexField<double>& xi1,
                                              std::size_t steps, double h, const TolerancePolicy& policy = {},
                                              const ContinuationOptions& opts = {}) {
    if (steps == 0 || !(h > 0.0)) throw ModelError("continuation needs steps >= 1 and h > 0");
    require_flex_to_own_order(c, FlexJet<double>({xi1}));
    const FrameworkPtr& f = c.framework_ptr();
    std::vector<double> sq_lengths;
    for (const Edge& e : f->edges()) {
        const Vec3d d = c.edge_vector(e);
        sq_lengths.push_back(dot(d, d));
    }
    const double speed = stack(xi1).norm();

    auto run = [&](double dir) {
        std::vector<CurveSample> out;
        Eigen::VectorXd x = detail::stacked_positions(c);
        Eigen::VectorXd xi = stack(xi1);
        for (std::size_t k = 1; k <= steps; ++k) {
            const Configuration<double> here(f, unstack(x).vectors);
            const Eigen::MatrixXd T = trivial_motion_basis(here, policy).basis;
            const Eigen::VectorXd xi_nt = xi - T * (T.transpose() * xi);

            auto corrected = detail::project_to_lengths(f, x + dir * 2.0 * h * xi, sq_lengths, policy,
                                                        opts.max_newton_iterations);
            if (!corrected) throw ContinuationError("no finite motion found: corrector did not converge");
            if (xi_nt.norm() > 1e-8 * speed) {
                const double progress = dir * (*corrected - x).dot(xi_nt) / (2.0 * h * xi_nt.squaredNorm());
                if (progress < opts.min_progress) {
                    throw ContinuationError("no finite motion found: corrector undid " +
                                            std::to_string(100.0 * (1.0 - progress)) + "% of the predicted step");
                }
            }
            x = *corrected;
            const Configuration<double> next(f, unstack(x).vectors);
            const Eigen::MatrixXd N = nullspace_basis(assemble_rigidity_operator(next).matrix, policy);
            Eigen::VectorXd moved = N * (N.transpose() * xi);
            const double overlap = speed > 0.0 ? moved.norm() / xi.norm() : 1.0;
            if (overlap < opts.min_overlap) {
                throw ContinuationError("no finite motion found: flex transport overlap " + std::to_string(overlap));
            }
            if (speed > 0.0) moved *= xi.norm() / moved.norm();
            xi = moved;
            out.push_back({dir * double(k) * h, next, unstack(xi)});
        }
        return out;
    };

    std::vector<CurveSample> back = run(-1.0);
    std::vector<CurveSample> fwd = run(1.0);
    std::vector<CurveSample> all(back.rbegin(), back.rend());
    all.push_back({0.0, c, xi1});
    all.insert(all.end(), fwd.begin(), fwd.end());
    return ConfigCurve(std::move(all), h);
}

}  // namespace flexlab
