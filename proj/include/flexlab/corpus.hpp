#pragma once
// Built-in example corpus. Everything is generated in code so tests need no
// files on disk.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flexlab/core.hpp"
#include "flexlab/smooth_surface.hpp"

namespace flexlab::corpus {

/// Scaled so the subdivision vertex (the face centroid) has integer coordinates.
inline Configuration<double> tetrahedron() {
    return Configuration<double>(make_framework(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}),
                                 {{0, 0, 0}, {3, 3, 0}, {3, 0, 3}, {0, 3, 3}});
}

/// Tetrahedron whose face (1, 2, 3) is split at its centroid, vertex 4.
inline Configuration<double> subdivided_tetrahedron() {
    return Configuration<double>(
        make_framework(5, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {1, 4}, {2, 4}, {3, 4}}),
        {{0, 0, 0}, {3, 3, 0}, {3, 0, 3}, {0, 3, 3}, {2, 2, 2}});
}

inline constexpr std::size_t kSubdivisionVertex = 4;
inline const Vec3d kSubdividedFaceNormal{1.0, 1.0, 1.0};  // not normalized
inline const Vec3d kInPlaneDirection{1.0, -1.0, 0.0};

/// Field moving only the subdivision vertex, along the face normal.
inline FlexField<double> perpendicular_flex() {
    auto f = FlexField<double>::zero(5);
    f.vectors[kSubdivisionVertex] = kSubdividedFaceNormal;
    return f;
}

/// Two triangles (0, 1, 2) and (0, 1, 3) sharing the axis edge (0, 1) along x.
inline FrameworkPtr hinge_framework() { return make_framework(4, {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}}); }

/// Hinge with the free wing vertex rotated by `angle` about the axis; angle 0
/// gives a right dihedral angle.
inline Configuration<double> hinge_at(double angle) {
    return Configuration<double>(hinge_framework(),
                                 {{0, 0, 0}, {2, 0, 0}, {1, 1, 0}, {1, -std::sin(angle), std::cos(angle)}});
}

inline Configuration<double> hinge() { return hinge_at(0.0); }

/// Velocity of vertex 3 per unit angle.
inline FlexField<double> hinge_angular_velocity(double angle) {
    auto f = FlexField<double>::zero(4);
    f.vectors[3] = {0.0, -std::cos(angle), -std::sin(angle)};
    return f;
}

/// Fold angle phi(r) = a r + b r^2 + c r^3.
struct FoldParametrization {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;

    double angle(double r) const { return ((c * r + b) * r + a) * r; }
    double rate(double r) const { return (3.0 * c * r + 2.0 * b) * r + a; }
    double acceleration(double r) const { return 6.0 * c * r + 2.0 * b; }
};

/// Analytic folding curve of the hinge, sampled at r = k h for |k| <= half_count,
/// with xi(r) = x'(r) / 2.
inline ConfigCurve hinge_fold_curve(double h = 1.25e-3, std::size_t half_count = 8, FoldParametrization p = {}) {
    std::vector<CurveSample> s;
    for (long k = -long(half_count); k <= long(half_count); ++k) {
        const double r = double(k) * h;
        const double phi = p.angle(r);
        auto flex = hinge_angular_velocity(phi);
        flex.vectors[3] = (0.5 * p.rate(r)) * flex.vectors[3];
        s.push_back({r, hinge_at(phi), flex});
    }
    return ConfigCurve(std::move(s), h);
}

/// Analytic second field of the fold jet: xi2 = x''(0) / 4.
inline FlexField<double> hinge_fold_xi2(FoldParametrization p = {}) {
    // x3(r) = (1, -sin phi, cos phi); x3'' = phi'' (0, -cos, -sin) + phi'^2 (0, sin, -cos) at phi = 0.
    auto f = FlexField<double>::zero(4);
    const double a = p.rate(0.0);
    const double acc = p.acceleration(0.0);
    f.vectors[3] = {0.0, -acc / 4.0, -a * a / 4.0};
    return f;
}

/// Interior vertex slides inside the subdivided face while carrying the
/// perpendicular flex: every sample is nonrigid, but the motion is not a flex.
inline ConfigCurve fig1_green_curve(double h = 1e-2, std::size_t half_count = 2) {
    const auto base = subdivided_tetrahedron();
    std::vector<CurveSample> s;
    for (long k = -long(half_count); k <= long(half_count); ++k) {
        const double r = double(k) * h;
        auto p = base.positions();
        p[kSubdivisionVertex] += r * kInPlaneDirection;
        s.push_back({r, Configuration<double>(base.framework_ptr(), p), perpendicular_flex()});
    }
    return ConfigCurve(std::move(s), h);
}

/// x(r) = x + 2 r tau with xi(r) = tau.
inline ConfigCurve translation_curve(const Configuration<double>& c, const Vec3d& tau, double h = 1e-2,
                                     std::size_t half_count = 2) {
    std::vector<CurveSample> s;
    const FlexField<double> field(std::vector<Vec3d>(c.vertex_count(), tau));
    for (long k = -long(half_count); k <= long(half_count); ++k) {
        const double r = double(k) * h;
        auto p = c.positions();
        for (auto& x : p) x += (2.0 * r) * tau;
        s.push_back({r, Configuration<double>(c.framework_ptr(), p), field});
    }
    return ConfigCurve(std::move(s), h);
}

/// x(r) = x with zero attached flexes.
inline ConfigCurve constant_curve(const Configuration<double>& c, double h = 1e-2, std::size_t half_count = 2) {
    std::vector<CurveSample> s;
    for (long k = -long(half_count); k <= long(half_count); ++k) {
        s.push_back({double(k) * h, c, FlexField<double>::zero(c.vertex_count())});
    }
    return ConfigCurve(std::move(s), h);
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a + (b - a) * double(k) / double(n - 1);
    return out;
}

template <class Fn>
Grid2<Vec3d> sample(const std::vector<double>& u, const std::vector<double>& v, Fn fn) {
    Grid2<Vec3d> g(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) g(i, j) = fn(u[i], v[j]);
    return g;
}

inline Vec3d plane_point(double u, double v) { return {u, v, 0.0}; }

/// Plane (u, v, 0) with the linearized tilt jet xi1 = u e_z, xi2 = -u e_x.
inline SurfaceGrid plane_tilt_jet(std::size_t n = 21) {
    const auto u = linspace(-1.0, 1.0, n);
    const auto v = linspace(-1.0, 1.0, n);
    return SurfaceGrid(u, v, sample(u, v, plane_point),
                       {sample(u, v, [](double a, double) { return Vec3d{0.0, 0.0, a}; }),
                        sample(u, v, [](double a, double) { return Vec3d{-a, 0.0, 0.0}; })});
}

/// Plane with xi1 = u^2 e_z and xi2 = 0: a flex at order one only.
inline SurfaceGrid plane_normal_bump(std::size_t n = 21) {
    const auto u = linspace(-1.0, 1.0, n);
    const auto v = linspace(-1.0, 1.0, n);
    return SurfaceGrid(u, v, sample(u, v, plane_point),
                       {sample(u, v, [](double a, double) { return Vec3d{0.0, 0.0, a * a}; }),
                        sample(u, v, [](double, double) { return Vec3d{}; })});
}

inline Vec3d cylinder_point(double u, double v) { return {std::cos(u), std::sin(u), v}; }

/// Linearized isometry omega x p + t.
struct KillingField {
    Vec3d omega{0.3, -0.7, 0.5};
    Vec3d translation{0.1, 0.2, -0.4};

    Vec3d operator()(const Vec3d& p) const { return cross(omega, p) + translation; }
};

/// Cylinder patch (cos u, sin u, v) on n x n nodes carrying a Killing field.
inline SurfaceGrid cylinder_killing(std::size_t n = 21, KillingField k = {}) {
    const auto u = linspace(0.0, 1.0, n);
    const auto v = linspace(0.0, 1.0, n);
    return SurfaceGrid(u, v, sample(u, v, cylinder_point),
                       {sample(u, v, [&](double a, double b) { return k(cylinder_point(a, b)); })});
}

/// Not an immersion: x_v vanishes everywhere.
inline SurfaceGrid degenerate_grid(std::size_t n = 5) {
    const auto u = linspace(0.0, 1.0, n);
    const auto v = linspace(0.0, 1.0, n);
    return SurfaceGrid(u, v, sample(u, v, [](double a, double) { return Vec3d{a, a, 0.0}; }),
                       {sample(u, v, [](double, double) { return Vec3d{}; })});
}

using Entry = std::variant<Configuration<double>, ConfigCurve, SurfaceGrid>;

inline std::vector<std::string> names() {
    return {"tetrahedron",      "subdivided-tetrahedron", "hinge",           "hinge-fold-curve",
            "fig1-green-curve", "hinge-translation-curve", "plane-tilt-jet", "plane-normal-bump",
            "cylinder-killing", "degenerate-grid"};
}

inline std::optional<Entry> lookup(const std::string& name) {
    if (name == "tetrahedron") return tetrahedron();
    if (name == "subdivided-tetrahedron") return subdivided_tetrahedron();
    if (name == "hinge") return hinge();
    if (name == "hinge-fold-curve") return hinge_fold_curve();
    if (name == "fig1-green-curve") return fig1_green_curve();
    if (name == "hinge-translation-curve") return translation_curve(hinge(), {0.5, -0.25, 1.0});
    if (name == "plane-tilt-jet") return plane_tilt_jet();
    if (name == "plane-normal-bump") return plane_normal_bump();
    if (name == "cylinder-killing") return cylinder_killing();
    if (name == "degenerate-grid") return degenerate_grid();
    return std::nullopt;
}

}  // namespace flexlab::corpus
