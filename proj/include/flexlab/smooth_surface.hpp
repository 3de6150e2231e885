#pragma once
// Flex equations for sampled parametric surfaces.
//
// In local coordinates (u, v) the order-k flex equation splits into three
// scalar equations, one per coefficient of du^2, du dv and dv^2:
//
//     x_u.xi(k)_u                + sum_m xi(m)_u.xi(k-m)_u                     = 0
//     x_u.xi(k)_v + x_v.xi(k)_u  + sum_m (xi(m)_u.xi(k-m)_v + xi(m)_v.xi(k-m)_u) = 0
//     x_v.xi(k)_v                + sum_m xi(m)_v.xi(k-m)_v                     = 0
//
// Partial derivatives are three-point central differences (non-uniform
// spacing allowed) and everything is reported on interior nodes only.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexlab/core.hpp"

namespace flexlab {

class ImmersionError : public std::runtime_error {
public:
    struct Node {
        std::size_t i, j;
        double determinant;
    };
    explicit ImmersionError(std::vector<Node> nodes)
        : std::runtime_error("surface grid is not immersed at " + std::to_string(nodes.size()) + " interior node(s)"),
          nodes_(std::move(nodes)) {}
    const std::vector<Node>& nodes() const { return nodes_; }

private:
    std::vector<Node> nodes_;
};

/// Interior-node partial derivatives of a sampled vector field.
struct Partials {
    Grid2<Vec3d> du;  // (nu - 2) x (nv - 2)
    Grid2<Vec3d> dv;
};

namespace detail {

struct ThreePoint {
    double wm, w0, wp;
};

inline ThreePoint central_weights(const std::vector<double>& a, std::size_t k) {
    const double hm = a[k] - a[k - 1];
    const double hp = a[k + 1] - a[k];
    return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

}  // namespace detail

inline Partials central_partials(const std::vector<double>& u, const std::vector<double>& v, const Grid2<Vec3d>& f) {
    if (f.rows() != u.size() || f.cols() != v.size()) throw ModelError("field shape does not match grid");
    const std::size_t nu = u.size() - 2;
    const std::size_t nv = v.size() - 2;
    Partials p{Grid2<Vec3d>(nu, nv), Grid2<Vec3d>(nu, nv)};
    for (std::size_t i = 1; i <= nu; ++i) {
        const auto wu = detail::central_weights(u, i);
        for (std::size_t j = 1; j <= nv; ++j) {
            const auto wv = detail::central_weights(v, j);
            p.du(i - 1, j - 1) = wu.wm * f(i - 1, j) + wu.w0 * f(i, j) + wu.wp * f(i + 1, j);
            p.dv(i - 1, j - 1) = wv.wm * f(i, j - 1) + wv.w0 * f(i, j) + wv.wp * f(i, j + 1);
        }
    }
    return p;
}

struct FormGrid {
    Grid2<double> E, F, G;  // interior nodes

    double determinant(std::size_t i, std::size_t j) const { return E(i, j) * G(i, j) - F(i, j) * F(i, j); }
};

/// First fundamental form on interior nodes. Throws ImmersionError listing
/// every interior node where E G - F^2 is not positive.
inline FormGrid fundamental_form(const SurfaceGrid& grid) {
    for (const auto& x : grid.positions().data())
        if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !std::isfinite(x[2]))
            throw ModelError("surface grid has non-finite positions");
    const Partials p = central_partials(grid.u(), grid.v(), grid.positions());
    const std::size_t nu = p.du.rows();
    const std::size_t nv = p.du.cols();
    FormGrid out{Grid2<double>(nu, nv), Grid2<double>(nu, nv), Grid2<double>(nu, nv)};
    std::vector<ImmersionError::Node> bad;
    for (std::size_t i = 0; i < nu; ++i) {
        for (std::size_t j = 0; j < nv; ++j) {
            const Vec3d& xu = p.du(i, j);
            const Vec3d& xv = p.dv(i, j);
            out.E(i, j) = dot(xu, xu);
            out.F(i, j) = dot(xu, xv);
            out.G(i, j) = dot(xv, xv);
            const double det = out.determinant(i, j);
            // Relative to |x_u|^2 |x_v|^2 so the test is scale free.
            if (!(out.E(i, j) > 0.0 && out.G(i, j) > 0.0 && det > 1e-12 * out.E(i, j) * out.G(i, j))) {
                bad.push_back({i + 1, j + 1, det});
            }
        }
    }
    if (!bad.empty()) throw ImmersionError(std::move(bad));
    return out;
}

/// The three residual arrays of one order (du^2, du dv, dv^2 coefficients).
struct ResidualTriple {
    std::size_t order = 0;
    Grid2<double> uu, uv, vv;

    double max_abs() const {
        double m = 0.0;
        for (const auto* g : {&uu, &uv, &vv})
            for (double x : g->data()) m = std::max(m, std::abs(x));
        return m;
    }
    double rms() const {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto* g : {&uu, &uv, &vv}) {
            for (double x : g->data()) s += x * x;
            n += g->data().size();
        }
        return n ? std::sqrt(s / double(n)) : 0.0;
    }
};

inline std::vector<ResidualTriple> hierarchy_residual_grid(const SurfaceGrid& grid, std::size_t up_to) {
    if (up_to == 0) return {};
    if (up_to > grid.jet_order()) {
        throw ModelError("surface grid carries a jet of order " + std::to_string(grid.jet_order()) +
                         ", order " + std::to_string(up_to) + " requested");
    }
    const Partials x = central_partials(grid.u(), grid.v(), grid.positions());
    std::vector<Partials> xi;
    for (std::size_t k = 0; k < up_to; ++k) xi.push_back(central_partials(grid.u(), grid.v(), grid.jets()[k]));

    const std::size_t nu = x.du.rows();
    const std::size_t nv = x.du.cols();
    std::vector<ResidualTriple> out;
    for (std::size_t k = 1; k <= up_to; ++k) {
        ResidualTriple r{k, Grid2<double>(nu, nv), Grid2<double>(nu, nv), Grid2<double>(nu, nv)};
        const Partials& lead = xi[k - 1];
        for (std::size_t i = 0; i < nu; ++i) {
            for (std::size_t j = 0; j < nv; ++j) {
                double uu = dot(x.du(i, j), lead.du(i, j));
                double uv = dot(x.du(i, j), lead.dv(i, j)) + dot(x.dv(i, j), lead.du(i, j));
                double vv = dot(x.dv(i, j), lead.dv(i, j));
                for (std::size_t m = 1; m < k; ++m) {
                    const Partials& a = xi[m - 1];
                    const Partials& b = xi[k - m - 1];
                    uu += dot(a.du(i, j), b.du(i, j));
                    uv += dot(a.du(i, j), b.dv(i, j)) + dot(a.dv(i, j), b.du(i, j));
                    vv += dot(a.dv(i, j), b.dv(i, j));
                }
                r.uu(i, j) = uu;
                r.uv(i, j) = uv;
                r.vv(i, j) = vv;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// Order-one residuals of a single sampled field.
inline ResidualTriple first_order_residual_grid(const SurfaceGrid& grid, const Grid2<Vec3d>& xi1) {
    return hierarchy_residual_grid(grid.with_jets({xi1}), 1).front();
}

}  // namespace flexlab
