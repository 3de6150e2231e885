#pragma once
// Domain model: frameworks, configurations, flex fields and jets, stresses.
//
// Every type is immutable after construction. Positions and flex vectors are
// templated on the scalar so the same code runs in double precision and in
// exact rational arithmetic (see exact.hpp).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flexlab {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class S>
struct Vec3 {
    std::array<S, 3> c{S(0), S(0), S(0)};

    Vec3() = default;
    Vec3(S x, S y, S z) : c{std::move(x), std::move(y), std::move(z)} {}

    const S& operator[](std::size_t k) const { return c[k]; }
    S& operator[](std::size_t k) { return c[k]; }

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
    friend Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
    friend Vec3 operator*(const S& s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
    friend Vec3 operator*(const Vec3& a, const S& s) { return s * a; }
    Vec3& operator+=(const Vec3& b) {
        for (std::size_t k = 0; k < 3; ++k) c[k] += b[k];
        return *this;
    }
    friend bool operator==(const Vec3& a, const Vec3& b) { return a.c == b.c; }
};

using Vec3d = Vec3<double>;

template <class S>
S dot(const Vec3<S>& a, const Vec3<S>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class S>
Vec3<S> cross(const Vec3<S>& a, const Vec3<S>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3d& a) { return std::sqrt(dot(a, a)); }

/// Unordered vertex pair, stored with i < j once canonicalized.
struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;

    Edge canonical() const { return i <= j ? Edge{i, j} : Edge{j, i}; }
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct FrameworkViolation {
    enum class Kind { SelfLoop, DuplicateEdge, IndexOutOfRange, NoVertices };
    Kind kind;
    Edge edge;
    std::string message;
};

/// Report-style validation of raw combinatorial input. Empty iff valid.
inline std::vector<FrameworkViolation> validate_framework(std::size_t vertex_count,
                                                          const std::vector<Edge>& edges) {
    std::vector<FrameworkViolation> out;
    if (vertex_count == 0) {
        out.push_back({FrameworkViolation::Kind::NoVertices, {}, "framework has no vertices"});
    }
    std::vector<Edge> seen;
    seen.reserve(edges.size());
    for (const Edge& raw : edges) {
        const Edge e = raw.canonical();
        const std::string tag = "(" + std::to_string(raw.i) + "," + std::to_string(raw.j) + ")";
        if (e.j >= vertex_count) {
            out.push_back({FrameworkViolation::Kind::IndexOutOfRange, raw,
                           "edge " + tag + " references a vertex >= " + std::to_string(vertex_count)});
            continue;
        }
        if (e.i == e.j) {
            out.push_back({FrameworkViolation::Kind::SelfLoop, raw, "edge " + tag + " is a self-loop"});
            continue;
        }
        if (std::find(seen.begin(), seen.end(), e) != seen.end()) {
            out.push_back({FrameworkViolation::Kind::DuplicateEdge, raw, "edge " + tag + " is duplicated"});
            continue;
        }
        seen.push_back(e);
    }
    return out;
}

/// Combinatorics of a bar-joint framework. Edges are canonically sorted at
/// construction so equality is structural.
class Framework {
public:
    Framework(std::size_t vertex_count, std::vector<Edge> edges) : vertex_count_(vertex_count) {
        auto violations = validate_framework(vertex_count, edges);
        if (!violations.empty()) {
            throw ModelError("invalid framework: " + violations.front().message);
        }
        for (Edge& e : edges) e = e.canonical();
        std::sort(edges.begin(), edges.end());
        edges_ = std::move(edges);
    }

    std::size_t vertex_count() const { return vertex_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(std::size_t e) const { return edges_.at(e); }

    /// Index of an edge in canonical order, or edge_count() if absent.
    std::size_t find_edge(Edge e) const {
        e = e.canonical();
        auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        return (it != edges_.end() && *it == e) ? std::size_t(it - edges_.begin()) : edges_.size();
    }

    friend bool operator==(const Framework&, const Framework&) = default;

private:
    std::size_t vertex_count_;
    std::vector<Edge> edges_;
};

using FrameworkPtr = std::shared_ptr<const Framework>;

inline FrameworkPtr make_framework(std::size_t vertex_count, std::vector<Edge> edges) {
    return std::make_shared<const Framework>(vertex_count, std::move(edges));
}

template <class S>
bool is_zero(const S& s) {
    return s == S(0);
}

/// An embedding of a framework's vertices in 3-space.
template <class S>
class Configuration {
public:
    Configuration(FrameworkPtr framework, std::vector<Vec3<S>> positions)
        : framework_(std::move(framework)), positions_(std::move(positions)) {
        if (!framework_) throw ModelError("configuration without framework");
        if (positions_.size() != framework_->vertex_count()) {
            throw ModelError("configuration has " + std::to_string(positions_.size()) +
                             " positions for " + std::to_string(framework_->vertex_count()) + " vertices");
        }
        for (const Edge& e : framework_->edges()) {
            const Vec3<S> d = positions_[e.i] - positions_[e.j];
            if (is_zero(dot(d, d))) {
                throw ModelError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                 ") has zero length");
            }
        }
    }

    const Framework& framework() const { return *framework_; }
    const FrameworkPtr& framework_ptr() const { return framework_; }
    std::size_t vertex_count() const { return positions_.size(); }
    const std::vector<Vec3<S>>& positions() const { return positions_; }
    const Vec3<S>& position(std::size_t v) const { return positions_.at(v); }

    Vec3<S> edge_vector(const Edge& e) const { return positions_[e.i] - positions_[e.j]; }

private:
    FrameworkPtr framework_;
    std::vector<Vec3<S>> positions_;
};

/// One vector per vertex: a single order of a flex jet.
template <class S>
struct FlexField {
    std::vector<Vec3<S>> vectors;

    FlexField() = default;
    explicit FlexField(std::vector<Vec3<S>> v) : vectors(std::move(v)) {}
    static FlexField zero(std::size_t n) { return FlexField(std::vector<Vec3<S>>(n)); }

    std::size_t size() const { return vectors.size(); }
    const Vec3<S>& operator[](std::size_t v) const { return vectors[v]; }

    Vec3<S> edge_difference(const Edge& e) const { return vectors[e.i] - vectors[e.j]; }

    friend bool operator==(const FlexField&, const FlexField&) = default;
};

/// Ordered fields xi(1)..xi(n) defining x_t = x + 2 t xi(1) + ... + 2 t^n xi(n).
template <class S>
class FlexJet {
public:
    FlexJet() = default;
    explicit FlexJet(std::vector<FlexField<S>> fields) : fields_(std::move(fields)) {
        if (fields_.empty()) throw ModelError("flex jet must have order >= 1");
        for (const auto& f : fields_) {
            if (f.size() != fields_.front().size()) throw ModelError("flex jet fields differ in size");
        }
    }

    std::size_t order() const { return fields_.size(); }
    std::size_t vertex_count() const { return fields_.empty() ? 0 : fields_.front().size(); }
    const FlexField<S>& operator[](std::size_t k) const { return fields_.at(k - 1); }  // 1-based order
    const std::vector<FlexField<S>>& fields() const { return fields_; }

    FlexJet extended(FlexField<S> next) const {
        auto f = fields_;
        f.push_back(std::move(next));
        return FlexJet(std::move(f));
    }

private:
    std::vector<FlexField<S>> fields_;
};

/// Edge weights; force per unit length.
struct Stress {
    std::vector<double> weights;
};

template <class S>
void require_sized(const Configuration<S>& c, const FlexJet<S>& j) {
    if (j.vertex_count() != c.vertex_count()) {
        throw ModelError("flex jet sized for " + std::to_string(j.vertex_count()) + " vertices, configuration has " +
                         std::to_string(c.vertex_count()));
    }
}

/// Positions x_i + sum_k 2 t^k xi(k)_i, evaluated exactly.
template <class S>
Configuration<S> evaluate_deformation(const Configuration<S>& c, const FlexJet<S>& j, const S& t) {
    require_sized(c, j);
    std::vector<Vec3<S>> out = c.positions();
    S tk = t;
    for (std::size_t k = 1; k <= j.order(); ++k) {
        const S w = S(2) * tk;
        for (std::size_t v = 0; v < out.size(); ++v) out[v] += w * j[k][v];
        tk = tk * t;
    }
    return Configuration<S>(c.framework_ptr(), std::move(out));
}

/// Coefficients (index = power of t, degree 2n) of |x_i(t) - x_j(t)|^2 - |x_i - x_j|^2.
template <class S>
std::vector<S> edge_length_polynomial(const Configuration<S>& c, const FlexJet<S>& j, const Edge& e) {
    require_sized(c, j);
    const Edge ce = e.canonical();
    if (ce.j >= c.vertex_count() || ce.i == ce.j) throw ModelError("invalid edge for edge_length_polynomial");
    const std::size_t n = j.order();
    std::vector<Vec3<S>> d(n + 1);
    d[0] = c.edge_vector(ce);
    for (std::size_t k = 1; k <= n; ++k) d[k] = S(2) * j[k].edge_difference(ce);
    std::vector<S> coeff(2 * n + 1, S(0));
    for (std::size_t a = 0; a <= n; ++a) {
        for (std::size_t b = 0; b <= n; ++b) {
            if (a == 0 && b == 0) continue;
            coeff[a + b] += dot(d[a], d[b]);
        }
    }
    return coeff;
}

template <class S>
double to_double(const S& s) {
    return static_cast<double>(s);
}

/// Largest pairwise vertex distance.
template <class S>
double diameter(const Configuration<S>& c) {
    double best = 0.0;
    const auto& p = c.positions();
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t b = a + 1; b < p.size(); ++b) {
            const auto d = p[a] - p[b];
            best = std::max(best, std::sqrt(to_double(dot(d, d))));
        }
    }
    return best;
}

/// Raised when a curve of configurations violates its structural invariants.
class CurveError : public ModelError {
public:
    enum class Code { NoBaseSample, TooFewSamples, NotIncreasing, FrameworkMismatch, FlexSize };
    CurveError(Code code, const std::string& what) : ModelError(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

struct CurveSample {
    double r;
    Configuration<double> configuration;
    FlexField<double> flex;
};

/// Sampled one-parameter family of configurations, each carrying a first-order flex.
class ConfigCurve {
public:
    /// `uniform_step` is metadata only; r values are authoritative.
    ConfigCurve(std::vector<CurveSample> samples, std::optional<double> uniform_step = std::nullopt)
        : samples_(std::move(samples)), uniform_step_(uniform_step) {
        if (samples_.empty()) throw CurveError(CurveError::Code::NoBaseSample, "no base sample (curve is empty)");
        const Framework& f = samples_.front().configuration.framework();
        for (std::size_t k = 0; k < samples_.size(); ++k) {
            const auto& s = samples_[k];
            if (!(s.configuration.framework() == f)) {
                throw CurveError(CurveError::Code::FrameworkMismatch, "curve samples use different frameworks");
            }
            if (s.flex.size() != f.vertex_count()) {
                throw CurveError(CurveError::Code::FlexSize, "curve sample flex has wrong size");
            }
            if (k > 0 && !(samples_[k - 1].r < s.r)) {
                throw CurveError(CurveError::Code::NotIncreasing, "curve r values must be strictly increasing");
            }
        }
        if (base_index_impl() == samples_.size()) {
            throw CurveError(CurveError::Code::NoBaseSample, "no base sample (r = 0 missing)");
        }
    }

    const std::vector<CurveSample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    std::optional<double> uniform_step() const { return uniform_step_; }
    std::size_t base_index() const { return base_index_impl(); }
    const CurveSample& base() const { return samples_[base_index_impl()]; }
    const Framework& framework() const { return samples_.front().configuration.framework(); }

private:
    std::size_t base_index_impl() const {
        for (std::size_t k = 0; k < samples_.size(); ++k) {
            if (samples_[k].r == 0.0) return k;
        }
        return samples_.size();
    }

    std::vector<CurveSample> samples_;
    std::optional<double> uniform_step_;
};

/// Row-major 2-D array indexed (i along u, j along v).
template <class T>
class Grid2 {
public:
    Grid2() = default;
    Grid2(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Grid2&, const Grid2&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Tensor-product (u, v) sample of a parametric surface, with an optional
/// attached jet (jets[k-1] holds xi(k)).
class SurfaceGrid {
public:
    SurfaceGrid(std::vector<double> u, std::vector<double> v, Grid2<Vec3d> positions,
                std::vector<Grid2<Vec3d>> jets = {})
        : u_(std::move(u)), v_(std::move(v)), positions_(std::move(positions)), jets_(std::move(jets)) {
        check_axis(u_, "u");
        check_axis(v_, "v");
        if (positions_.rows() != u_.size() || positions_.cols() != v_.size()) {
            throw ModelError("surface grid positions do not match sample counts");
        }
        for (const auto& jet : jets_) {
            if (jet.rows() != u_.size() || jet.cols() != v_.size()) {
                throw ModelError("surface grid jet field does not match sample counts");
            }
        }
    }

    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& v() const { return v_; }
    const Grid2<Vec3d>& positions() const { return positions_; }
    const std::vector<Grid2<Vec3d>>& jets() const { return jets_; }
    std::size_t jet_order() const { return jets_.size(); }

    SurfaceGrid with_jets(std::vector<Grid2<Vec3d>> jets) const { return SurfaceGrid(u_, v_, positions_, std::move(jets)); }

private:
    static void check_axis(const std::vector<double>& a, const char* name) {
        if (a.size() < 3) throw ModelError(std::string("surface grid needs at least 3 samples along ") + name);
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (!std::isfinite(a[k])) throw ModelError(std::string("non-finite ") + name + " sample");
            if (k > 0 && !(a[k - 1] < a[k])) {
                throw ModelError(std::string(name) + " samples must be strictly increasing");
            }
        }
    }

    std::vector<double> u_;
    std::vector<double> v_;
    Grid2<Vec3d> positions_;
    std::vector<Grid2<Vec3d>> jets_;
};

}  // namespace flexlab
