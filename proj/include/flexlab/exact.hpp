#pragma once
// Exact rational arithmetic mode.
//
// Doubles convert to rationals without rounding, so an exact computation on a
// converted configuration is exact for the configuration actually stored.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <utility>
#include <vector>

#include "flexlab/core.hpp"

namespace flexlab {

using Rational = boost::multiprecision::cpp_rational;

inline Rational to_rational(double d) { return Rational(d); }

inline Vec3<Rational> to_rational(const Vec3d& v) { return {to_rational(v[0]), to_rational(v[1]), to_rational(v[2])}; }

inline Configuration<Rational> to_rational(const Configuration<double>& c) {
    std::vector<Vec3<Rational>> p;
    p.reserve(c.vertex_count());
    for (const auto& x : c.positions()) p.push_back(to_rational(x));
    return Configuration<Rational>(c.framework_ptr(), std::move(p));
}

inline FlexField<Rational> to_rational(const FlexField<double>& f) {
    std::vector<Vec3<Rational>> p;
    p.reserve(f.size());
    for (const auto& x : f.vectors) p.push_back(to_rational(x));
    return FlexField<Rational>(std::move(p));
}

inline FlexJet<Rational> to_rational(const FlexJet<double>& j) {
    std::vector<FlexField<Rational>> f;
    for (const auto& x : j.fields()) f.push_back(to_rational(x));
    return FlexJet<Rational>(std::move(f));
}

/// Dense row-major matrix over an exact field.
template <class S>
struct ExactMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<S> data;

    ExactMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, S(0)) {}
    S& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const S& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    ExactMatrix transposed() const {
        ExactMatrix t(cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
};

/// Reduced row echelon form by Gauss-Jordan elimination; returns pivot columns.
template <class S>
std::vector<std::size_t> row_reduce(ExactMatrix<S>& m) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols && row < m.rows; ++col) {
        std::size_t p = row;
        while (p < m.rows && m(p, col) == S(0)) ++p;
        if (p == m.rows) continue;
        if (p != row)
            for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(p, j), m(row, j));
        const S inv = S(1) / m(row, col);
        for (std::size_t j = col; j < m.cols; ++j) m(row, j) *= inv;
        for (std::size_t i = 0; i < m.rows; ++i) {
            if (i == row || m(i, col) == S(0)) continue;
            const S f = m(i, col);
            for (std::size_t j = col; j < m.cols; ++j) m(i, j) -= f * m(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

template <class S>
std::size_t exact_rank(ExactMatrix<S> m) {
    return row_reduce(m).size();
}

/// Basis (not orthonormalized) of the right nullspace, one vector per free column.
template <class S>
std::vector<std::vector<S>> exact_nullspace(ExactMatrix<S> m) {
    const auto pivots = row_reduce(m);
    std::vector<bool> is_pivot(m.cols, false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<std::vector<S>> basis;
    for (std::size_t free = 0; free < m.cols; ++free) {
        if (is_pivot[free]) continue;
        std::vector<S> v(m.cols, S(0));
        v[free] = S(1);
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m(r, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace flexlab
