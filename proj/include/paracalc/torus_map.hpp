#pragma once

// Maps of the torus of the form chi(x) = x + g(x) with g periodic.

#include "paracalc/errors.hpp"
#include "paracalc/spectral_grid.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace paracalc {

/// Row-major 2x2 matrix; in d = 1 only entry [0] is meaningful.
using Mat2 = std::array<double, 4>;

/// Largest and smallest singular values of a d x d Jacobian.
inline std::array<double, 2> singular_values(const Mat2& m, int d) {
    if (d == 1) return {std::abs(m[0]), std::abs(m[0])};
    const double a = m[0], b = m[1], c = m[2], e = m[3];
    const double s1 = a * a + b * b + c * c + e * e;
    const double det = a * e - b * c;
    const double disc = std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det));
    return {std::sqrt(0.5 * (s1 + disc)), std::sqrt(std::max(0.0, 0.5 * (s1 - disc)))};
}

inline double determinant(const Mat2& m, int d) { return d == 1 ? m[0] : m[0] * m[3] - m[1] * m[2]; }

/// (M^{-1})^t xi; throws when M is singular.
inline Freq inverse_transpose_apply(const Mat2& m, int d, const Freq& xi) {
    const double det = determinant(m, d);
    if (std::abs(det) <= 1e-300) throw NotDiffeomorphism("singular Jacobian");
    if (d == 1) return {xi[0] / m[0], 0.0};
    // M^{-1} = [e -b; -c a] / det, transpose = [e -c; -b a] / det.
    return {(m[3] * xi[0] - m[2] * xi[1]) / det, (-m[1] * xi[0] + m[0] * xi[1]) / det};
}

class TorusMap {
public:
    static constexpr double diffeo_threshold = 1e-6;

    /// chi = id + g, one displacement field per axis.
    TorusMap(const TorusGrid& grid, std::vector<GridFunction> g) : grid_(grid) {
        if (static_cast<int>(g.size()) != grid.dim())
            throw FormatError("torus map needs one displacement field per axis");
        for (auto& gi : g) {
            if (!(gi.grid() == grid)) throw GridMismatch("displacement lives on another grid");
            g_.push_back(gi.is_real() ? gi : GridFunction::from_real(grid, gi.real_values()));
        }
        const int d = grid.dim();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) dg_.push_back(spectral_derivative(g_[static_cast<std::size_t>(i)], j));
        min_jac_ = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < grid.size(); ++p) min_jac_ = std::min(min_jac_, determinant(jacobian(p), d));
        is_diffeo_ = min_jac_ > diffeo_threshold;
    }

    static TorusMap identity(const TorusGrid& grid) {
        return TorusMap(grid, std::vector<GridFunction>(static_cast<std::size_t>(grid.dim()), GridFunction(grid)));
    }

    const TorusGrid& grid() const { return grid_; }
    int dim() const { return grid_.dim(); }
    const GridFunction& displacement(int axis) const { return g_.at(static_cast<std::size_t>(axis)); }
    const std::vector<GridFunction>& displacements() const { return g_; }
    /// d g_i / d x_j on the grid.
    const GridFunction& displacement_derivative(int i, int j) const {
        return dg_.at(static_cast<std::size_t>(i * grid_.dim() + j));
    }
    double min_jac() const { return min_jac_; }
    bool is_diffeo() const { return is_diffeo_; }

    bool is_identity() const {
        for (const auto& gi : g_)
            if (gi.sup_norm() != 0.0) return false;
        return true;
    }

    /// chi(x_j) for grid sample j.
    Point image(std::size_t j) const {
        Point p = grid_.point(j);
        for (int a = 0; a < grid_.dim(); ++a) p[static_cast<std::size_t>(a)] += g_[static_cast<std::size_t>(a)].value(j).real();
        return p;
    }

    std::vector<Point> image_points() const {
        std::vector<Point> out(grid_.size());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = image(j);
        return out;
    }

    /// D chi(x_j) = I + Dg(x_j).
    Mat2 jacobian(std::size_t j) const {
        const int d = grid_.dim();
        Mat2 m{1.0, 0.0, 0.0, 1.0};
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                m[static_cast<std::size_t>(a * (d == 1 ? 1 : 2) + b)] +=
                    dg_[static_cast<std::size_t>(a * d + b)].value(j).real();
        if (d == 1) m[3] = 1.0;
        return m;
    }

    /// chi at arbitrary points, through the trigonometric interpolant of g.
    std::vector<Point> apply(std::span<const Point> pts) const {
        std::vector<Point> out(pts.begin(), pts.end());
        for (int a = 0; a < grid_.dim(); ++a) {
            const auto ga = evaluate_trig(g_[static_cast<std::size_t>(a)], pts);
            for (std::size_t p = 0; p < out.size(); ++p) out[p][static_cast<std::size_t>(a)] += ga[p].real();
        }
        return out;
    }

    /// D chi at arbitrary points.
    std::vector<Mat2> jacobian_at(std::span<const Point> pts) const {
        const int d = grid_.dim();
        std::vector<Mat2> out(pts.size(), Mat2{1.0, 0.0, 0.0, 1.0});
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                const auto v = evaluate_trig(dg_[static_cast<std::size_t>(a * d + b)], pts);
                for (std::size_t p = 0; p < pts.size(); ++p)
                    out[p][static_cast<std::size_t>(a * (d == 1 ? 1 : 2) + b)] += v[p].real();
            }
        return out;
    }

    /// sup over the grid of the operator norm of D chi.
    double sup_jacobian_norm() const {
        double s = 0.0;
        for (std::size_t j = 0; j < grid_.size(); ++j) s = std::max(s, singular_values(jacobian(j), grid_.dim())[0]);
        return s;
    }

    /// sup over the grid of the operator norm of (D chi)^{-1}; infinite when
    /// some Jacobian is singular.
    double sup_inverse_jacobian_norm() const {
        double s = 0.0;
        for (std::size_t j = 0; j < grid_.size(); ++j) {
            const double smin = singular_values(jacobian(j), grid_.dim())[1];
            if (smin <= 0.0) return std::numeric_limits<double>::infinity();
            s = std::max(s, 1.0 / smin);
        }
        return s;
    }

    /// sup over the grid of the operator norm of Dg.
    double sup_displacement_gradient() const {
        double s = 0.0;
        const int d = grid_.dim();
        for (std::size_t j = 0; j < grid_.size(); ++j) {
            Mat2 m{0.0, 0.0, 0.0, 0.0};
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    m[static_cast<std::size_t>(a * (d == 1 ? 1 : 2) + b)] =
                        dg_[static_cast<std::size_t>(a * d + b)].value(j).real();
            s = std::max(s, singular_values(m, d)[0]);
        }
        return s;
    }

private:
    TorusGrid grid_;
    std::vector<GridFunction> g_;
    std::vector<GridFunction> dg_;
    double min_jac_ = 1.0;
    bool is_diffeo_ = true;
};

/// chi o chi_inner as a torus map: g(x) = g_inner(x) + g_outer(x + g_inner(x)),
/// re-projected onto the grid.
inline TorusMap compose(const TorusMap& outer, const TorusMap& inner) {
    if (!(outer.grid() == inner.grid())) throw GridMismatch("maps live on different grids");
    const auto& grid = outer.grid();
    if (inner.is_identity()) return outer;
    if (outer.is_identity()) return inner;
    const auto pts = inner.image_points();
    std::vector<GridFunction> g;
    for (int a = 0; a < grid.dim(); ++a) {
        const auto outer_at = evaluate_trig(outer.displacement(a), pts);
        std::vector<double> v(grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = inner.displacement(a).value(j).real() + outer_at[j].real();
        g.push_back(GridFunction::from_real(grid, v));
    }
    return TorusMap(grid, std::move(g));
}

}  // namespace paracalc
