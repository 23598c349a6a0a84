#pragma once

/**
 * @file spectral_grid.hpp
 * @brief Uniform periodic grids, the discrete Fourier transform contract,
 * Fourier multipliers and exact evaluation of trigonometric polynomials.
 *
 * Normalization: for a grid with n = 2^J points per axis and dimension d,
 *
 *     coeffs(xi) = n^{-d} sum_j values(x_j) exp(-i x_j . xi)
 *     values(x)  = sum_xi coeffs(xi) exp(i x . xi)
 *
 * so a single mode cos(k x) has coefficients 1/2 at +-k. Coefficients are
 * stored in FFT order: index i on an axis carries the integer frequency i
 * for i < n/2 and i - n otherwise, i.e. the lattice [-n/2, n/2).
 */

#include "paracalc/errors.hpp"
#include "paracalc/fft.hpp"
#include "paracalc/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace paracalc {

using cplx = std::complex<double>;
using Point = std::array<double, 2>;
using Freq = std::array<double, 2>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

class TorusGrid {
public:
    TorusGrid(int d, int J, double length = two_pi) : d_(d), J_(J), length_(length) {
        if (d != 1 && d != 2) throw InvalidGrid("dimension must be 1 or 2, got " + std::to_string(d));
        if (J < 4 || J > 20) throw InvalidGrid("dyadic depth must satisfy 4 <= J <= 20, got " + std::to_string(J));
        if (!(length > 0.0) || !std::isfinite(length)) throw InvalidGrid("period must be positive");
    }

    int dim() const { return d_; }
    int depth() const { return J_; }
    double length() const { return length_; }

    /// Points per axis.
    std::size_t n() const { return std::size_t{1} << J_; }
    /// Total number of samples, n^d.
    std::size_t size() const { return d_ == 1 ? n() : n() * n(); }
    double spacing() const { return length_ / static_cast<double>(n()); }
    /// Physical wavenumber of one lattice step (1 on the default 2 pi period).
    double wavenumber_unit() const { return two_pi / length_; }

    /// Integer frequency carried by FFT index i on one axis.
    long frequency_of(std::size_t i) const {
        const long nn = static_cast<long>(n());
        const long k = static_cast<long>(i);
        return k < nn / 2 ? k : k - nn;
    }
    /// FFT index of integer frequency k (taken modulo n).
    std::size_t index_of(long k) const {
        const long nn = static_cast<long>(n());
        return static_cast<std::size_t>(((k % nn) + nn) % nn);
    }

    /// Integer lattice frequency of flat coefficient index (second entry 0 in d = 1).
    std::array<long, 2> lattice(std::size_t flat) const {
        if (d_ == 1) return {frequency_of(flat), 0};
        return {frequency_of(flat / n()), frequency_of(flat % n())};
    }
    /// Physical frequency vector of flat coefficient index.
    Freq frequency(std::size_t flat) const {
        const auto k = lattice(flat);
        const double w = wavenumber_unit();
        return {w * static_cast<double>(k[0]), w * static_cast<double>(k[1])};
    }
    /// Flat index of integer lattice frequency (wrapped).
    std::size_t flat_of(long k0, long k1 = 0) const {
        if (d_ == 1) return index_of(k0);
        return index_of(k0) * n() + index_of(k1);
    }

    /// Coordinates of sample j (row-major; second entry 0 in d = 1).
    Point point(std::size_t flat) const {
        const double h = spacing();
        if (d_ == 1) return {h * static_cast<double>(flat), 0.0};
        return {h * static_cast<double>(flat / n()), h * static_cast<double>(flat % n())};
    }

    std::vector<Point> points() const {
        std::vector<Point> out(size());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = point(j);
        return out;
    }

    friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
        return a.d_ == b.d_ && a.J_ == b.J_ && a.length_ == b.length_;
    }

private:
    int d_;
    int J_;
    double length_;
};

inline double norm(const Freq& xi, int d) {
    return d == 1 ? std::abs(xi[0]) : std::hypot(xi[0], xi[1]);
}

/// Forward transform with the normalization documented at the top of this file.
inline std::vector<cplx> dft(const TorusGrid& grid, std::span<const cplx> values) {
    std::vector<cplx> out(grid.size());
    fft::execute(grid.dim(), static_cast<int>(grid.n()), FFTW_FORWARD, values, out);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto& c : out) c *= scale;
    return out;
}

/// Inverse of dft().
inline std::vector<cplx> idft(const TorusGrid& grid, std::span<const cplx> coeffs) {
    std::vector<cplx> out(grid.size());
    fft::execute(grid.dim(), static_cast<int>(grid.n()), FFTW_BACKWARD, coeffs, out);
    return out;
}

/// Samples on a periodic grid together with their Fourier coefficients.
/// Both representations are kept in sync at construction, so a GridFunction
/// is immutable and can be shared between threads.
class GridFunction {
public:
    explicit GridFunction(const TorusGrid& grid)
        : grid_(grid), values_(grid.size()), coeffs_(grid.size()), real_(true) {}

    static GridFunction from_values(const TorusGrid& grid, std::vector<cplx> values) {
        check_size(grid, values.size());
        GridFunction f(grid, std::move(values), {}, false);
        f.real_ = f.detect_real();
        if (f.real_) f.snap_real();
        f.coeffs_ = dft(grid, f.values_);
        return f;
    }

    static GridFunction from_real(const TorusGrid& grid, std::span<const double> values) {
        check_size(grid, values.size());
        std::vector<cplx> v(values.begin(), values.end());
        GridFunction f(grid, std::move(v), {}, true);
        f.coeffs_ = dft(grid, f.values_);
        return f;
    }

    static GridFunction from_coeffs(const TorusGrid& grid, std::vector<cplx> coeffs) {
        check_size(grid, coeffs.size());
        GridFunction f(grid, {}, std::move(coeffs), false);
        f.values_ = idft(grid, f.coeffs_);
        f.real_ = f.detect_real();
        if (f.real_) f.snap_real();
        return f;
    }

    /// Samples fn(Point) at every grid point.
    template <class Fn>
    static GridFunction sample(const TorusGrid& grid, Fn&& fn) {
        std::vector<cplx> v(grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = cplx(fn(grid.point(j)));
        return from_values(grid, std::move(v));
    }

    static GridFunction constant(const TorusGrid& grid, cplx c) {
        return from_values(grid, std::vector<cplx>(grid.size(), c));
    }

    const TorusGrid& grid() const { return grid_; }
    std::span<const cplx> values() const { return values_; }
    std::span<const cplx> coeffs() const { return coeffs_; }
    cplx value(std::size_t j) const { return values_[j]; }
    cplx coeff(std::size_t i) const { return coeffs_[i]; }
    bool is_real() const { return real_; }

    std::vector<double> real_values() const {
        std::vector<double> out(values_.size());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = values_[j].real();
        return out;
    }

    double sup_norm() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    /// L2 norm over one period: (length^d / n^d) sum_j |v_j|^2, evaluated
    /// through Parseval on the coefficients.
    double l2_norm() const {
        double s = 0.0;
        for (const auto& c : coeffs_) s += std::norm(c);
        return std::sqrt(std::pow(grid_.length(), grid_.dim()) * s);
    }

    GridFunction& operator+=(const GridFunction& o) { return axpy(1.0, o); }
    GridFunction& operator-=(const GridFunction& o) { return axpy(-1.0, o); }

    /// this += alpha * o, exact in both representations.
    GridFunction& axpy(cplx alpha, const GridFunction& o) {
        require_same_grid(o);
        for (std::size_t j = 0; j < values_.size(); ++j) {
            values_[j] += alpha * o.values_[j];
            coeffs_[j] += alpha * o.coeffs_[j];
        }
        real_ = real_ && o.real_ && alpha.imag() == 0.0;
        return *this;
    }

    GridFunction& operator*=(cplx alpha) {
        for (auto& v : values_) v *= alpha;
        for (auto& c : coeffs_) c *= alpha;
        real_ = real_ && alpha.imag() == 0.0;
        return *this;
    }

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(cplx alpha, GridFunction a) { return a *= alpha; }
    friend GridFunction operator*(double alpha, GridFunction a) { return a *= cplx(alpha); }

    /// Pointwise product on the grid (coefficients convolve cyclically).
    friend GridFunction pointwise_product(const GridFunction& a, const GridFunction& b) {
        a.require_same_grid(b);
        std::vector<cplx> v(a.values_.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = a.values_[j] * b.values_[j];
        auto out = from_values(a.grid_, std::move(v));
        return out;
    }

    void require_same_grid(const GridFunction& o) const {
        if (!(grid_ == o.grid_)) throw GridMismatch();
    }

private:
    GridFunction(const TorusGrid& grid, std::vector<cplx> v, std::vector<cplx> c, bool real)
        : grid_(grid), values_(std::move(v)), coeffs_(std::move(c)), real_(real) {}

    static void check_size(const TorusGrid& grid, std::size_t n) {
        if (n != grid.size())
            throw FormatError("sample count " + std::to_string(n) + " does not match grid size " +
                              std::to_string(grid.size()));
    }

    bool detect_real() const {
        double scale = 0.0, worst = 0.0;
        for (const auto& v : values_) {
            scale = std::max(scale, std::abs(v));
            worst = std::max(worst, std::abs(v.imag()));
        }
        return worst <= 1e-12 * std::max(scale, 1e-300) || scale == 0.0;
    }

    // Drops round-off imaginary parts from the samples only; coefficients are
    // left untouched so exact spectral zeros survive.
    void snap_real() {
        for (auto& v : values_) v = cplx(v.real(), 0.0);
    }

    TorusGrid grid_;
    std::vector<cplx> values_;
    std::vector<cplx> coeffs_;
    bool real_;
};

/// Spectral representation refresh; values and coefficients are always in
/// sync, so this only exists to honour the transform contract by name.
inline GridFunction dft(const GridFunction& f) { return f; }

/// Returns m(D) f: coeffs(xi) -> m(xi) coeffs(xi), with m taking the
/// physical frequency vector.
template <class Multiplier>
GridFunction fourier_multiplier(Multiplier&& m, const GridFunction& f) {
    const auto& grid = f.grid();
    std::vector<cplx> c(f.coeffs().begin(), f.coeffs().end());
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == cplx(0.0)) continue;
        c[i] *= cplx(m(grid.frequency(i)));
    }
    return GridFunction::from_coeffs(grid, std::move(c));
}

/// Multiplier given as a table in coefficient order.
inline GridFunction fourier_multiplier_table(std::span<const double> table, const GridFunction& f) {
    std::vector<cplx> c(f.coeffs().begin(), f.coeffs().end());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= table[i];
    return GridFunction::from_coeffs(f.grid(), std::move(c));
}

/// Spectral partial derivative along `axis`.
inline GridFunction spectral_derivative(const GridFunction& f, int axis = 0) {
    return fourier_multiplier([axis](const Freq& xi) { return cplx(0.0, xi[axis]); }, f);
}

namespace detail {

// exp(i * phase * k) for k in [k_lo, k_lo + count), built by recurrence and
// re-anchored with an exact polar value every 32 steps.
inline void phase_table(double phase, long k_lo, std::size_t count, std::vector<cplx>& out) {
    out.resize(count);
    const cplx step = std::polar(1.0, phase);
    cplx cur{};
    for (std::size_t t = 0; t < count; ++t) {
        if (t % 32 == 0)
            cur = std::polar(1.0, phase * static_cast<double>(k_lo + static_cast<long>(t)));
        else
            cur *= step;
        out[t] = cur;
    }
}

}  // namespace detail

/// Evaluates sum_xi coeffs(xi) exp(i p . xi) at each point by direct
/// summation over the nonzero coefficients. Exact for band-limited f up to
/// round-off; the Nyquist column is summed as stored (one-sided).
inline std::vector<cplx> evaluate_trig(const GridFunction& f, std::span<const Point> points) {
    const auto& grid = f.grid();
    const long n = static_cast<long>(grid.n());
    const double w = grid.wavenumber_unit();
    std::vector<cplx> out(points.size());
    auto coeffs = f.coeffs();

    if (grid.dim() == 1) {
        long lo = n, hi = -n;
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            if (coeffs[i] == cplx(0.0)) continue;
            const long k = grid.frequency_of(i);
            lo = std::min(lo, k);
            hi = std::max(hi, k);
        }
        if (lo > hi) return out;
        const std::size_t count = static_cast<std::size_t>(hi - lo + 1);
        std::vector<cplx> dense(count);
        for (long k = lo; k <= hi; ++k) dense[static_cast<std::size_t>(k - lo)] = coeffs[grid.index_of(k)];
        parallel_for(points.size(), [&](std::size_t p) {
            thread_local std::vector<cplx> table;
            detail::phase_table(w * points[p][0], lo, count, table);
            cplx s{};
            for (std::size_t t = 0; t < count; ++t) s += dense[t] * table[t];
            out[p] = s;
        }, 16);
        return out;
    }

    // d = 2: rows of the first frequency axis that carry any nonzero mode.
    std::vector<long> rows;
    for (long k0 = -n / 2; k0 < n / 2; ++k0) {
        const std::size_t base = grid.index_of(k0) * grid.n();
        for (std::size_t i1 = 0; i1 < grid.n(); ++i1) {
            if (coeffs[base + i1] != cplx(0.0)) {
                rows.push_back(k0);
                break;
            }
        }
    }
    if (rows.empty()) return out;
    std::vector<cplx> dense(rows.size() * grid.n());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t base = grid.index_of(rows[r]) * grid.n();
        for (long k1 = -n / 2; k1 < n / 2; ++k1)
            dense[r * grid.n() + static_cast<std::size_t>(k1 + n / 2)] = coeffs[base + grid.index_of(k1)];
    }
    parallel_for(points.size(), [&](std::size_t p) {
        thread_local std::vector<cplx> t0, t1;
        detail::phase_table(w * points[p][0], -n / 2, grid.n(), t0);
        detail::phase_table(w * points[p][1], -n / 2, grid.n(), t1);
        cplx s{};
        for (std::size_t r = 0; r < rows.size(); ++r) {
            cplx row{};
            const cplx* c = &dense[r * grid.n()];
            for (std::size_t t = 0; t < grid.n(); ++t) row += c[t] * t1[t];
            s += row * t0[static_cast<std::size_t>(rows[r] + n / 2)];
        }
        out[p] = s;
    }, 4);
    return out;
}

/// Evaluates f at a single point.
inline cplx evaluate_trig(const GridFunction& f, const Point& p) {
    return evaluate_trig(f, std::span<const Point>(&p, 1))[0];
}

/// Samples the band-limited interpolant of f at the given points back onto
/// a grid function (points must number grid.size()).
inline GridFunction compose_on_grid(const GridFunction& f, std::span<const Point> points) {
    return GridFunction::from_values(f.grid(), evaluate_trig(f, points));
}

}  // namespace paracalc
