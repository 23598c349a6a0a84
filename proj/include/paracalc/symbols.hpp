#pragma once

/**
 * @file symbols.hpp
 * @brief Symbols a(x, xi) with limited x-regularity, the admissible cut-off,
 * seminorms and the derived symbols of the paradifferential calculus.
 *
 * A Symbol is evaluated on (grid sample j, physical frequency xi) pairs.
 * Three kinds exist:
 *
 *   separable    a = sum_r b_r(x) m_r(xi) with b_r on the grid and m_r a
 *                FreqExpr; exact derivatives in both variables, closed form
 *                at any real xi, and the only kind the low-rank path accepts.
 *   closed_form  arbitrary evaluator that works at any real xi (pull-backs,
 *                sums with non-separable parts).
 *   tabulated    values known on lattice frequencies only (regularized
 *                symbols); refused wherever off-lattice xi are needed.
 *
 * xi-derivatives of non-separable symbols fall back to centered differences
 * with one lattice step, adequate only for symbols smooth at scale 1 in xi.
 */

#include "paracalc/errors.hpp"
#include "paracalc/freq_expr.hpp"
#include "paracalc/littlewood_paley.hpp"
#include "paracalc/spectral_grid.hpp"
#include "paracalc/torus_map.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace paracalc {

struct SymbolTerm {
    GridFunction b;  // x-factor on the grid
    FreqExpr m;      // xi-factor in closed form
};

class Symbol {
public:
    enum class Kind { separable, closed_form, tabulated };
    using Eval = std::function<cplx(std::size_t, const Freq&)>;
    using Column = std::function<std::vector<cplx>(const Freq&)>;
    using PointEval = std::function<cplx(const Point&, const Freq&)>;

    /// sum_r b_r(x) m_r(xi). Checks the declared order on the lattice.
    static Symbol separable(const TorusGrid& grid, std::vector<SymbolTerm> terms, double order, double rho) {
        Symbol s(grid, order, rho, Kind::separable);
        for (auto& t : terms) {
            if (!(t.b.grid() == grid)) throw GridMismatch("symbol term lives on another grid");
            if (!t.m.is_zero()) s.terms_.push_back(std::move(t));
        }
        s.check_order();
        return s;
    }

    /// m(xi) with no x-dependence.
    static Symbol multiplier(const TorusGrid& grid, FreqExpr m, double order) {
        return separable(grid, {{GridFunction::constant(grid, 1.0), std::move(m)}}, order,
                         std::numeric_limits<double>::infinity());
    }

    /// b(x) with no xi-dependence.
    static Symbol x_only(GridFunction b, double rho) {
        const TorusGrid grid = b.grid();
        return separable(grid, {{std::move(b), FreqExpr::constant(1.0)}}, 0.0, rho);
    }

    /// Rank-one b(x) m(xi).
    static Symbol product(GridFunction b, FreqExpr m, double order, double rho) {
        const TorusGrid grid = b.grid();
        return separable(grid, {{std::move(b), std::move(m)}}, order, rho);
    }

    /// Evaluator defined at every real frequency. `column` and `point` are
    /// optional accelerations / extensions.
    static Symbol closed_form(const TorusGrid& grid, double order, double rho, Eval eval, Column column = {},
                              PointEval point = {}) {
        Symbol s(grid, order, rho, Kind::closed_form);
        s.eval_ = std::move(eval);
        s.column_ = std::move(column);
        s.point_ = std::move(point);
        return s;
    }

    /// Evaluator valid on lattice frequencies only.
    static Symbol tabulated(const TorusGrid& grid, double order, double rho, Eval eval, Column column = {}) {
        Symbol s(grid, order, rho, Kind::tabulated);
        s.eval_ = std::move(eval);
        s.column_ = std::move(column);
        return s;
    }

    const TorusGrid& grid() const { return grid_; }
    int dim() const { return grid_.dim(); }
    double order() const { return order_; }
    double rho() const { return rho_; }
    Kind kind() const { return kind_; }
    bool has_rank_decomposition() const { return kind_ == Kind::separable; }
    bool has_closed_form() const { return kind_ != Kind::tabulated; }
    /// Largest x-derivative order exposed exactly.
    int x_derivative_order() const { return kind_ == Kind::separable ? 2 : 0; }

    const std::vector<SymbolTerm>& terms() const {
        if (kind_ != Kind::separable) throw NoRankDecomposition();
        return terms_;
    }

    /// sup over the lattice of |a(x, xi)| (1 + |xi|)^{-m}. Exact scan for
    /// separable symbols (stored at construction), computed on request
    /// otherwise.
    double bound() const {
        if (bound_) return *bound_;
        double m = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const Freq xi = grid_.frequency(i);
            const double w = std::pow(1.0 + norm(xi, dim()), -order_);
            for (const auto& v : column(xi)) m = std::max(m, std::abs(v) * w);
        }
        return m;
    }

    cplx operator()(std::size_t j, const Freq& xi) const {
        if (kind_ == Kind::separable) {
            cplx s{};
            for (const auto& t : terms_) s += t.b.value(j) * t.m(xi, dim());
            return s;
        }
        return eval_(j, xi);
    }

    /// x_j -> a(x_j, xi) over the whole grid.
    std::vector<cplx> column(const Freq& xi) const {
        std::vector<cplx> out(grid_.size());
        if (kind_ == Kind::separable) {
            for (const auto& t : terms_) {
                const cplx mv = t.m(xi, dim());
                if (mv == cplx(0.0)) continue;
                for (std::size_t j = 0; j < out.size(); ++j) out[j] += mv * t.b.value(j);
            }
            return out;
        }
        if (column_) return column_(xi);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = eval_(j, xi);
        return out;
    }

    /// x-Fourier coefficients of the column at xi. Separable symbols combine
    /// the stored coefficients of b_r, so exact spectral zeros are kept.
    std::vector<cplx> column_spectrum(const Freq& xi) const {
        if (kind_ == Kind::separable) {
            std::vector<cplx> out(grid_.size());
            for (const auto& t : terms_) {
                const cplx mv = t.m(xi, dim());
                if (mv == cplx(0.0)) continue;
                const auto c = t.b.coeffs();
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += mv * c[i];
            }
            return out;
        }
        const auto col = column(xi);
        return dft(grid_, col);
    }

    /// a(x, xi) at an arbitrary point and frequency.
    cplx value_at(const Point& x, const Freq& xi) const {
        if (kind_ == Kind::separable) {
            cplx s{};
            for (const auto& t : terms_) s += evaluate_trig(t.b, x) * t.m(xi, dim());
            return s;
        }
        if (!point_) throw FrequencyEvalUnavailable("symbol has no evaluation off the grid");
        return point_(x, xi);
    }
    bool has_point_eval() const { return kind_ == Kind::separable || static_cast<bool>(point_); }

    /// d/d xi_axis: symbolic for separable symbols, centered lattice-step
    /// differences otherwise.
    Symbol xi_derivative(int axis) const {
        if (kind_ == Kind::separable) {
            std::vector<SymbolTerm> out;
            for (const auto& t : terms_) out.push_back({t.b, t.m.derivative(axis)});
            return separable(grid_, std::move(out), order_ - 1.0, rho_);
        }
        const double h = grid_.wavenumber_unit();
        auto shift = [axis, h](Freq xi, double s) {
            xi[static_cast<std::size_t>(axis)] += s * h;
            return xi;
        };
        const Symbol self = *this;
        Eval e = [self, shift, h](std::size_t j, const Freq& xi) {
            return (self(j, shift(xi, 1.0)) - self(j, shift(xi, -1.0))) / (2.0 * h);
        };
        Column c = [self, shift, h](const Freq& xi) {
            auto p = self.column(shift(xi, 1.0));
            const auto q = self.column(shift(xi, -1.0));
            for (std::size_t j = 0; j < p.size(); ++j) p[j] = (p[j] - q[j]) / (2.0 * h);
            return p;
        };
        if (kind_ == Kind::tabulated) return tabulated(grid_, order_ - 1.0, rho_, std::move(e), std::move(c));
        PointEval pe;
        if (point_)
            pe = [self, shift, h](const Point& x, const Freq& xi) {
                return (self.value_at(x, shift(xi, 1.0)) - self.value_at(x, shift(xi, -1.0))) / (2.0 * h);
            };
        return closed_form(grid_, order_ - 1.0, rho_, std::move(e), std::move(c), std::move(pe));
    }

    /// d/d x_axis, spectral on each b_r. Only separable symbols expose it.
    Symbol x_derivative(int axis) const {
        if (kind_ != Kind::separable) throw DerivativeUnavailable("x-derivatives need a rank decomposition");
        std::vector<SymbolTerm> out;
        for (const auto& t : terms_) out.push_back({spectral_derivative(t.b, axis), t.m});
        return separable(grid_, std::move(out), order_, std::max(0.0, rho_ - 1.0));
    }

    Symbol conj() const {
        if (kind_ == Kind::separable) {
            std::vector<SymbolTerm> out;
            for (const auto& t : terms_) {
                std::vector<cplx> v(t.b.values().begin(), t.b.values().end());
                for (auto& z : v) z = std::conj(z);
                out.push_back({GridFunction::from_values(grid_, std::move(v)), t.m.conj()});
            }
            return separable(grid_, std::move(out), order_, rho_);
        }
        const Symbol self = *this;
        return combine(
            *this, *this, order_, rho_, [self](std::size_t j, const Freq& xi) { return std::conj(self(j, xi)); },
            [self](const Freq& xi) {
                auto c = self.column(xi);
                for (auto& z : c) z = std::conj(z);
                return c;
            },
            [self](const Point& x, const Freq& xi) { return std::conj(self.value_at(x, xi)); });
    }

    Symbol scaled(cplx s) const {
        if (kind_ == Kind::separable) {
            std::vector<SymbolTerm> out;
            for (const auto& t : terms_) out.push_back({t.b, s * t.m});
            return separable(grid_, std::move(out), order_, rho_);
        }
        const Symbol self = *this;
        return combine(
            *this, *this, order_, rho_, [self, s](std::size_t j, const Freq& xi) { return s * self(j, xi); },
            [self, s](const Freq& xi) {
                auto c = self.column(xi);
                for (auto& z : c) z *= s;
                return c;
            },
            [self, s](const Point& x, const Freq& xi) { return s * self.value_at(x, xi); });
    }

    friend Symbol operator+(const Symbol& a, const Symbol& b) {
        if (!(a.grid_ == b.grid_)) throw GridMismatch("symbols live on different grids");
        const double order = std::max(a.order_, b.order_);
        const double rho = std::min(a.rho_, b.rho_);
        if (a.kind_ == Kind::separable && b.kind_ == Kind::separable) {
            auto terms = a.terms_;
            terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
            return separable(a.grid_, std::move(terms), order, rho);
        }
        return combine(
            a, b, order, rho, [a, b](std::size_t j, const Freq& xi) { return a(j, xi) + b(j, xi); },
            [a, b](const Freq& xi) {
                auto p = a.column(xi);
                const auto q = b.column(xi);
                for (std::size_t j = 0; j < p.size(); ++j) p[j] += q[j];
                return p;
            },
            [a, b](const Point& x, const Freq& xi) { return a.value_at(x, xi) + b.value_at(x, xi); });
    }

    friend Symbol operator-(const Symbol& a, const Symbol& b) { return a + b.scaled(-1.0); }

    /// Pointwise product a(x, xi) b(x, xi).
    friend Symbol operator*(const Symbol& a, const Symbol& b) {
        if (!(a.grid_ == b.grid_)) throw GridMismatch("symbols live on different grids");
        const double order = a.order_ + b.order_;
        const double rho = std::min(a.rho_, b.rho_);
        if (a.kind_ == Kind::separable && b.kind_ == Kind::separable) {
            std::vector<SymbolTerm> terms;
            for (const auto& s : a.terms_)
                for (const auto& t : b.terms_) {
                    auto m = s.m * t.m;
                    if (m.is_zero()) continue;
                    terms.push_back({pointwise_product(s.b, t.b), std::move(m)});
                }
            return separable(a.grid_, std::move(terms), order, rho);
        }
        return combine(
            a, b, order, rho, [a, b](std::size_t j, const Freq& xi) { return a(j, xi) * b(j, xi); },
            [a, b](const Freq& xi) {
                auto p = a.column(xi);
                const auto q = b.column(xi);
                for (std::size_t j = 0; j < p.size(); ++j) p[j] *= q[j];
                return p;
            },
            [a, b](const Point& x, const Freq& xi) { return a.value_at(x, xi) * b.value_at(x, xi); });
    }

    /// Same symbol with a different declared order / regularity.
    Symbol with_order(double order, double rho) const {
        Symbol s = *this;
        s.order_ = order;
        s.rho_ = rho;
        if (kind_ == Kind::separable) s.check_order();
        return s;
    }

private:
    Symbol(const TorusGrid& grid, double order, double rho, Kind kind)
        : grid_(grid), order_(order), rho_(rho), kind_(kind) {
        if (!(rho >= 0.0)) throw Error("symbol regularity must be >= 0");
        if (!std::isfinite(order)) throw Error("symbol order must be finite");
    }

    static Symbol combine(const Symbol& a, const Symbol& b, double order, double rho, Eval e, Column c, PointEval p) {
        const bool tab = a.kind_ == Kind::tabulated || b.kind_ == Kind::tabulated;
        if (tab) return tabulated(a.grid_, order, rho, std::move(e), std::move(c));
        if (!a.has_point_eval() || !b.has_point_eval()) p = {};
        return closed_form(a.grid_, order, rho, std::move(e), std::move(c), std::move(p));
    }

    void check_order() {
        std::vector<double> bsup;
        for (const auto& t : terms_) bsup.push_back(t.b.sup_norm());
        double m = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const Freq xi = grid_.frequency(i);
            double s = 0.0;
            for (std::size_t r = 0; r < terms_.size(); ++r) s += bsup[r] * std::abs(terms_[r].m(xi, dim()));
            m = std::max(m, s * std::pow(1.0 + norm(xi, dim()), -order_));
        }
        if (!std::isfinite(m)) throw Error("symbol is not bounded by (1 + |xi|)^m on the lattice");
        bound_ = m;
    }

    TorusGrid grid_;
    double order_;
    double rho_;
    Kind kind_;
    std::vector<SymbolTerm> terms_;
    Eval eval_;
    Column column_;
    PointEval point_;
    std::optional<double> bound_;
};

/// psi(zeta, eta) = sum_k P_{<=k-N0}(zeta) phi_k(eta) built from the
/// partition's own profile, with the measured lattice constants eps1 < eps2.
class AdmissibleCutoff {
public:
    explicit AdmissibleCutoff(const DyadicPartition& part, int n0 = 3) : part_(part), n0_(n0) {
        if (n0 < 3) throw Error("admissible cut-off needs N0 >= 3");
        const auto& grid = part.grid();
        for (int k = 0; k <= part.q_max(); ++k) low_.push_back(part.lowpass_table(k - n0));
        for (std::size_t i = 0; i < grid.size(); ++i) radius_.push_back(norm(grid.frequency(i), grid.dim()));
        measure_constants();
    }

    const DyadicPartition& partition() const { return part_; }
    const TorusGrid& grid() const { return part_.grid(); }
    int n0() const { return n0_; }
    double eps1() const { return eps1_; }
    double eps2() const { return eps2_; }

    /// psi on lattice frequencies given by flat coefficient indices.
    double at(std::size_t zeta, std::size_t eta) const {
        double s = 0.0;
        for (int k = 0; k <= part_.q_max(); ++k) {
            const double b = part_.block(k, eta);
            if (b != 0.0) s += b * low_[static_cast<std::size_t>(k)][zeta];
        }
        return s;
    }

    /// psi as a function of the two radii |zeta|, |eta|.
    double operator()(double zeta, double eta) const {
        double s = 0.0;
        for (int k = 0; k <= part_.q_max(); ++k) {
            const double b = part_.block_at(k, eta);
            if (b != 0.0) s += b * part_.lowpass(k - n0_, zeta);
        }
        return s;
    }

    /// Blocks k with phi_k(eta) != 0, with their weights.
    std::vector<std::pair<int, double>> active_blocks(std::size_t eta) const {
        std::vector<std::pair<int, double>> out;
        for (int k = 0; k <= part_.q_max(); ++k)
            if (const double b = part_.block(k, eta); b != 0.0) out.emplace_back(k, b);
        return out;
    }

    /// P_{<=k-N0} tabulated in coefficient order.
    const std::vector<double>& shifted_lowpass(int k) const { return low_.at(static_cast<std::size_t>(k)); }

    static constexpr double plateau_tol = 1e-12;

private:
    // eps1: largest ratio |zeta| / (1 + |eta|) below which psi is 1 on the
    // lattice; eps2: smallest ratio above which psi vanishes.
    void measure_constants() {
        std::set<double> radii(radius_.begin(), radius_.end());
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double re : radii)
            for (double rz : radii) {
                const double v = (*this)(rz, re);
                const double ratio = rz / (1.0 + re);
                if (v < 1.0 - plateau_tol) lo = std::min(lo, ratio);
                if (v > plateau_tol) hi = std::max(hi, ratio);
            }
        eps1_ = lo * (1.0 - 1e-9);
        eps2_ = hi * (1.0 + 1e-9);
        if (!(eps1_ > 0.0 && eps1_ < eps2_ && eps2_ < 1.0))
            throw Error("cut-off constants out of range: eps1 = " + std::to_string(eps1_) +
                        ", eps2 = " + std::to_string(eps2_));
    }

    DyadicPartition part_;
    int n0_;
    std::vector<std::vector<double>> low_;
    std::vector<double> radius_;
    double eps1_ = 0.0;
    double eps2_ = 0.0;
};

namespace detail {

// Multi-indices of total order exactly `n` in dimension d.
inline std::vector<std::array<int, 2>> multi_indices(int n, int d) {
    std::vector<std::array<int, 2>> out;
    if (d == 1) {
        out.push_back({n, 0});
        return out;
    }
    for (int a = n; a >= 0; --a) out.push_back({a, n - a});
    return out;
}

inline Symbol xi_derivative(const Symbol& a, const std::array<int, 2>& alpha) {
    Symbol s = a;
    for (int axis = 0; axis < 2; ++axis)
        for (int t = 0; t < alpha[static_cast<std::size_t>(axis)]; ++t) s = s.xi_derivative(axis);
    return s;
}

inline Symbol x_derivative(const Symbol& a, const std::array<int, 2>& alpha) {
    Symbol s = a;
    for (int axis = 0; axis < 2; ++axis)
        for (int t = 0; t < alpha[static_cast<std::size_t>(axis)]; ++t) s = s.x_derivative(axis);
    return s;
}

// 1 / (i^{|alpha|} alpha!).
inline cplx calculus_weight(const std::array<int, 2>& alpha) {
    const int n = alpha[0] + alpha[1];
    double fact = 1.0;
    for (int a : alpha)
        for (int t = 2; t <= a; ++t) fact *= t;
    cplx ipow(1.0, 0.0);
    for (int t = 0; t < n; ++t) ipow *= cplx(0.0, 1.0);
    return 1.0 / (ipow * fact);
}

// Largest total order |alpha| < rho, capped at 2.
inline int truncation_order(double rho) {
    if (!(rho > 0.0)) throw Error("calculus truncation needs rho > 0");
    if (rho > 3.0) throw DerivativeUnavailable("symbolic calculus is capped at total derivative order 2 (rho <= 3)");
    return static_cast<int>(std::ceil(rho)) - 1;
}

}  // namespace detail

/// Discrete W^{rho,inf} norm of a grid function: the max of the sup norm,
/// sup norms of difference quotients up to order floor(rho), and the
/// Holder quotient of the top difference at lattice scale.
inline double holder_norm(const GridFunction& v, double rho) {
    if (!(rho >= 0.0 && rho < 3.0)) throw Error("holder_norm supports 0 <= rho < 3");
    const auto& grid = v.grid();
    const int c = static_cast<int>(std::floor(rho));
    const double h = grid.spacing();
    const std::size_t n = grid.n();
    double out = v.sup_norm();
    for (int axis = 0; axis < grid.dim(); ++axis) {
        auto shifted = [&](std::size_t j) {
            if (grid.dim() == 1) return (j + 1) % n;
            const std::size_t r = j / n, s = j % n;
            return axis == 0 ? ((r + 1) % n) * n + s : r * n + (s + 1) % n;
        };
        std::vector<cplx> w(v.values().begin(), v.values().end());
        for (int k = 1; k <= c; ++k) {
            std::vector<cplx> next(w.size());
            for (std::size_t j = 0; j < w.size(); ++j) next[j] = (w[shifted(j)] - w[j]) / h;
            w = std::move(next);
            for (const auto& z : w) out = std::max(out, std::abs(z));
        }
        const double scale = std::pow(h, rho - c);
        for (std::size_t j = 0; j < w.size(); ++j) out = std::max(out, std::abs(w[shifted(j)] - w[j]) / scale);
    }
    return out;
}

/// M^m_rho(a): max over |alpha| <= min(floor(d/2) + 1 + floor(rho), 2) and
/// lattice |xi| >= 1 of (1 + |xi|)^{|alpha| - m} ||d^alpha_xi a(., xi)||_{W^rho}.
inline double seminorm(const Symbol& a, double m, double rho) {
    const auto& grid = a.grid();
    const int d = grid.dim();
    const int cap = std::min(d / 2 + 1 + static_cast<int>(std::floor(std::min(rho, 3.0))), 2);
    double out = 0.0;
    for (int n = 0; n <= cap; ++n)
        for (const auto& alpha : detail::multi_indices(n, d)) {
            const Symbol da = detail::xi_derivative(a, alpha);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const Freq xi = grid.frequency(i);
                const double r = norm(xi, d);
                if (r < 1.0) continue;
                auto col = GridFunction::from_values(grid, da.column(xi));
                out = std::max(out, std::pow(1.0 + r, n - m) * holder_norm(col, rho));
            }
        }
    return out;
}

/// a # b = sum_{|alpha| < rho} (1 / (i^{|alpha|} alpha!)) d^alpha_xi a d^alpha_x b.
inline Symbol sharp_product(const Symbol& a, const Symbol& b, double rho) {
    const int top = detail::truncation_order(rho);
    if (top > b.x_derivative_order() && top > 0)
        throw DerivativeUnavailable("sharp product needs x-derivatives of order " + std::to_string(top));
    Symbol out = a * b;
    for (int n = 1; n <= top; ++n)
        for (const auto& alpha : detail::multi_indices(n, a.dim())) {
            const Symbol term = detail::xi_derivative(a, alpha) * detail::x_derivative(b, alpha);
            out = out + term.scaled(detail::calculus_weight(alpha));
        }
    return out.with_order(a.order() + b.order(), std::max(0.0, std::min(a.rho(), b.rho()) - top));
}

/// a^t = sum_{|alpha| < rho} (1 / (i^{|alpha|} alpha!)) d^alpha_xi d^alpha_x conj(a).
inline Symbol adjoint_symbol(const Symbol& a, double rho) {
    const int top = detail::truncation_order(rho);
    if (top > a.x_derivative_order() && top > 0)
        throw DerivativeUnavailable("adjoint symbol needs x-derivatives of order " + std::to_string(top));
    const Symbol abar = a.conj();
    Symbol out = abar;
    for (int n = 1; n <= top; ++n)
        for (const auto& alpha : detail::multi_indices(n, a.dim())) {
            const Symbol term = detail::xi_derivative(detail::x_derivative(abar, alpha), alpha);
            out = out + term.scaled(detail::calculus_weight(alpha));
        }
    return out.with_order(a.order(), std::max(0.0, a.rho() - top));
}

/// a*(x, xi) = a(chi(x), (D chi(x))^{-t} xi).
inline Symbol pullback_symbol(const Symbol& a, const TorusMap& chi) {
    if (!(a.grid() == chi.grid())) throw GridMismatch("symbol and map live on different grids");
    if (!chi.is_diffeo())
        throw NotDiffeomorphism("min det D chi = " + std::to_string(chi.min_jac()) + " <= 1e-6");
    if (!a.has_point_eval()) throw FrequencyEvalUnavailable("pull-back needs a symbol defined off the lattice");
    if (chi.is_identity()) return a;

    struct State {
        Symbol a;
        TorusMap chi;
        std::vector<Mat2> jac;
        std::vector<std::vector<cplx>> b_at_image;  // separable case: b_r(chi(x_j))
        std::vector<Point> image;
    };
    auto st = std::make_shared<State>(State{a, chi, {}, {}, chi.image_points()});
    const auto& grid = a.grid();
    const int d = grid.dim();
    for (std::size_t j = 0; j < grid.size(); ++j) st->jac.push_back(chi.jacobian(j));
    if (a.kind() == Symbol::Kind::separable)
        for (const auto& t : a.terms()) st->b_at_image.push_back(evaluate_trig(t.b, st->image));

    auto at_sample = [st, d](std::size_t j, const Freq& xi) -> cplx {
        const Freq eta = inverse_transpose_apply(st->jac[j], d, xi);
        if (st->a.kind() == Symbol::Kind::separable) {
            cplx s{};
            const auto& terms = st->a.terms();
            for (std::size_t r = 0; r < terms.size(); ++r) s += st->b_at_image[r][j] * terms[r].m(eta, d);
            return s;
        }
        return st->a.value_at(st->image[j], eta);
    };
    Symbol::Column column = [st, at_sample](const Freq& xi) {
        std::vector<cplx> out(st->image.size());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = at_sample(j, xi);
        return out;
    };
    Symbol::PointEval point = [st, d](const Point& x, const Freq& xi) {
        const std::array<Point, 1> p{x};
        const Point y = st->chi.apply(p)[0];
        const Mat2 m = st->chi.jacobian_at(p)[0];
        return st->a.value_at(y, inverse_transpose_apply(m, d, xi));
    };
    return Symbol::closed_form(grid, a.order(), a.rho(), at_sample, column, point);
}

/// sigma^psi_a: per frequency column eta, the x-spectrum of a is multiplied
/// by psi(zeta, eta). Columns are computed on first use and cached.
inline Symbol regularized_symbol(const Symbol& a, const AdmissibleCutoff& psi) {
    if (!(a.grid() == psi.grid())) throw GridMismatch("symbol and cut-off live on different grids");
    struct State {
        State(Symbol s, AdmissibleCutoff c) : a(std::move(s)), psi(std::move(c)) {}
        Symbol a;
        AdmissibleCutoff psi;
        std::mutex mutex;
        std::map<std::size_t, std::shared_ptr<const std::vector<cplx>>> cache;
    };
    auto st = std::make_shared<State>(a, psi);
    const auto grid = a.grid();

    auto column = [st, grid](const Freq& xi) -> std::vector<cplx> {
        const double w = grid.wavenumber_unit();
        const double k0 = xi[0] / w, k1 = xi[1] / w;
        if (std::abs(k0 - std::round(k0)) > 1e-9 || std::abs(k1 - std::round(k1)) > 1e-9)
            throw FrequencyEvalUnavailable("regularized symbol is tabulated on lattice frequencies only");
        const std::size_t eta = grid.flat_of(std::lround(k0), std::lround(k1));
        {
            std::lock_guard lock(st->mutex);
            if (auto it = st->cache.find(eta); it != st->cache.end()) return *it->second;
        }
        auto spec = st->a.column_spectrum(grid.frequency(eta));
        for (std::size_t z = 0; z < spec.size(); ++z) spec[z] *= st->psi.at(z, eta);
        auto values = std::make_shared<const std::vector<cplx>>(idft(grid, spec));
        std::lock_guard lock(st->mutex);
        st->cache.emplace(eta, values);
        return *values;
    };
    Symbol::Eval eval = [column](std::size_t j, const Freq& xi) { return column(xi)[j]; };
    return Symbol::tabulated(grid, a.order(), a.rho(), std::move(eval), std::move(column));
}

/// Builds a symbol from the CLI mini-language: "mult:<m>", "func:<b>" or
/// "prod:<b>:<m>", where <b> names a function already loaded by the caller.
inline Symbol symbol_from_spec(const std::string& spec, const TorusGrid& grid,
                               const std::function<GridFunction(const std::string&)>& load, double rho) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw FormatError("symbol spec '" + spec + "' lacks a kind prefix");
    const std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
    if (kind == "mult") {
        const auto e = parse_freq_expr(rest);
        return Symbol::multiplier(grid, e.expr, e.order);
    }
    if (kind == "func") return Symbol::x_only(load(rest), rho);
    if (kind == "prod") {
        const auto sep = rest.rfind(':');
        if (sep == std::string::npos) throw FormatError("prod symbol needs <file>:<m-expr>");
        const auto e = parse_freq_expr(rest.substr(sep + 1));
        return Symbol::product(load(rest.substr(0, sep)), e.expr, e.order, rho);
    }
    throw FormatError("unknown symbol kind '" + kind + "' (expected mult, func, prod)");
}

}  // namespace paracalc
