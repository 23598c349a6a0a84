#pragma once

/**
 * @file paracomposition.hpp
 * @brief Paracomposition operators, the paralinearization of u o chi and the
 * defects measuring the functorial and conjugation properties.
 *
 * Low-passes and blocks of a map act on its periodic displacement g, so
 * Phi_k chi = id + P_{<=k}(D) g. With S_k = P_{<=k}(D) u and g_k = phi_k(D) g
 * the exact discrete identity behind paralinearize() is
 *
 *     u o chi = sum_{k=1}^{Q} [S_{k-1}(Phi_k chi) - S_{k-1}(Phi_{k-1} chi)]
 *             + sum_{k=0}^{Q} u_k(Phi_k chi),
 *
 * which telescopes because Phi_Q chi = chi and S_Q = u. The first sum is
 * T_{u' o chi} chi + R0 (mean value form along the segment Phi_{k-1} chi +
 * tau g_k); the second splits into chi^* u + R1 + R2 by inserting
 * P_{<=k+N}(D). Nothing is left over, so the bookkeeping term is zero and the
 * residual only sees quadrature and round-off.
 */

#include "paracalc/errors.hpp"
#include "paracalc/littlewood_paley.hpp"
#include "paracalc/paradiff.hpp"
#include "paracalc/spectral_grid.hpp"
#include "paracalc/symbols.hpp"
#include "paracalc/torus_map.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace paracalc {

/// x -> x + P_{<=k}(D) g.
inline TorusMap smoothed_map(const TorusMap& chi, int k, const DyadicPartition& part) {
    if (k < 0) throw Error("smoothed_map needs k >= 0");
    if (k >= part.q_max() || chi.is_identity()) return chi;
    std::vector<GridFunction> g;
    for (int a = 0; a < chi.dim(); ++a) g.push_back(low_pass(chi.displacement(a), k, part));
    return TorusMap(chi.grid(), std::move(g));
}

/// Smallest N >= 2 with 2^N > s under the rule N = ceil(log2 s) + 1.
inline int n_from_bound(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error("derivative bound must be positive and finite");
    return std::max(2, static_cast<int>(std::ceil(std::log2(s))) + 1);
}

/// max over k <= q_max and grid points of ||D Phi_k chi||.
inline double smoothed_jacobian_bound(const TorusMap& chi, const DyadicPartition& part) {
    double s = 0.0;
    for (int k = 0; k <= part.q_max(); ++k) s = std::max(s, smoothed_map(chi, k, part).sup_jacobian_norm());
    return s;
}

inline int select_N(const TorusMap& chi, const DyadicPartition& part) {
    return n_from_bound(smoothed_jacobian_bound(chi, part));
}

/// Two-sided rule: bounds both ||D Phi_k chi|| and ||(D Phi_k chi)^{-1}||.
inline int select_Ntilde(const TorusMap& chi, const DyadicPartition& part) {
    double s = 0.0;
    for (int k = 0; k <= part.q_max(); ++k) {
        const auto m = smoothed_map(chi, k, part);
        const double inv = m.sup_inverse_jacobian_norm();
        if (!std::isfinite(inv)) throw NotDiffeomorphism("a smoothed map has a singular Jacobian");
        s = std::max({s, m.sup_jacobian_norm(), inv});
    }
    return n_from_bound(s);
}

namespace detail {

// u_k o chi on the grid; exact copy for the identity map.
inline GridFunction compose_block(const GridFunction& uk, const TorusMap& chi, const std::vector<Point>& image) {
    if (chi.is_identity()) return uk;
    return compose_on_grid(uk, image);
}

}  // namespace detail

/// chi^* u = sum_k P_{<=k+N}(D)(u_k o chi).
inline GridFunction paracompose_new(const GridFunction& u, const TorusMap& chi, const DyadicPartition& part,
                                    std::optional<int> N = std::nullopt) {
    part.require_grid(u);
    if (!(chi.grid() == u.grid())) throw GridMismatch("map and function live on different grids");
    const int n = N ? *N : select_N(chi, part);
    if (n < 2) throw Error("paracomposition needs N >= 2");
    const auto image = chi.image_points();
    GridFunction out(u.grid());
    for (int k = 0; k <= part.q_max(); ++k) {
        const auto uk = block(u, k, part);
        if (uk.sup_norm() == 0.0) continue;
        out += low_pass(detail::compose_block(uk, chi, image), k + n, part);
    }
    return out;
}

/// Alinhac's operator: sum_k sum_{|l-k| <= Ntilde} phi_l(D)(u_k o chi). The
/// k = 0 column (l in [0, Ntilde]) is kept so the identity map returns u.
inline GridFunction paracompose_alinhac(const GridFunction& u, const TorusMap& chi, const DyadicPartition& part,
                                        std::optional<int> Ntilde = std::nullopt) {
    part.require_grid(u);
    if (!(chi.grid() == u.grid())) throw GridMismatch("map and function live on different grids");
    if (!chi.is_diffeo()) throw NotDiffeomorphism("Alinhac paracomposition needs a diffeomorphism");
    const int n = Ntilde ? *Ntilde : select_Ntilde(chi, part);
    if (n < 2) throw Error("paracomposition needs Ntilde >= 2");
    const auto image = chi.image_points();
    const auto& grid = u.grid();
    GridFunction out(grid);
    for (int k = 0; k <= part.q_max(); ++k) {
        const auto uk = block(u, k, part);
        if (uk.sup_norm() == 0.0) continue;
        std::vector<double> window(grid.size(), 0.0);
        for (int l = std::max(0, k - n); l <= std::min(part.q_max(), k + n); ++l) {
            const auto& phi = part.block_table(l);
            for (std::size_t i = 0; i < window.size(); ++i) window[i] += phi[i];
        }
        out += fourier_multiplier_table(window, detail::compose_block(uk, chi, image));
    }
    return out;
}

struct ComponentReport {
    std::string name;
    std::optional<RegularityReport> report;  // empty when the component is identically zero
    bool degenerate = false;
};

struct ParalinearizationResult {
    GridFunction composed;     // u o chi
    GridFunction chi_star_u;
    GridFunction T_term;
    GridFunction R0, R1, R2;
    GridFunction bookkeeping;
    double residual = 0.0;
    int N_used = 2;
    std::vector<ComponentReport> reports;
};

struct FitOptions {
    NormKind kind = NormKind::zygmund;
    int q_min = 1;
    int q_max = -1;  // -1: partition top block
};

/// Fits one component; degenerate spectra are recorded, not thrown.
inline ComponentReport fit_component(const std::string& name, const GridFunction& f, const DyadicPartition& part,
                                     const FitOptions& fit) {
    ComponentReport rep{name, std::nullopt, false};
    const int top = fit.q_max < 0 ? part.q_max() : fit.q_max;
    try {
        rep.report = fit_regularity(f, part, fit.kind, fit.q_min, top);
    } catch (const DegenerateSpectrum& e) {
        rep.report = e.report();
        rep.degenerate = true;
    }
    return rep;
}

struct ParalinearizeOptions {
    std::optional<int> N;  // default select_N
    FitOptions fit;
    int quadrature_nodes = 8;
};

namespace detail {

// Gauss-Legendre nodes and weights mapped to [0, 1], by Newton iteration on
// the Legendre recurrence.
inline std::vector<std::pair<double, double>> gauss_legendre(int n) {
    if (n < 1) throw Error("quadrature needs at least one node");
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[static_cast<std::size_t>(i)] = {0.5 * (1.0 - x), 0.5 * w};
        out[static_cast<std::size_t>(n - 1 - i)] = {0.5 * (1.0 + x), 0.5 * w};
    }
    return out;
}

}  // namespace detail

/// Paralinearization u o chi = chi^* u + T_{u' o chi} chi + R0 + R1 + R2.
inline ParalinearizationResult paralinearize(const GridFunction& u, const TorusMap& chi, const DyadicPartition& part,
                                             const ParalinearizeOptions& opt = {}) {
    part.require_grid(u);
    if (!(chi.grid() == u.grid())) throw GridMismatch("map and function live on different grids");
    if (!u.is_real()) throw Error("paralinearize expects a real function");
    const auto& grid = u.grid();
    const int d = grid.dim();
    const int Q = part.q_max();
    const int n = opt.N ? *opt.N : select_N(chi, part);
    if (n < 2) throw Error("paralinearization needs N >= 2");
    for (const auto& g : chi.displacements())
        for (const auto& v : g.values())
            if (!std::isfinite(v.real())) throw QuadratureFailure("map displacement is not finite");

    std::vector<TorusMap> smooth;
    for (int k = 0; k <= Q; ++k) smooth.push_back(smoothed_map(chi, k, part));
    std::vector<std::vector<Point>> smooth_pts;
    for (const auto& m : smooth) smooth_pts.push_back(m.image_points());
    const auto& image = smooth_pts.back();

    ParalinearizationResult res{compose_on_grid(u, image), GridFunction(grid), GridFunction(grid), GridFunction(grid),
                                GridFunction(grid), GridFunction(grid), GridFunction(grid), 0.0, n, {}};
    if (chi.is_identity()) res.composed = u;

    std::vector<GridFunction> du, du_chi;
    for (int a = 0; a < d; ++a) {
        du.push_back(spectral_derivative(u, a));
        du_chi.push_back(chi.is_identity() ? du.back() : compose_on_grid(du.back(), image));
    }

    const auto gl = detail::gauss_legendre(opt.quadrature_nodes);
    for (int k = 1; k <= Q; ++k) {
        std::vector<GridFunction> gk;
        bool any = false;
        for (int a = 0; a < d; ++a) {
            gk.push_back(block(chi.displacement(a), k, part));
            any = any || gk.back().sup_norm() != 0.0;
        }
        if (!any) continue;
        std::vector<cplx> t_acc(grid.size()), r_acc(grid.size());
        for (int a = 0; a < d; ++a) {
            const auto low_du_chi = low_pass(du_chi[static_cast<std::size_t>(a)], k - 1, part);
            const auto low_du = low_pass(du[static_cast<std::size_t>(a)], k - 1, part);
            const auto& g = gk[static_cast<std::size_t>(a)];
            const auto& base = smooth_pts[static_cast<std::size_t>(k - 1)];
            const double scale = std::max(1.0, low_du.sup_norm());
            std::vector<cplx> integral(grid.size()), prev;
            for (const auto& [tau, w] : gl) {
                std::vector<Point> pts(base);
                for (std::size_t j = 0; j < pts.size(); ++j)
                    for (int b = 0; b < d; ++b)
                        pts[j][static_cast<std::size_t>(b)] += tau * gk[static_cast<std::size_t>(b)].value(j).real();
                const auto vals = evaluate_trig(low_du, pts);
                for (std::size_t j = 0; j < vals.size(); ++j) {
                    if (!std::isfinite(vals[j].real()) || !std::isfinite(vals[j].imag()) ||
                        (!prev.empty() && std::abs(vals[j] - prev[j]) > 1e3 * scale))
                        throw QuadratureFailure("tau-integrand varies too fast at block " + std::to_string(k));
                    integral[j] += w * vals[j];
                }
                prev = vals;
            }
            for (std::size_t j = 0; j < grid.size(); ++j) {
                t_acc[j] += low_du_chi.value(j) * g.value(j);
                r_acc[j] += (integral[j] - low_du_chi.value(j)) * g.value(j);
            }
        }
        res.T_term += GridFunction::from_values(grid, std::move(t_acc));
        res.R0 += GridFunction::from_values(grid, std::move(r_acc));
    }

    for (int k = 0; k <= Q; ++k) {
        const auto uk = block(u, k, part);
        if (uk.sup_norm() == 0.0) continue;
        const auto on_chi = chi.is_identity() ? uk : compose_on_grid(uk, image);
        const auto& sm = smooth[static_cast<std::size_t>(k)];
        const auto on_smooth = sm.is_identity() ? uk : compose_on_grid(uk, smooth_pts[static_cast<std::size_t>(k)]);
        res.chi_star_u += low_pass(on_chi, k + n, part);
        res.R1 += low_pass(on_smooth - on_chi, k + n, part);
        res.R2 += high_pass(on_smooth, k + n, part);
    }

    GridFunction total = res.chi_star_u;
    total += res.T_term;
    total += res.R0;
    total += res.R1;
    total += res.R2;
    total += res.bookkeeping;
    res.residual = (res.composed - total).sup_norm() / std::max(res.composed.sup_norm(), 1e-300);

    res.reports.push_back(fit_component("R0", res.R0, part, opt.fit));
    res.reports.push_back(fit_component("R1", res.R1, part, opt.fit));
    res.reports.push_back(fit_component("R2", res.R2, part, opt.fit));
    return res;
}

/// chi~^* (chi^* u) - (chi o chi~)^* u, where (chi o chi~)(x) = chi(chi~(x)).
inline GridFunction functorial_defect(const GridFunction& u, const TorusMap& chi, const TorusMap& chitilde,
                                      const DyadicPartition& part, std::optional<int> N = std::nullopt) {
    if (chi.is_identity() || chitilde.is_identity()) return GridFunction(u.grid());
    const auto both = compose(chi, chitilde);
    auto out = paracompose_new(paracompose_new(u, chi, part, N), chitilde, part, N);
    out -= paracompose_new(u, both, part, N);
    return out;
}

/// u -> chi^*(T_a u) - T_{a*}(chi^* u) with a* the pulled-back symbol. Both
/// quantizations are assembled once, so the returned operator is cheap to
/// apply repeatedly.
inline Operator conjugation_defect_operator(const Symbol& a, const TorusMap& chi, const DyadicPartition& part,
                                           const AdmissibleCutoff& psi, std::optional<int> N = std::nullopt) {
    if (!chi.is_diffeo()) throw NotDiffeomorphism("conjugation needs a diffeomorphism");
    // Both sides are the same computation for the identity map.
    if (chi.is_identity()) return [](const GridFunction& u) { return GridFunction(u.grid()); };
    const auto a_star = pullback_symbol(a, chi);
    const int n = N ? *N : select_N(chi, part);
    auto Ta = std::make_shared<ParadiffOperator>(a, psi);
    auto Tstar = std::make_shared<ParadiffOperator>(a_star, psi);
    return [Ta, Tstar, chi, part, n](const GridFunction& u) {
        auto out = paracompose_new(Ta->apply(u), chi, part, n);
        out -= Tstar->apply(paracompose_new(u, chi, part, n));
        return out;
    };
}

inline GridFunction conjugation_defect(const Symbol& a, const GridFunction& u, const TorusMap& chi,
                                       const DyadicPartition& part, const AdmissibleCutoff& psi,
                                       std::optional<int> N = std::nullopt) {
    return conjugation_defect_operator(a, chi, part, psi, N)(u);
}

}  // namespace paracalc
