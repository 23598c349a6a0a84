#pragma once

/**
 * @file paradiff.hpp
 * @brief Paraproducts, paradifferential quantization (direct and low-rank),
 * operator-order probing and the Bony remainders.
 *
 * Direct quantization on the lattice:
 *
 *     (T_a u)^(xi) = sum_eta psi(xi - eta, eta) a^(xi - eta, eta) u^(eta)
 *
 * with a^(zeta, eta) the x-spectrum of the column a(., eta) and xi - eta
 * wrapped. ParadiffOperator stores the nonzero kernel entries per input
 * frequency, so repeated applications and the exact adjoint reuse them.
 */

#include "paracalc/errors.hpp"
#include "paracalc/littlewood_paley.hpp"
#include "paracalc/spectral_grid.hpp"
#include "paracalc/symbols.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace paracalc {

/// T_a u = sum_{k=1}^{q_max} P_{<=k-1}(D) a * u_k, products on the grid.
inline GridFunction paraproduct(const GridFunction& a, const GridFunction& u, const DyadicPartition& part) {
    a.require_same_grid(u);
    part.require_grid(u);
    std::vector<cplx> acc(u.grid().size());
    for (int k = 1; k <= part.q_max(); ++k) {
        const auto uk = block(u, k, part);
        if (uk.sup_norm() == 0.0) continue;
        const auto ak = low_pass(a, k - 1, part);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += ak.value(j) * uk.value(j);
    }
    return GridFunction::from_values(u.grid(), std::move(acc));
}

/// Largest lattice the direct quantization accepts.
inline constexpr std::size_t direct_lattice_limit = 4096;

class ParadiffOperator {
public:
    ParadiffOperator(const Symbol& a, const AdmissibleCutoff& psi) : grid_(a.grid()) {
        if (!(a.grid() == psi.grid())) throw GridMismatch("symbol and cut-off live on different grids");
        if (grid_.size() > direct_lattice_limit)
            throw GridTooLarge("direct quantization needs 2^{dJ} <= 4096, got " + std::to_string(grid_.size()));
        const std::size_t n = grid_.size();
        kernel_.resize(n);
        parallel_for(n, [&](std::size_t eta) {
            const Freq xi_eta = grid_.frequency(eta);
            const auto k_eta = grid_.lattice(eta);
            std::vector<cplx> spec;
            bool have_spec = false;
            auto& col = kernel_[eta];
            const auto blocks = psi.active_blocks(eta);
            for (std::size_t z = 0; z < n; ++z) {
                double w = 0.0;
                for (const auto& [k, phi] : blocks) w += phi * psi.shifted_lowpass(k)[z];
                if (w == 0.0) continue;
                if (!have_spec) {
                    spec = a.column_spectrum(xi_eta);
                    have_spec = true;
                }
                const cplx v = w * spec[z];
                if (v == cplx(0.0)) continue;
                const auto k_z = grid_.lattice(z);
                col.push_back({grid_.flat_of(k_z[0] + k_eta[0], k_z[1] + k_eta[1]), v});
            }
        }, 8);
    }

    const TorusGrid& grid() const { return grid_; }

    GridFunction apply(const GridFunction& u) const {
        if (!(u.grid() == grid_)) throw GridMismatch();
        std::vector<cplx> out(grid_.size());
        const auto uc = u.coeffs();
        for (std::size_t eta = 0; eta < uc.size(); ++eta) {
            if (uc[eta] == cplx(0.0)) continue;
            for (const auto& [target, v] : kernel_[eta]) out[target] += v * uc[eta];
        }
        return GridFunction::from_coeffs(grid_, std::move(out));
    }

    /// Exact conjugate transpose of the coefficient-space matrix, which is
    /// the L2 adjoint under the normalization in spectral_grid.hpp.
    GridFunction apply_adjoint(const GridFunction& v) const {
        if (!(v.grid() == grid_)) throw GridMismatch();
        std::vector<cplx> out(grid_.size());
        const auto vc = v.coeffs();
        for (std::size_t eta = 0; eta < out.size(); ++eta) {
            cplx s{};
            for (const auto& [target, k] : kernel_[eta]) s += std::conj(k) * vc[target];
            out[eta] = s;
        }
        return GridFunction::from_coeffs(grid_, std::move(out));
    }

private:
    struct Entry {
        std::size_t target;
        cplx value;
    };
    TorusGrid grid_;
    std::vector<std::vector<Entry>> kernel_;
};

inline GridFunction paradiff_apply_direct(const Symbol& a, const GridFunction& u, const AdmissibleCutoff& psi) {
    return ParadiffOperator(a, psi).apply(u);
}

/// sum_k P_{<=k-N0}(D) b * phi_k(D) v: the x-only quantization with the
/// cut-off psi, factorized blockwise.
inline GridFunction paraproduct_with_cutoff(const GridFunction& b, const GridFunction& v, const AdmissibleCutoff& psi) {
    const auto& part = psi.partition();
    std::vector<cplx> acc(v.grid().size());
    for (int k = 0; k <= part.q_max(); ++k) {
        const auto vk = block(v, k, part);
        if (vk.sup_norm() == 0.0) continue;
        const auto bk = fourier_multiplier_table(psi.shifted_lowpass(k), b);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += bk.value(j) * vk.value(j);
    }
    return GridFunction::from_values(v.grid(), std::move(acc));
}

/// sum_r T^psi_{b_r}(m_r(D) u) for a rank-decomposed symbol.
inline GridFunction paradiff_apply_lowrank(const Symbol& a, const GridFunction& u, const AdmissibleCutoff& psi) {
    if (!a.has_rank_decomposition()) throw NoRankDecomposition();
    if (!(a.grid() == u.grid()) || !(psi.grid() == u.grid())) throw GridMismatch();
    GridFunction out(u.grid());
    const int d = u.grid().dim();
    for (const auto& t : a.terms()) {
        const auto mu = fourier_multiplier([&](const Freq& xi) { return t.m(xi, d); }, u);
        out += paraproduct_with_cutoff(t.b, mu, psi);
    }
    return out;
}

using Operator = std::function<GridFunction(const GridFunction&)>;

struct OrderProbeResult {
    double fitted_order = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<int, double>> per_band_gains;  // (j, log2 gain); -inf when annihilated
    double fit_residual = std::numeric_limits<double>::infinity();
    bool degenerate = true;
    std::uint64_t seed = 0;
};

/// Real unit-L2 probe with coefficients phi_j(xi) e^{i theta_xi}.
inline GridFunction band_probe(const DyadicPartition& part, int j, std::mt19937_64& rng) {
    const auto& grid = part.grid();
    const long half = static_cast<long>(grid.n()) / 2;
    const auto& phi = part.block_table(j);
    std::vector<cplx> c(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (phi[i] == 0.0) continue;
        const auto k = grid.lattice(i);
        if (k[0] == -half || k[1] == -half) continue;
        if (!(k[0] > 0 || (k[0] == 0 && k[1] > 0))) continue;
        const double theta = two_pi * static_cast<double>(rng() >> 11) * 0x1.0p-53;
        c[i] = std::polar(phi[i], theta);
        c[grid.flat_of(-k[0], -k[1])] = std::conj(c[i]);
    }
    auto f = GridFunction::from_coeffs(grid, std::move(c));
    const double n = f.l2_norm();
    if (n > 0.0) f *= cplx(1.0 / n);
    return f;
}

/// Slope of log2 ||T e_j||_{L2} against j over bands j in [2, q_max - 1],
/// e_j a seeded unit probe in block j. Bands whose output falls below
/// 1e-13 are dropped; with fewer than four left the result is degenerate.
inline OrderProbeResult probe_operator_order(const Operator& T, const DyadicPartition& part, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    OrderProbeResult res;
    res.seed = seed;

    for (int t = 0; t < 3; ++t) {
        const int j1 = 2 + t % std::max(1, part.q_max() - 2);
        const auto u = band_probe(part, j1, rng);
        const auto v = band_probe(part, std::min(j1 + 1, part.q_max()), rng);
        const double alpha = 0.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double beta = -1.0 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
        auto comb = alpha * u;
        comb.axpy(beta, v);
        const auto Tu = T(u), Tv = T(v), Tc = T(comb);
        auto diff = Tc;
        diff.axpy(-alpha, Tu);
        diff.axpy(-beta, Tv);
        const double scale = Tc.l2_norm() + std::abs(alpha) * Tu.l2_norm() + std::abs(beta) * Tv.l2_norm();
        if (diff.l2_norm() > 1e-8 * std::max(scale, 1e-300))
            throw NonlinearOperator("operator fails linearity: defect " + std::to_string(diff.l2_norm()) +
                                    " against scale " + std::to_string(scale));
    }

    std::vector<double> js, gs;
    for (int j = 2; j <= part.q_max() - 1; ++j) {
        const auto e = band_probe(part, j, rng);
        const double gain = T(e).l2_norm();
        const double g = gain > 0.0 ? std::log2(gain) : -std::numeric_limits<double>::infinity();
        res.per_band_gains.emplace_back(j, g);
        if (gain > block_floor) {
            js.push_back(j);
            gs.push_back(g);
        }
    }
    if (js.size() < 4) return res;

    const double n = static_cast<double>(js.size());
    double mj = 0.0, mg = 0.0;
    for (std::size_t i = 0; i < js.size(); ++i) {
        mj += js[i];
        mg += gs[i];
    }
    mj /= n;
    mg /= n;
    double sjj = 0.0, sjg = 0.0;
    for (std::size_t i = 0; i < js.size(); ++i) {
        sjj += (js[i] - mj) * (js[i] - mj);
        sjg += (js[i] - mj) * (gs[i] - mg);
    }
    const double slope = sjg / sjj;
    double ss = 0.0;
    for (std::size_t i = 0; i < js.size(); ++i) {
        const double e = gs[i] - (mg + slope * (js[i] - mj));
        ss += e * e;
    }
    res.fitted_order = slope;
    res.fit_residual = std::sqrt(ss / n);
    res.degenerate = false;
    return res;
}

/// ab - T_a b - T_b a.
inline GridFunction bony_product_remainder(const GridFunction& a, const GridFunction& b, const DyadicPartition& part) {
    auto out = pointwise_product(a, b);
    out -= paraproduct(a, b, part);
    out -= paraproduct(b, a, part);
    return out;
}

using ScalarFunction = std::function<cplx(cplx)>;

/// F(a) - F(0) - T_{F'(a)} a.
inline GridFunction bony_composition_remainder(const ScalarFunction& F, const ScalarFunction& dF, const GridFunction& a,
                                               const DyadicPartition& part) {
    const auto& grid = a.grid();
    std::vector<cplx> fa(grid.size()), dfa(grid.size());
    const cplx f0 = F(0.0);
    for (std::size_t j = 0; j < fa.size(); ++j) {
        fa[j] = F(a.value(j)) - f0;
        dfa[j] = dF(a.value(j));
    }
    auto out = GridFunction::from_values(grid, std::move(fa));
    out -= paraproduct(GridFunction::from_values(grid, std::move(dfa)), a, part);
    return out;
}

}  // namespace paracalc
