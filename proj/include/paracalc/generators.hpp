#pragma once

/**
 * @file generators.hpp
 * @brief Seeded test functions and maps with prescribed block norms.
 *
 * Every construction places its energy on lattice frequencies where exactly
 * one partition block equals 1, so advertised block norms hold to round-off
 * rather than statistically. Phases are grid-aligned shifts: a mode
 * cos(2^k (x + s)) with s a grid point reaches its peak on the grid.
 */

#include "paracalc/errors.hpp"
#include "paracalc/littlewood_paley.hpp"
#include "paracalc/spectral_grid.hpp"
#include "paracalc/torus_map.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace paracalc {

namespace detail {

// Adds amp * cos(k . (x + shift)) to a coefficient array.
inline void add_cosine(const TorusGrid& grid, std::vector<cplx>& c, long k0, long k1, double amp, double phase) {
    const cplx e = std::polar(0.5 * amp, phase);
    c[grid.flat_of(k0, k1)] += e;
    c[grid.flat_of(-k0, -k1)] += std::conj(e);
}

inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

inline double draw_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// sum_{k=1}^{K} 2^{-k sigma} cos(2^k (x + s_k)) with seeded grid shifts s_k;
/// in d = 2 the half-sum of an x-series and an independent y-series. Block
/// q of the result has sup norm exactly 2^{-q sigma} for 1 <= q <= K.
inline GridFunction weierstrass(double sigma, int K, const TorusGrid& grid, std::uint64_t seed = 0) {
    if (K < 1 || K > grid.depth() - 2)
        throw BandOverflow("weierstrass needs 1 <= K <= J - 2, got K = " + std::to_string(K));
    if (!(sigma > 0.0)) throw Error("weierstrass needs sigma > 0");
    std::mt19937_64 rng(seed);
    const auto n = grid.n();
    const double h = grid.spacing();
    const double w = grid.wavenumber_unit();
    std::vector<cplx> c(grid.size());
    const double share = grid.dim() == 1 ? 1.0 : 0.5;
    for (int k = 1; k <= K; ++k) {
        const long f = 1L << k;
        const double amp = share * std::exp2(-k * sigma);
        for (int axis = 0; axis < grid.dim(); ++axis) {
            const double shift = h * static_cast<double>(detail::draw(rng, n));
            const double phase = w * static_cast<double>(f) * shift;
            if (axis == 0)
                detail::add_cosine(grid, c, f, 0, amp, phase);
            else
                detail::add_cosine(grid, c, 0, f, amp, phase);
        }
    }
    return GridFunction::from_coeffs(grid, std::move(c));
}

/// Random real series with ||u_q||_{L2} = 2^{-q s} for 1 <= q <= q_max.
/// Each block spreads uniform magnitude with seeded phases over the lattice
/// frequencies where phi_q is identically 1 (Nyquist excluded).
inline GridFunction sobolev_series(double s, const TorusGrid& grid, std::uint64_t seed = 0) {
    const DyadicPartition part(grid);
    std::mt19937_64 rng(seed);
    const long half = static_cast<long>(grid.n()) / 2;
    std::vector<cplx> c(grid.size());
    const double vol = std::pow(grid.length(), grid.dim());
    for (int q = 1; q <= part.q_max(); ++q) {
        std::vector<std::size_t> reps;
        const auto& phi = part.block_table(q);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (phi[i] != 1.0) continue;
            const auto k = grid.lattice(i);
            if (k[0] == -half || k[1] == -half) continue;
            if (k[0] > 0 || (k[0] == 0 && k[1] > 0)) reps.push_back(i);
        }
        if (reps.empty()) throw BandOverflow("block " + std::to_string(q) + " has no plateau frequency");
        const double mag = std::exp2(-q * s) / std::sqrt(vol * 2.0 * static_cast<double>(reps.size()));
        for (std::size_t i : reps) {
            const auto k = grid.lattice(i);
            const double theta = two_pi * detail::draw_unit(rng);
            const cplx e = std::polar(mag, theta);
            c[i] = e;
            c[grid.flat_of(-k[0], -k[1])] = std::conj(e);
        }
    }
    return GridFunction::from_coeffs(grid, std::move(c));
}

/// chi = id + g with g = eps sum_{k=1}^{K} 2^{-k(1+rho)} cos(2^k (x + s_k))
/// per axis (half x-series plus half y-series in d = 2), seeded shifts.
inline TorusMap torus_diffeo(double rho, double eps, int K, const TorusGrid& grid, std::uint64_t seed = 0) {
    if (!(eps >= 0.0 && eps <= 0.4)) throw Error("torus_diffeo needs 0 <= eps <= 0.4");
    if (K < 1 || K > grid.depth() - 3)
        throw BandOverflow("torus_diffeo needs 1 <= K <= J - 3, got K = " + std::to_string(K));
    std::mt19937_64 rng(seed);
    const auto n = grid.n();
    const double h = grid.spacing();
    const double w = grid.wavenumber_unit();
    const double share = grid.dim() == 1 ? 1.0 : 0.5;
    std::vector<GridFunction> g;
    for (int out = 0; out < grid.dim(); ++out) {
        std::vector<cplx> c(grid.size());
        for (int k = 1; k <= K; ++k) {
            const long f = 1L << k;
            const double amp = share * eps * std::exp2(-k * (1.0 + rho));
            for (int axis = 0; axis < grid.dim(); ++axis) {
                const double shift = h * static_cast<double>(detail::draw(rng, n));
                const double phase = w * static_cast<double>(f) * shift;
                if (axis == 0)
                    detail::add_cosine(grid, c, f, 0, amp, phase);
                else
                    detail::add_cosine(grid, c, 0, f, amp, phase);
            }
        }
        g.push_back(GridFunction::from_coeffs(grid, std::move(c)));
    }
    TorusMap chi(grid, std::move(g));
    if (chi.sup_displacement_gradient() >= 0.95)
        throw NotContractive("sup |Dg| = " + std::to_string(chi.sup_displacement_gradient()) + " >= 0.95");
    return chi;
}

/// Periodic C-infinity bump exp(1 - 1/(1 - r^2)) of the given width around
/// `center` (r = distance / width), height 1.
inline GridFunction bump(double width, double center, const TorusGrid& grid) {
    if (!(width > 0.0)) throw Error("bump width must be positive");
    auto wrap = [&](double x) {
        const double L = grid.length();
        double t = std::fmod(x - center, L);
        if (t < -L / 2) t += L;
        if (t > L / 2) t -= L;
        return t;
    };
    return GridFunction::sample(grid, [&](const Point& p) {
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const double t = wrap(p[static_cast<std::size_t>(a)]) / width;
            r2 += t * t;
        }
        return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
    });
}

enum class GeneratorKind { weierstrass, sobolev_series, diffeo, bump };

inline GeneratorKind parse_generator_kind(const std::string& s) {
    if (s == "weierstrass") return GeneratorKind::weierstrass;
    if (s == "sobolev_series") return GeneratorKind::sobolev_series;
    if (s == "diffeo") return GeneratorKind::diffeo;
    if (s == "bump") return GeneratorKind::bump;
    throw FormatError("unknown generator kind '" + s + "'");
}

inline std::string to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::weierstrass: return "weierstrass";
        case GeneratorKind::sobolev_series: return "sobolev_series";
        case GeneratorKind::diffeo: return "diffeo";
        case GeneratorKind::bump: return "bump";
    }
    return "?";
}

/// Kind-specific parameters:
///   weierstrass:    regularity = sigma, bands = K
///   sobolev_series: regularity = s
///   diffeo:         regularity = rho, amplitude = eps, bands = K
///   bump:           amplitude = width, center = center
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::weierstrass;
    double regularity = 0.5;
    double amplitude = 0.3;
    double center = 0.0;
    int bands = 4;
    std::uint64_t seed = 0;
};

inline std::variant<GridFunction, TorusMap> generate(const GeneratorSpec& spec, const TorusGrid& grid) {
    switch (spec.kind) {
        case GeneratorKind::weierstrass: return weierstrass(spec.regularity, spec.bands, grid, spec.seed);
        case GeneratorKind::sobolev_series: return sobolev_series(spec.regularity, grid, spec.seed);
        case GeneratorKind::diffeo:
            return torus_diffeo(spec.regularity, spec.amplitude, spec.bands, grid, spec.seed);
        case GeneratorKind::bump: return bump(spec.amplitude, spec.center, grid);
    }
    throw Error("unreachable generator kind");
}

}  // namespace paracalc
