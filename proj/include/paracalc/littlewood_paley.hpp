#pragma once

/**
 * @file littlewood_paley.hpp
 * @brief Dyadic partition of unity on the discrete frequency lattice, block
 * decompositions, Zygmund/Sobolev block norms and regularity fits.
 *
 * The low-pass family is P_{<=k}(xi) = P0(2^{-k} |xi|) built from a smooth
 * radial profile P0 equal to 1 on |xi| <= 1.1 and 0 on |xi| >= 1.9. Blocks
 * are phi_0 = P0 and phi_q = P_{<=q} - P_{<=q-1}; the top block
 * q_max = J - 2 absorbs the whole tail, phi_{q_max} = 1 - P_{<=q_max-1}, so
 * the discrete partition sums to one on the lattice.
 */

#include "paracalc/errors.hpp"
#include "paracalc/spectral_grid.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace paracalc {

/// Radial profile r -> P0(r).
using RadialProfile = std::function<double(double)>;

/// C-infinity transition built from exp(-1/t): 1 for r <= inner, 0 for
/// r >= outer, monotone in between.
inline double smooth_step_down(double r, double inner = 1.1, double outer = 1.9) {
    if (r <= inner) return 1.0;
    if (r >= outer) return 0.0;
    const double t = (r - inner) / (outer - inner);
    const double a = std::exp(-1.0 / (1.0 - t));
    const double b = std::exp(-1.0 / t);
    return a / (a + b);
}

inline RadialProfile default_profile() {
    return [](double r) { return smooth_step_down(r); };
}

class DyadicPartition {
public:
    explicit DyadicPartition(const TorusGrid& grid, RadialProfile profile = default_profile())
        : grid_(grid), profile_(std::move(profile)), q_max_(grid.depth() - 2) {
        radius_.resize(grid.size());
        for (std::size_t i = 0; i < radius_.size(); ++i) radius_[i] = norm(grid.frequency(i), grid.dim());
        phi_.resize(static_cast<std::size_t>(q_max_) + 1);
        std::vector<double> prev = lowpass_table(0);
        phi_[0] = prev;
        for (int q = 1; q <= q_max_; ++q) {
            std::vector<double> cur = lowpass_table(q);
            auto& t = phi_[static_cast<std::size_t>(q)];
            t.resize(cur.size());
            for (std::size_t i = 0; i < cur.size(); ++i) t[i] = cur[i] - prev[i];
            prev = std::move(cur);
        }
    }

    const TorusGrid& grid() const { return grid_; }
    int q_max() const { return q_max_; }
    double profile(double r) const { return profile_(r); }

    /// phi_q tabulated in coefficient order.
    const std::vector<double>& block_table(int q) const { return phi_.at(static_cast<std::size_t>(q)); }
    double block(int q, std::size_t flat) const { return phi_.at(static_cast<std::size_t>(q))[flat]; }

    /// P_{<=k} in coefficient order for any integer k. k >= q_max gives the
    /// identity; negative k shrinks the plateau to the zero frequency.
    std::vector<double> lowpass_table(int k) const {
        std::vector<double> t(grid_.size());
        if (k >= q_max_) {
            std::fill(t.begin(), t.end(), 1.0);
            return t;
        }
        const double scale = std::ldexp(1.0, -k);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = profile_(scale * radius_[i]);
        return t;
    }

    /// P_{<=k}(xi) at a physical frequency radius.
    double lowpass(int k, double radius) const {
        if (k >= q_max_) return 1.0;
        return profile_(std::ldexp(radius, -k));
    }

    /// phi_q(xi) at a physical frequency radius.
    double block_at(int q, double radius) const {
        if (q == 0) return lowpass(0, radius);
        if (q >= q_max_) return 1.0 - lowpass(q_max_ - 1, radius);
        return lowpass(q, radius) - lowpass(q - 1, radius);
    }

    void require_grid(const GridFunction& f) const {
        if (!(f.grid() == grid_)) throw GridMismatch("function grid does not match partition grid");
    }

private:
    TorusGrid grid_;
    RadialProfile profile_;
    int q_max_;
    std::vector<double> radius_;
    std::vector<std::vector<double>> phi_;
};

struct BlockDecomposition {
    GridFunction source;
    std::vector<GridFunction> blocks;  // u_q, q = 0..q_max
    std::vector<double> sup;           // sup_j |u_q(x_j)|
    std::vector<double> l2;            // ||u_q||_{L2}

    int q_max() const { return static_cast<int>(blocks.size()) - 1; }

    GridFunction sum() const {
        GridFunction s(source.grid());
        for (const auto& b : blocks) s += b;
        return s;
    }
};

inline BlockDecomposition decompose(const GridFunction& f, const DyadicPartition& part) {
    part.require_grid(f);
    BlockDecomposition dec{f, {}, {}, {}};
    const int qm = part.q_max();
    dec.blocks.reserve(static_cast<std::size_t>(qm) + 1);
    for (int q = 0; q <= qm; ++q) {
        dec.blocks.push_back(fourier_multiplier_table(part.block_table(q), f));
        dec.sup.push_back(dec.blocks.back().sup_norm());
        dec.l2.push_back(dec.blocks.back().l2_norm());
    }
    return dec;
}

/// P_{<=k}(D) f. Returns f unchanged for k >= q_max; negative k keeps only
/// the mean.
inline GridFunction low_pass(const GridFunction& f, int k, const DyadicPartition& part) {
    part.require_grid(f);
    if (k >= part.q_max()) return f;
    return fourier_multiplier_table(part.lowpass_table(k), f);
}

/// (Id - P_{<=k})(D) f.
inline GridFunction high_pass(const GridFunction& f, int k, const DyadicPartition& part) {
    part.require_grid(f);
    if (k >= part.q_max()) return GridFunction(f.grid());
    auto t = part.lowpass_table(k);
    for (auto& v : t) v = 1.0 - v;
    return fourier_multiplier_table(t, f);
}

/// phi_q(D) f.
inline GridFunction block(const GridFunction& f, int q, const DyadicPartition& part) {
    part.require_grid(f);
    return fourier_multiplier_table(part.block_table(q), f);
}

/// sup_q 2^{q r} ||u_q||_inf over the grid samples.
inline double zygmund_norm(const GridFunction& f, double r, const DyadicPartition& part) {
    const auto dec = decompose(f, part);
    double m = 0.0;
    for (std::size_t q = 0; q < dec.sup.size(); ++q)
        m = std::max(m, std::exp2(static_cast<double>(q) * r) * dec.sup[q]);
    return m;
}

/// (sum_q 2^{2 q s} ||u_q||_{L2}^2)^{1/2}.
inline double sobolev_norm(const GridFunction& f, double s, const DyadicPartition& part) {
    const auto dec = decompose(f, part);
    double acc = 0.0;
    for (std::size_t q = 0; q < dec.l2.size(); ++q) {
        const double w = std::exp2(static_cast<double>(q) * s) * dec.l2[q];
        acc += w * w;
    }
    return std::sqrt(acc);
}

enum class NormKind { zygmund, sobolev };

inline std::string to_string(NormKind k) { return k == NormKind::zygmund ? "zygmund" : "sobolev"; }

inline NormKind parse_norm_kind(const std::string& s) {
    if (s == "zygmund") return NormKind::zygmund;
    if (s == "sobolev") return NormKind::sobolev;
    throw FormatError("unknown norm kind '" + s + "' (expected zygmund or sobolev)");
}

struct RegularityReport {
    double exponent = std::numeric_limits<double>::quiet_NaN();
    NormKind norm_kind = NormKind::zygmund;
    int fit_min = 0;
    int fit_max = 0;
    std::vector<double> per_block_lognorms;  // log2 of the fitted norm kind, every block
    std::vector<double> sup;
    std::vector<double> l2;
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
};

/// Thrown when fewer than three blocks in the fit range carry signal; the
/// partially filled report travels with it.
class DegenerateSpectrum : public Error {
public:
    explicit DegenerateSpectrum(RegularityReport report)
        : Error("degenerate spectrum: fewer than 3 usable blocks in fit range"), report_(std::move(report)) {}
    const RegularityReport& report() const { return report_; }

private:
    RegularityReport report_;
};

/// Blocks below this fraction of the largest block are treated as empty.
inline constexpr double block_floor = 1e-13;

/// Least-squares slope of log2(block norm) against q over [q_min, q_max_fit];
/// exponent = -slope.
inline RegularityReport fit_regularity(const BlockDecomposition& dec, NormKind kind, int q_min, int q_max_fit) {
    if (q_min < 0 || q_min >= q_max_fit || q_max_fit > dec.q_max())
        throw Error("fit range [" + std::to_string(q_min) + ", " + std::to_string(q_max_fit) +
                    "] invalid for q_max = " + std::to_string(dec.q_max()));
    RegularityReport rep;
    rep.norm_kind = kind;
    rep.fit_min = q_min;
    rep.fit_max = q_max_fit;
    rep.sup = dec.sup;
    rep.l2 = dec.l2;
    const auto& norms = kind == NormKind::zygmund ? dec.sup : dec.l2;
    double peak = 0.0;
    for (double v : norms) peak = std::max(peak, v);
    rep.per_block_lognorms.resize(norms.size());
    for (std::size_t q = 0; q < norms.size(); ++q)
        rep.per_block_lognorms[q] = norms[q] > 0.0 ? std::log2(norms[q]) : -std::numeric_limits<double>::infinity();

    std::vector<double> qs, ys;
    for (int q = q_min; q <= q_max_fit; ++q) {
        const double v = norms[static_cast<std::size_t>(q)];
        if (peak > 0.0 && v > block_floor * peak) {
            qs.push_back(q);
            ys.push_back(std::log2(v));
        }
    }
    if (qs.size() < 3) {
        rep.degenerate = true;
        throw DegenerateSpectrum(rep);
    }
    const double n = static_cast<double>(qs.size());
    double mq = 0.0, my = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        mq += qs[i];
        my += ys[i];
    }
    mq /= n;
    my /= n;
    double sqq = 0.0, sqy = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        sqq += (qs[i] - mq) * (qs[i] - mq);
        sqy += (qs[i] - mq) * (ys[i] - my);
    }
    const double slope = sqy / sqq;
    const double intercept = my - slope * mq;
    double ss = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const double e = ys[i] - (intercept + slope * qs[i]);
        ss += e * e;
    }
    rep.exponent = -slope;
    rep.residual = std::sqrt(ss / n);
    return rep;
}

inline RegularityReport fit_regularity(const GridFunction& f, const DyadicPartition& part, NormKind kind, int q_min,
                                       int q_max_fit) {
    return fit_regularity(decompose(f, part), kind, q_min, q_max_fit);
}

}  // namespace paracalc
