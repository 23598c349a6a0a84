#include "paracalc/generators.hpp"
#include "paracalc/symbols.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace paracalc;
using paracalc::testing::Rng;

namespace {

const cplx I(0.0, 1.0);

GridFunction trig(const TorusGrid& g, double a, double k) {
    return GridFunction::sample(g, [=](const Point& p) { return a * std::cos(k * p[0]) + 1.5; });
}

// d/dx of a * cos(k x) + 1.5.
GridFunction trig_dx(const TorusGrid& g, double a, double k) {
    return GridFunction::sample(g, [=](const Point& p) { return -a * k * std::sin(k * p[0]); });
}

}  // namespace

TEST(FreqExpr, ValuesAndDerivatives) {
    const Freq xi{3.0, 4.0};
    EXPECT_NEAR(std::abs(FreqExpr::abs_pow(1.0)(xi, 2) - 5.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(FreqExpr::japanese_pow(2.0)(xi, 2) - 26.0), 0.0, 1e-12);
    EXPECT_EQ(FreqExpr::ixi()(xi, 1), cplx(0.0, 3.0));
    // d/dxi_1 |xi|^3 = 3 xi_1 |xi|.
    EXPECT_NEAR(std::abs(FreqExpr::abs_pow(3.0).derivative(1)(xi, 2) - 60.0), 0.0, 1e-12);
    // d/dxi <xi>^1 = xi / <xi>.
    const Freq one{2.0, 0.0};
    EXPECT_NEAR(std::abs(FreqExpr::japanese_pow(1.0).derivative(0)(one, 1) - 2.0 / std::sqrt(5.0)), 0.0, 1e-14);
    EXPECT_TRUE(FreqExpr::ixi().derivative(0).derivative(0).is_zero());
    EXPECT_EQ(FreqExpr::abs_pow(-1.0)(Freq{0.0, 0.0}, 1), cplx(0.0));
}

TEST(FreqExpr, Parse) {
    EXPECT_EQ(parse_freq_expr("ixi").order, 1.0);
    EXPECT_EQ(parse_freq_expr("japanese^1.5").order, 1.5);
    EXPECT_EQ(parse_freq_expr("abs^-2").order, -2.0);
    EXPECT_THROW(parse_freq_expr("abs^x"), FormatError);
    EXPECT_THROW(parse_freq_expr("sin"), FormatError);
}

TEST(Symbol, RankDecompositionMatchesPointwiseFormula) {
    Rng rng(3);
    for (int d : {1, 2}) {
        TorusGrid g(d, d == 1 ? 8 : 5);
        auto b0 = paracalc::testing::random_real(g, rng, 3);
        auto b1 = paracalc::testing::random_real(g, rng, 3);
        auto a = Symbol::separable(g, {{b0, FreqExpr::japanese_pow(1.0)}, {b1, FreqExpr::ixi()}}, 1.0, 2.0);
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const std::size_t j = static_cast<std::size_t>(rng.integer(0, long(g.size()) - 1));
            const std::size_t i = static_cast<std::size_t>(rng.integer(0, long(g.size()) - 1));
            const Freq xi = g.frequency(i);
            const double r = std::hypot(xi[0], xi[1]);
            const cplx expect = b0.value(j) * std::sqrt(1.0 + r * r) + b1.value(j) * I * xi[0];
            worst = std::max(worst, std::abs(a(j, xi) - expect) / (1.0 + r));
        }
        EXPECT_LT(worst, 1e-10);
        EXPECT_TRUE(std::isfinite(a.bound()));
        EXPECT_GT(a.bound(), 0.0);
    }
}

TEST(Symbol, TermsRequireSeparableKind) {
    TorusGrid g(1, 6);
    auto t = Symbol::tabulated(g, 0.0, 1.0, [](std::size_t, const Freq&) { return cplx(1.0); });
    EXPECT_FALSE(t.has_rank_decomposition());
    EXPECT_THROW(t.terms(), NoRankDecomposition);
}

TEST(AdmissibleCutoff, PlateauAndVanishingRegions) {
    for (int d : {1, 2}) {
        TorusGrid g(d, d == 1 ? 9 : 6);
        DyadicPartition part(g);
        AdmissibleCutoff psi(part);
        EXPECT_GT(psi.eps1(), 0.0);
        EXPECT_LT(psi.eps1(), psi.eps2());
        EXPECT_LT(psi.eps2(), 1.0);
        for (std::size_t z = 0; z < g.size(); ++z)
            for (std::size_t e = 0; e < g.size(); ++e) {
                const double v = psi.at(z, e);
                const double rz = norm(g.frequency(z), d), re = norm(g.frequency(e), d);
                ASSERT_GE(v, -1e-15);
                ASSERT_LE(v, 1.0 + 1e-15);
                if (rz <= psi.eps1() * (1.0 + re)) {
                    ASSERT_NEAR(v, 1.0, 1e-12);
                }
                if (rz >= psi.eps2() * (1.0 + re)) {
                    ASSERT_LE(v, AdmissibleCutoff::plateau_tol);
                }
            }
        EXPECT_EQ(psi.at(0, g.flat_of(7)), 1.0);
    }
}

TEST(Seminorm, ConstantSymbolIsOne) {
    TorusGrid g(1, 7);
    EXPECT_NEAR(seminorm(Symbol::multiplier(g, FreqExpr::constant(1.0), 0.0), 0.0, 0.5), 1.0, 1e-14);
}

TEST(Seminorm, DerivativeSymbolAgainstEnumeration) {
    TorusGrid g(1, 7);
    const auto a = Symbol::multiplier(g, FreqExpr::ixi(), 1.0);
    // cap = 1 + floor(0.5) = 1 in d = 1: orders 0 and 1 only.
    double oracle = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = std::abs(g.frequency(i)[0]);
        if (r < 1.0) continue;
        oracle = std::max({oracle, r / (1.0 + r), 1.0});
    }
    EXPECT_NEAR(seminorm(a, 1.0, 0.5), oracle, 1e-14);
    EXPECT_NEAR(oracle, 1.0, 0.0);
}

TEST(Seminorm, XOnlySymbolAgainstEnumeration) {
    TorusGrid g(1, 8);
    auto b = GridFunction::sample(g, [](const Point& p) { return 2.0 * std::cos(p[0]); });
    const double h = g.spacing();
    double holder = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        holder = std::max(holder, std::abs(b.value((j + 1) % g.size()) - b.value(j)) / std::sqrt(h));
    ASSERT_LT(holder, 2.0);
    EXPECT_NEAR(seminorm(Symbol::x_only(b, 0.5), 0.0, 0.5), 2.0, 1e-12);
}

TEST(SharpProduct, XOnlyTimesMultiplierCollapses) {
    TorusGrid g(1, 7);
    auto b = trig(g, 0.3, 2);
    const auto a = Symbol::x_only(b, 1.5);
    const auto m = Symbol::multiplier(g, FreqExpr::japanese_pow(1.0), 1.0);
    const auto ab = sharp_product(a, m, 1.5);
    const auto ba = sharp_product(m, a, 1.5);
    const auto db = trig_dx(g, 0.3, 2);
    for (std::size_t i = 0; i < g.size(); i += 7) {
        const Freq xi = g.frequency(i);
        const double jap = std::sqrt(1.0 + xi[0] * xi[0]);
        const double djap = xi[0] / jap;
        for (std::size_t j = 0; j < g.size(); j += 5) {
            EXPECT_NEAR(std::abs(ab(j, xi) - b.value(j) * jap), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(ba(j, xi) - (jap * b.value(j) + djap * db.value(j) / I)), 0.0, 1e-11);
        }
    }
    EXPECT_EQ(ab.order(), 1.0);
    EXPECT_TRUE(ab.has_rank_decomposition());
}

TEST(SharpProduct, LowRegularityKeepsOnlyProduct) {
    TorusGrid g(1, 7);
    const auto a = Symbol::product(trig(g, 0.2, 3), FreqExpr::ixi(), 1.0, 0.8);
    const auto b = Symbol::product(trig(g, 0.5, 1), FreqExpr::japanese_pow(2.0), 2.0, 0.8);
    const auto ab = sharp_product(a, b, 0.8);
    for (std::size_t i = 0; i < g.size(); i += 9)
        for (std::size_t j = 0; j < g.size(); j += 11) {
            const Freq xi = g.frequency(i);
            EXPECT_NEAR(std::abs(ab(j, xi) - a(j, xi) * b(j, xi)), 0.0, 1e-9 * (1 + std::abs(a(j, xi) * b(j, xi))));
        }
    EXPECT_EQ(ab.order(), 3.0);
}

TEST(SharpProduct, TimesOneIsIdentity) {
    TorusGrid g(2, 5);
    Rng rng(8);
    const auto a = Symbol::product(paracalc::testing::random_real(g, rng, 4), FreqExpr::abs_pow(1.0), 1.0, 2.5);
    const auto one = Symbol::multiplier(g, FreqExpr::constant(1.0), 0.0);
    const auto r = sharp_product(a, one, 2.5);
    for (std::size_t i = 0; i < g.size(); i += 13)
        for (std::size_t j = 0; j < g.size(); j += 17) EXPECT_EQ(r(j, g.frequency(i)), a(j, g.frequency(i)));
}

TEST(SharpProduct, MissingXDerivativesThrow) {
    TorusGrid g(1, 6);
    const auto a = Symbol::multiplier(g, FreqExpr::ixi(), 1.0);
    const auto b = Symbol::closed_form(g, 0.0, 2.0, [](std::size_t, const Freq&) { return cplx(1.0); });
    EXPECT_THROW(sharp_product(a, b, 2.0), DerivativeUnavailable);
    EXPECT_NO_THROW(sharp_product(a, b, 1.0));
    EXPECT_THROW(sharp_product(a, a, 3.5), DerivativeUnavailable);
}

TEST(AdjointSymbol, Examples) {
    TorusGrid g(1, 7);
    auto b = trig(g, 0.4, 2);
    const auto db = trig_dx(g, 0.4, 2);
    const auto xa = Symbol::x_only(b, 1.5);
    const auto ma = Symbol::multiplier(g, FreqExpr::japanese_pow(1.0), 1.0);
    const auto mixed = adjoint_symbol(Symbol::product(b, FreqExpr::ixi(), 1.0, 1.5), 1.5);
    const auto xt = adjoint_symbol(xa, 1.5), mt = adjoint_symbol(ma, 1.5);
    const auto xtt = adjoint_symbol(xt, 1.5);
    for (std::size_t i = 0; i < g.size(); i += 5)
        for (std::size_t j = 0; j < g.size(); j += 3) {
            const Freq xi = g.frequency(i);
            EXPECT_EQ(xt(j, xi), xa(j, xi));
            EXPECT_EQ(mt(j, xi), ma(j, xi));
            EXPECT_EQ(xtt(j, xi), xa(j, xi));
            const cplx expect = -I * b.value(j) * xi[0] - db.value(j);
            EXPECT_NEAR(std::abs(mixed(j, xi) - expect), 0.0, 1e-11);
        }
}

TEST(XiDerivative, FiniteDifferenceFallbackForClosedForms) {
    TorusGrid g(1, 7);
    const auto exact = Symbol::multiplier(g, FreqExpr::japanese_pow(1.0), 1.0);
    const auto closed = Symbol::closed_form(g, 1.0, 1.0, [](std::size_t, const Freq& xi) {
        return cplx(std::sqrt(1.0 + xi[0] * xi[0]));
    });
    const auto de = exact.xi_derivative(0), dc = closed.xi_derivative(0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Freq xi = g.frequency(i);
        // Centered differences with unit step: error ~ f'''/6, which is below 0.1 for |xi| >= 1.
        EXPECT_NEAR(std::abs(de(0, xi) - dc(0, xi)), 0.0, 0.1);
    }
    EXPECT_THROW(closed.x_derivative(0), DerivativeUnavailable);
}

TEST(Pullback, IdentityReturnsSymbol) {
    TorusGrid g(1, 7);
    const auto a = Symbol::product(trig(g, 0.3, 1), FreqExpr::ixi(), 1.0, 1.5);
    const auto p = pullback_symbol(a, TorusMap::identity(g));
    for (std::size_t i = 0; i < g.size(); i += 7)
        for (std::size_t j = 0; j < g.size(); j += 9) EXPECT_EQ(p(j, g.frequency(i)), a(j, g.frequency(i)));
}

TEST(Pullback, DerivativeSymbolDividesByJacobian) {
    TorusGrid g(1, 8);
    const auto chi = torus_diffeo(1.0, 0.3, 4, g, 5);
    const auto p = pullback_symbol(Symbol::multiplier(g, FreqExpr::ixi(), 1.0), chi);
    const auto pa = pullback_symbol(Symbol::multiplier(g, FreqExpr::abs_pow(1.0), 1.0), chi);
    for (std::size_t j = 0; j < g.size(); j += 3) {
        const double dchi = chi.jacobian(j)[0];
        for (double xi : {1.0, -3.0, 7.5}) {
            EXPECT_NEAR(std::abs(p(j, Freq{xi, 0.0}) - I * xi / dchi), 0.0, 1e-12 * std::abs(xi));
            EXPECT_NEAR(std::abs(pa(j, Freq{xi, 0.0}) - std::abs(xi) / dchi), 0.0, 1e-12 * std::abs(xi));
        }
    }
}

TEST(Pullback, HalvesWhereJacobianIsTwo) {
    TorusGrid g(1, 8);
    // g(x) = sin x has g'(0) = 1, so D chi(0) = 2.
    auto disp = GridFunction::sample(g, [](const Point& p) { return 0.9 * std::sin(p[0]) + 0.1 * std::sin(2 * p[0]) / 2; });
    TorusMap chi(g, {disp});
    const auto pa = pullback_symbol(Symbol::multiplier(g, FreqExpr::abs_pow(1.0), 1.0), chi);
    EXPECT_NEAR(chi.jacobian(0)[0], 2.0, 1e-12);
    EXPECT_NEAR(pa(0, Freq{6.0, 0.0}).real(), 3.0, 1e-11);
}

TEST(Pullback, ChainRule) {
    for (int d : {1, 2}) {
        TorusGrid g(d, d == 1 ? 10 : 6);
        const auto chi = torus_diffeo(1.0, 0.2, 2, g, 11);
        const auto chit = torus_diffeo(1.0, 0.2, 2, g, 12);
        auto b = GridFunction::sample(g, [](const Point& p) { return 1.0 + 0.5 * std::cos(p[0] + p[1]); });
        const auto a = Symbol::product(b, FreqExpr::japanese_pow(1.0), 1.0, 2.0);
        const auto twice = pullback_symbol(pullback_symbol(a, chit), chi);
        const auto once = pullback_symbol(a, compose(chit, chi));
        Rng rng(2);
        double worst = 0.0;
        for (int t = 0; t < 200; ++t) {
            const std::size_t j = static_cast<std::size_t>(rng.integer(0, long(g.size()) - 1));
            const Freq xi{rng.uniform(-20, 20), d == 2 ? rng.uniform(-20, 20) : 0.0};
            worst = std::max(worst, std::abs(twice(j, xi) - once(j, xi)) / (1.0 + norm(xi, d)));
        }
        EXPECT_LT(worst, 1e-10) << "d = " << d;
    }
}

TEST(Pullback, Preconditions) {
    TorusGrid g(1, 7);
    const auto tab = Symbol::tabulated(g, 0.0, 1.0, [](std::size_t, const Freq&) { return cplx(1.0); });
    EXPECT_THROW(pullback_symbol(tab, torus_diffeo(1.0, 0.2, 3, g, 1)), FrequencyEvalUnavailable);
    auto fold = GridFunction::sample(g, [](const Point& p) { return 1.5 * std::sin(p[0]); });
    EXPECT_THROW(pullback_symbol(Symbol::multiplier(g, FreqExpr::ixi(), 1.0), TorusMap(g, {fold})),
                 NotDiffeomorphism);
}

TEST(Regularized, MultiplierIsUnchanged) {
    TorusGrid g(1, 8);
    DyadicPartition part(g);
    AdmissibleCutoff psi(part);
    const auto a = Symbol::multiplier(g, FreqExpr::japanese_pow(1.0), 1.0);
    const auto s = regularized_symbol(a, psi);
    for (std::size_t i = 0; i < g.size(); i += 3)
        for (std::size_t j = 0; j < g.size(); j += 7)
            EXPECT_NEAR(std::abs(s(j, g.frequency(i)) - a(j, g.frequency(i))), 0.0, 1e-12);
}

TEST(Regularized, CosineKeptOrRemovedByCutoff) {
    TorusGrid g(1, 9);
    DyadicPartition part(g);
    AdmissibleCutoff psi(part);
    auto c1 = GridFunction::sample(g, [](const Point& p) { return std::cos(p[0]); });
    auto c32 = GridFunction::sample(g, [](const Point& p) { return std::cos(32 * p[0]); });
    const auto s1 = regularized_symbol(Symbol::x_only(c1, 1.0), psi);
    const auto s32 = regularized_symbol(Symbol::x_only(c32, 1.0), psi);
    const double eta = 100.0;
    ASSERT_GT(psi.eps1() * (1 + eta), 1.0);
    const auto col = s1.column(Freq{eta, 0.0});
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(std::abs(col[j] - c1.value(j)), 0.0, 1e-13);
    for (const auto& v : s32.column(Freq{0.0, 0.0})) EXPECT_NEAR(std::abs(v), 0.0, 1e-14);
    EXPECT_THROW(s1.column(Freq{0.5, 0.0}), FrequencyEvalUnavailable);
}

TEST(Regularized, SpectralConditionAndReapplication) {
    TorusGrid g(1, 8);
    DyadicPartition part(g);
    AdmissibleCutoff psi(part);
    Rng rng(6);
    const auto a = Symbol::product(paracalc::testing::random_real(g, rng), FreqExpr::japanese_pow(0.5), 0.5, 1.0);
    const auto s = regularized_symbol(a, psi);
    const auto ss = regularized_symbol(s, psi);
    for (std::size_t e = 0; e < g.size(); e += 5) {
        const Freq eta = g.frequency(e);
        const auto spec = dft(g, s.column(eta));
        const auto spec2 = dft(g, ss.column(eta));
        double scale = 0.0;
        for (auto z : spec) scale = std::max(scale, std::abs(z));
        for (std::size_t z = 0; z < g.size(); ++z) {
            const double rz = norm(g.frequency(z), 1), re = norm(eta, 1);
            if (rz >= psi.eps2() * (1 + re)) {
                EXPECT_LT(std::abs(spec[z]), 1e-12 * std::max(scale, 1.0));
            }
            const double w = psi.at(z, e);
            if (w == 0.0 || w == 1.0) {
                EXPECT_NEAR(std::abs(spec2[z] - spec[z]), 0.0, 1e-12 * std::max(scale, 1.0));
            }
        }
    }
}

TEST(SymbolSpec, MiniLanguage) {
    TorusGrid g(1, 6);
    auto load = [&](const std::string& name) {
        if (name != "b.json") throw FormatError("missing " + name);
        return GridFunction::constant(g, 2.0);
    };
    EXPECT_EQ(symbol_from_spec("mult:ixi", g, load, 1.0).order(), 1.0);
    const auto p = symbol_from_spec("prod:b.json:japanese^2", g, load, 1.0);
    EXPECT_NEAR(std::abs(p(0, Freq{1.0, 0.0}) - 4.0), 0.0, 1e-14);
    EXPECT_EQ(symbol_from_spec("func:b.json", g, load, 1.0)(3, Freq{5.0, 0.0}), cplx(2.0));
    EXPECT_THROW(symbol_from_spec("oops", g, load, 1.0), FormatError);
    EXPECT_THROW(symbol_from_spec("mult:tan", g, load, 1.0), FormatError);
    EXPECT_THROW(symbol_from_spec("func:c.json", g, load, 1.0), FormatError);
}
