#include "paracalc/generators.hpp"
#include "paracalc/paracomposition.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace paracalc;
using paracalc::testing::max_abs_diff;
using paracalc::testing::rel_diff;
using paracalc::testing::Rng;

namespace {

TorusMap shift(const TorusGrid& g, double c0, double c1 = 0.0) {
    std::vector<GridFunction> disp{GridFunction::constant(g, c0)};
    if (g.dim() == 2) disp.push_back(GridFunction::constant(g, c1));
    return TorusMap(g, std::move(disp));
}

GridFunction shifted(const GridFunction& u, double c0, double c1 = 0.0) {
    const auto& g = u.grid();
    std::vector<cplx> v(g.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        Point p = g.point(j);
        p[0] += c0;
        p[1] += c1;
        v[j] = paracalc::testing::direct_sum(u, p);
    }
    return GridFunction::from_values(g, std::move(v));
}

}  // namespace

TEST(SmoothedMap, Examples) {
    TorusGrid g(1, 9);
    DyadicPartition part(g);
    const auto id = TorusMap::identity(g);
    for (int k = 0; k <= part.q_max() + 1; ++k) EXPECT_TRUE(smoothed_map(id, k, part).is_identity());
    const auto chi = torus_diffeo(0.5, 0.3, 6, g, 2);
    const auto top = smoothed_map(chi, part.q_max(), part);
    EXPECT_EQ(max_abs_diff(top.displacement(0), chi.displacement(0)), 0.0);
    TorusMap one(g, {GridFunction::sample(g, [](const Point& p) { return std::ldexp(std::cos(16 * p[0]), -5); })});
    EXPECT_LT(smoothed_map(one, 2, part).displacement(0).sup_norm(), 1e-16);
    EXPECT_THROW(smoothed_map(chi, -1, part), Error);
}

TEST(SelectN, RuleArithmetic) {
    EXPECT_EQ(n_from_bound(1.0), 2);
    EXPECT_EQ(n_from_bound(2.0), 2);
    // ceil(log2 3) + 1 = 3; 2^3 = 8 > 3 as required.
    EXPECT_EQ(n_from_bound(3.0), 3);
    EXPECT_EQ(n_from_bound(4.5), 4);
    for (double s : {1.0, 1.7, 3.0, 4.0, 4.5, 9.9, 100.0}) EXPECT_GT(std::ldexp(1.0, n_from_bound(s)), s);
    EXPECT_THROW(n_from_bound(0.0), Error);
    TorusGrid g(1, 8);
    DyadicPartition part(g);
    EXPECT_EQ(select_N(TorusMap::identity(g), part), 2);
    EXPECT_EQ(select_Ntilde(TorusMap::identity(g), part), 2);
    const auto chi = torus_diffeo(0.5, 0.4, 5, g, 3);
    EXPECT_GE(select_Ntilde(chi, part), select_N(chi, part));
    EXPECT_GT(std::ldexp(1.0, select_N(chi, part)), smoothed_jacobian_bound(chi, part));
}

TEST(ParacomposeNew, IdentityIsExact) {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        const int d = t % 5 == 4 ? 2 : 1;
        TorusGrid g(d, d == 1 ? 9 : 6);
        DyadicPartition part(g);
        auto u = paracalc::testing::random_real(g, rng);
        const int N = 2 + t % 3;
        EXPECT_LT(max_abs_diff(paracompose_new(u, TorusMap::identity(g), part, N), u), 1e-12);
        EXPECT_LT(max_abs_diff(paracompose_alinhac(u, TorusMap::identity(g), part, N), u), 1e-12);
    }
}

TEST(ParacomposeNew, ConstantShiftTranslates) {
    Rng rng(6);
    for (int d : {1, 2}) {
        TorusGrid g(d, d == 1 ? 8 : 5);
        DyadicPartition part(g);
        auto u = paracalc::testing::random_real(g, rng);
        const auto chi = shift(g, 0.37, -1.1);
        EXPECT_LT(rel_diff(paracompose_new(u, chi, part), shifted(u, 0.37, d == 2 ? -1.1 : 0.0)), 1e-12);
    }
}

TEST(ParacomposeNew, MatchesDoubleSum) {
    TorusGrid g(1, 8);
    DyadicPartition part(g);
    const auto u = weierstrass(1.5, 6, g, 1);
    const auto chi = torus_diffeo(0.5, 0.3, 5, g, 7);
    const int N = select_N(chi, part);
    const auto image = chi.image_points();
    GridFunction oracle(g);
    for (int k = 0; k <= part.q_max(); ++k) {
        const auto uk = block(u, k, part);
        std::vector<cplx> v(g.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = paracalc::testing::direct_sum(uk, image[j]);
        const auto composed = GridFunction::from_values(g, std::move(v));
        for (int l = 0; l <= std::min(k + N, part.q_max()); ++l) oracle += block(composed, l, part);
    }
    const auto out = paracompose_new(u, chi, part);
    EXPECT_LT(rel_diff(out, oracle), 1e-11);
    const double ratio = zygmund_norm(out, 1.5, part) / zygmund_norm(u, 1.5, part);
    EXPECT_TRUE(std::isfinite(ratio));
    EXPECT_LT(ratio, 10.0);
}

TEST(ParacomposeNew, Linear) {
    Rng rng(8);
    TorusGrid g(1, 9);
    DyadicPartition part(g);
    const auto chi = torus_diffeo(0.5, 0.3, 6, g, 4);
    for (int t = 0; t < 5; ++t) {
        auto u = paracalc::testing::random_real(g, rng), v = paracalc::testing::random_real(g, rng);
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        auto comb = a * u;
        comb.axpy(b, v);
        auto expect = a * paracompose_new(u, chi, part);
        expect.axpy(b, paracompose_new(v, chi, part));
        EXPECT_LT(rel_diff(paracompose_new(comb, chi, part), expect), 1e-12);
    }
}

TEST(ParacomposeAlinhac, SingleBlockAndPreconditions) {
    TorusGrid g(1, 9);
    DyadicPartition part(g);
    auto c16 = GridFunction::sample(g, [](const Point& p) { return std::cos(16 * p[0]); });
    EXPECT_LT(max_abs_diff(paracompose_alinhac(c16, TorusMap::identity(g), part), c16), 1e-14);
    TorusMap fold(g, {GridFunction::sample(g, [](const Point& p) { return 1.5 * std::sin(p[0]); })});
    EXPECT_THROW(paracompose_alinhac(c16, fold, part), NotDiffeomorphism);
    EXPECT_NO_THROW(paracompose_new(c16, fold, part));
}

TEST(Paralinearize, IdentityMap) {
    Rng rng(10);
    TorusGrid g(1, 9);
    DyadicPartition part(g);
    auto u = paracalc::testing::random_real(g, rng, 200, 1.0);
    const auto res = paralinearize(u, TorusMap::identity(g), part);
    EXPECT_LT(max_abs_diff(res.chi_star_u, u), 1e-12);
    EXPECT_EQ(res.T_term.sup_norm(), 0.0);
    EXPECT_EQ(res.R0.sup_norm(), 0.0);
    EXPECT_EQ(res.R1.sup_norm(), 0.0);
    EXPECT_LT(res.R2.sup_norm(), 1e-14);
    EXPECT_LE(res.residual, 1e-12);
    EXPECT_EQ(res.N_used, 2);
    ASSERT_EQ(res.reports.size(), 3u);
}

TEST(Paralinearize, ConstantShift) {
    Rng rng(11);
    TorusGrid g(1, 9);
    DyadicPartition part(g);
    auto u = paracalc::testing::random_real(g, rng, 200, 1.0);
    const auto res = paralinearize(u, shift(g, 0.61), part);
    EXPECT_EQ(res.T_term.sup_norm(), 0.0);
    EXPECT_EQ(res.R0.sup_norm(), 0.0);
    EXPECT_LT(rel_diff(res.chi_star_u, shifted(u, 0.61)), 1e-12);
    EXPECT_LE(res.residual, 1e-9);
}

TEST(Paralinearize, TelescopingIdentityOnRoughMaps) {
    for (int d : {1, 2}) {
        TorusGrid g(d, d == 1 ? 10 : 6);
        DyadicPartition part(g);
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto u = weierstrass(2.5, g.depth() - 2, g, seed);
            const auto chi = torus_diffeo(0.5, 0.35, g.depth() - 3, g, seed + 10);
            const auto res = paralinearize(u, chi, part);
            EXPECT_LE(res.residual, 1e-9) << "d = " << d << " seed " << seed;
            EXPECT_EQ(res.bookkeeping.sup_norm(), 0.0);
            EXPECT_GT(res.T_term.sup_norm(), 0.0);
        }
    }
}

TEST(Paralinearize, QuadratureConvergedAtEightNodes) {
    TorusGrid g(1, 10);
    DyadicPartition part(g);
    const auto u = weierstrass(2.5, 8, g, 4);
    const auto chi = torus_diffeo(0.5, 0.4, 7, g, 5);
    ParalinearizeOptions eight, sixteen;
    sixteen.quadrature_nodes = 16;
    const auto a = paralinearize(u, chi, part, eight), b = paralinearize(u, chi, part, sixteen);
    EXPECT_LE(max_abs_diff(a.R0, b.R0), 1e-11);
}

TEST(Paralinearize, GaussLegendreRule) {
    for (int n : {1, 2, 8, 16}) {
        const auto rule = detail::gauss_legendre(n);
        double w = 0.0, m = 0.0;
        for (const auto& [x, wt] : rule) {
            w += wt;
            m += wt * std::pow(x, 2 * n - 1);
        }
        EXPECT_NEAR(w, 1.0, 1e-14);
        EXPECT_NEAR(m, 1.0 / (2 * n), 1e-14);
    }
}

TEST(Paralinearize, InvalidMapFailsQuadrature) {
    TorusGrid g(1, 8);
    DyadicPartition part(g);
    std::vector<double> bad(g.size(), 0.0);
    bad[5] = std::numeric_limits<double>::quiet_NaN();
    TorusMap chi(g, {GridFunction::from_real(g, bad)});
    ParalinearizeOptions opt;
    opt.N = 2;
    EXPECT_THROW(paralinearize(weierstrass(1.5, 5, g, 1), chi, part, opt), QuadratureFailure);
}

TEST(FunctorialDefect, IdentityFactorsVanish) {
    TorusGrid g(1, 9);
    DyadicPartition part(g);
    const auto u = weierstrass(1.5, 7, g, 2);
    const auto chi = torus_diffeo(0.5, 0.3, 6, g, 3);
    EXPECT_EQ(functorial_defect(u, chi, TorusMap::identity(g), part).sup_norm(), 0.0);
    EXPECT_EQ(functorial_defect(u, TorusMap::identity(g), chi, part).sup_norm(), 0.0);
}

TEST(FunctorialDefect, OrderingMatchesComposition) {
    TorusGrid g(1, 10);
    DyadicPartition part(g);
    const auto u = weierstrass(1.5, 8, g, 2);
    const auto chi = torus_diffeo(1.5, 0.3, 3, g, 3);
    const auto chit = torus_diffeo(1.5, 0.3, 3, g, 4);
    // chi~^*(chi^* u) approximates u o chi o chi~, not u o chi~ o chi.
    const auto right = functorial_defect(u, chi, chit, part).sup_norm();
    auto wrong = paracompose_new(paracompose_new(u, chi, part), chit, part);
    wrong -= paracompose_new(u, compose(chit, chi), part);
    EXPECT_LT(right, 0.1 * wrong.sup_norm());
}

TEST(ConjugationDefect, Examples) {
    TorusGrid g(1, 8);
    DyadicPartition part(g);
    AdmissibleCutoff psi(part);
    Rng rng(13);
    auto u = paracalc::testing::random_real(g, rng);
    auto b = weierstrass(0.5, 6, g, 2);
    b += GridFunction::constant(g, 1.0);
    const auto a = Symbol::product(b, FreqExpr::japanese_pow(1.0), 1.0, 0.5);
    EXPECT_EQ(conjugation_defect(a, u, TorusMap::identity(g), part, psi).sup_norm(), 0.0);
    const auto d = Symbol::multiplier(g, FreqExpr::ixi(), 1.0);
    const auto Tu = paradiff_apply_direct(d, u, psi);
    EXPECT_LT(conjugation_defect(d, u, shift(g, 0.8), part, psi).sup_norm(), 1e-10 * Tu.sup_norm());
    TorusMap fold(g, {GridFunction::sample(g, [](const Point& p) { return 1.5 * std::sin(p[0]); })});
    EXPECT_THROW(conjugation_defect(a, u, fold, part, psi), NotDiffeomorphism);
    const auto tab = Symbol::tabulated(g, 0.0, 1.0, [](std::size_t, const Freq&) { return cplx(1.0); });
    EXPECT_THROW(conjugation_defect(tab, u, torus_diffeo(0.5, 0.2, 4, g, 1), part, psi), FrequencyEvalUnavailable);
}
