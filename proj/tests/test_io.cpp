#include "paracalc/generators.hpp"
#include "paracalc/io.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace paracalc;
using paracalc::testing::Rng;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "paracalc_test_io";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(GridFunctionJson, FieldNames) {
    TorusGrid g(1, 4);
    const auto j = to_json(GridFunction::constant(g, 2.0));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"d", "J", "length", "real", "values"}));
    EXPECT_TRUE(j["real"].get<bool>());
    EXPECT_EQ(j["values"].size(), 16u);
    EXPECT_EQ(j["values"][3].get<double>(), 2.0);
}

TEST(GridFunctionJson, RoundTripIsBitExact) {
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        TorusGrid g(t % 2 ? 2 : 1, t % 2 ? 4 : 7, t == 4 ? 3.0 : two_pi);
        const auto f = t % 3 == 0 ? paracalc::testing::random_complex(g, rng) : paracalc::testing::random_real(g, rng);
        const auto text = to_json(f).dump();
        const auto back = grid_function_from_json(Json::parse(text));
        ASSERT_EQ(back.is_real(), f.is_real());
        EXPECT_EQ(back.grid().length(), g.length());
        for (std::size_t j = 0; j < g.size(); ++j) EXPECT_EQ(back.value(j), f.value(j));
        EXPECT_EQ(to_json(back).dump(), text);
    }
}

TEST(GridFunctionJson, ComplexValuesArePairs) {
    TorusGrid g(1, 4);
    const auto f = GridFunction::sample(g, [](const Point& p) { return std::polar(1.0, p[0]); });
    const auto j = to_json(f);
    EXPECT_FALSE(j["real"].get<bool>());
    EXPECT_EQ(j["values"][0].size(), 2u);
}

TEST(GridFunctionJson, MalformedInputThrows) {
    TorusGrid g(1, 4);
    auto good = to_json(GridFunction::constant(g, 1.0));
    auto missing = good;
    missing.erase("real");
    EXPECT_THROW(grid_function_from_json(missing), FormatError);
    auto short_values = good;
    short_values["values"].erase(0);
    EXPECT_THROW(grid_function_from_json(short_values), FormatError);
    auto wrong_type = good;
    wrong_type["values"][2] = "x";
    EXPECT_THROW(grid_function_from_json(wrong_type), FormatError);
    auto bad_grid = good;
    bad_grid["J"] = 2;
    EXPECT_THROW(grid_function_from_json(bad_grid), InvalidGrid);
    EXPECT_THROW(grid_function_from_json(Json::array()), FormatError);
}

TEST(TorusMapJson, RoundTripAndRecomputedFlag) {
    TorusGrid g(2, 5);
    const auto chi = torus_diffeo(0.5, 0.3, 2, g, 4);
    auto j = to_json(chi);
    EXPECT_TRUE(j["is_diffeo"].get<bool>());
    j["is_diffeo"] = false;  // ignored on input
    const auto back = torus_map_from_json(j);
    EXPECT_TRUE(back.is_diffeo());
    for (int a = 0; a < 2; ++a)
        for (std::size_t p = 0; p < g.size(); ++p) EXPECT_EQ(back.displacement(a).value(p), chi.displacement(a).value(p));
}

TEST(TorusMapJson, WrongAxisCountThrows) {
    TorusGrid g(2, 4);
    auto j = to_json(TorusMap::identity(g));
    j["g"].erase(1);
    EXPECT_THROW(torus_map_from_json(j), FormatError);
}

TEST(ReportJson, FieldsAndNullExponent) {
    TorusGrid g(1, 8);
    DyadicPartition part(g);
    const auto r = fit_regularity(weierstrass(0.5, 6, g, 1), part, NormKind::zygmund, 1, 5);
    const auto j = to_json(r);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"exponent", "norm_kind", "fit_range", "residual", "degenerate", "blocks"}));
    EXPECT_NEAR(j["exponent"].get<double>(), 0.5, 1e-9);
    EXPECT_EQ(j["norm_kind"], "zygmund");
    EXPECT_EQ(j["fit_range"], Json::array({1, 5}));
    EXPECT_EQ(j["blocks"].size(), static_cast<std::size_t>(part.q_max() + 1));
    EXPECT_EQ(j["blocks"][2]["q"], 2);

    RegularityReport empty;
    empty.degenerate = true;
    EXPECT_TRUE(to_json(empty)["exponent"].is_null());
}

TEST(Files, ReadWriteAndErrors) {
    TorusGrid g(1, 5);
    const auto f = weierstrass(1.0, 3, g, 2);
    const auto path = scratch("f.json");
    write_json(path, to_json(f));
    const auto back = load_grid_function(path);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_EQ(back.value(j), f.value(j));
    EXPECT_THROW(load_grid_function(scratch("does_not_exist.json")), FileError);
    write_text(scratch("bad.json"), "{not json");
    EXPECT_THROW(read_json(scratch("bad.json")), FormatError);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
        const double v = rng.normal() * std::exp2(rng.integer(-60, 60));
        EXPECT_EQ(std::stod(fmt17(v)), v);
    }
    EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
}

TEST(Csv, BlocksAndDecayColumns) {
    TorusGrid g(1, 7);
    DyadicPartition part(g);
    const auto u = weierstrass(1.0, 5, g, 1);
    const auto r = fit_regularity(u, part, NormKind::zygmund, 1, 4);
    const auto blocks = blocks_csv(r);
    EXPECT_EQ(blocks.substr(0, blocks.find('\n')), "q,sup,l2");
    EXPECT_EQ(std::count(blocks.begin(), blocks.end(), '\n'), part.q_max() + 2);

    const auto csv = decay_csv({decay_series("u", u, part), decay_series("zero", GridFunction(g), part)});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "component,q,log2_sup,log2_l2");
    EXPECT_NE(csv.find("u,2,-2,"), std::string::npos);  // block 2 has sup 2^{-2}
    EXPECT_NE(csv.find("zero,0,-inf,-inf"), std::string::npos);
}

TEST(Svg, OnePolylinePerComponent) {
    TorusGrid g(1, 7);
    DyadicPartition part(g);
    const auto svg = decay_svg({decay_series("a", weierstrass(1.0, 5, g, 1), part),
                                decay_series("b", weierstrass(2.0, 5, g, 2), part)});
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    std::size_t count = 0;
    for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++count;
    EXPECT_EQ(count, 2u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}
