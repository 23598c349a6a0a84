// paracalc command-line tool.
//
//   paracalc gen --kind weierstrass --regularity 1.5 --bands 8 --output u.json
//   paracalc gen --kind diffeo --regularity 0.5 --amplitude 0.1 --bands 7 --output chi.json
//   paracalc decompose --input u.json --fit 1:7 --out dec
//   paracalc paralinearize --u u.json --map chi.json --fit 5:8 --emit-csv --emit-svg --out pl
//   paracalc verify --out report
//
// Every run writes manifest.json (effective parameters, library version and
// the only timestamp) into its output directory.
//
// Exit codes: 0 ok, 1 acceptance failure, 2 input error, 3 degenerate
// analysis, 4 identity violation.

#include "paracalc/acceptance.hpp"
#include "paracalc/paracalc.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

using namespace paracalc;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0, exit_acceptance = 1, exit_input = 2, exit_degenerate = 3, exit_identity = 4;

struct IdentityViolation : Error {
    using Error::Error;
};

struct FitRange {
    int lo = 1;
    int hi = -1;  // -1: top block
};

FitRange parse_fit(const std::string& s) {
    FitRange f;
    if (s.empty()) return f;
    const auto colon = s.find(':');
    try {
        if (colon == std::string::npos) throw std::invalid_argument(s);
        std::size_t used = 0;
        f.lo = std::stoi(s.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(s);
        const auto rest = s.substr(colon + 1);
        f.hi = std::stoi(rest, &used);
        if (used != rest.size()) throw std::invalid_argument(s);
    } catch (const std::logic_error&) {
        throw FormatError("--fit expects a:b with integers a <= b, got '" + s + "'");
    }
    if (f.lo < 0 || f.hi < f.lo) throw FormatError("--fit expects 0 <= a <= b, got '" + s + "'");
    return f;
}

int top_of(const FitRange& f, const DyadicPartition& part) {
    if (f.hi > part.q_max())
        throw FormatError("fit range ends at " + std::to_string(f.hi) + " beyond q_max = " + std::to_string(part.q_max()));
    return f.hi < 0 ? part.q_max() : f.hi;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const fs::path& dir, const CLI::App& sub) {
    Json params;
    for (const auto* o : sub.get_options()) {
        const auto name = o->get_name();
        if (name == "--help" || name.empty()) continue;
        const auto res = o->results();
        if (o->get_expected_min() == 0) {
            params[name.substr(2)] = o->count() > 0;
        } else if (res.empty()) {
            params[name.substr(2)] = o->get_default_str();
        } else if (res.size() == 1) {
            params[name.substr(2)] = res.front();
        } else {
            params[name.substr(2)] = res;
        }
    }
    Json m;
    m["command"] = sub.get_name();
    m["parameters"] = std::move(params);
    m["library_version"] = version;
    const char* threads = std::getenv("PARACALC_THREADS");
    m["paracalc_threads"] = threads ? threads : "";
    m["thread_budget"] = thread_budget();
    m["timestamp"] = utc_now();
    write_json(dir / "manifest.json", m);
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what) {
    if (!(a == b)) throw GridMismatch(std::string(what) + " live on different grids");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"paracalc: Littlewood-Paley analysis, paradifferential operators and paracomposition on the torus"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    // gen
    auto* gen = app.add_subcommand("gen", "write a seeded test function or torus map as JSON");
    std::string kind = "weierstrass", output;
    int dim = 1, grid_j = 10;
    GeneratorSpec spec;
    gen->add_option("--kind", kind, "weierstrass | sobolev_series | diffeo | bump");
    gen->add_option("--dim", dim, "torus dimension (1 or 2)");
    gen->add_option("--grid-j", grid_j, "dyadic depth J, n = 2^J points per axis");
    gen->add_option("--regularity", spec.regularity, "sigma, s or rho depending on the kind");
    gen->add_option("--amplitude", spec.amplitude, "diffeo eps or bump width");
    gen->add_option("--center", spec.center, "bump center");
    gen->add_option("--bands", spec.bands, "number of dyadic bands K");
    gen->add_option("--seed", spec.seed, "generator seed");
    gen->add_option("--output", output, "output JSON file")->required();

    // decompose
    auto* dec = app.add_subcommand("decompose", "dyadic block norms and fitted regularity of a function");
    std::string input, norm = "zygmund", fit;
    dec->add_option("--input", input, "GridFunction JSON")->required();
    dec->add_option("--norm", norm, "zygmund | sobolev");
    dec->add_option("--fit", fit, "fit range a:b (default 1:q_max)");
    std::string out = "paracalc_out";
    dec->add_option("--out", out, "output directory");

    // norm
    auto* nrm = app.add_subcommand("norm", "Zygmund or Sobolev norm of a function");
    double regularity = 0.0;
    nrm->add_option("--input", input, "GridFunction JSON")->required();
    nrm->add_option("--norm", norm, "zygmund | sobolev");
    nrm->add_option("--regularity", regularity, "index r of C^r_* or H^r");
    nrm->add_option("--out", out, "output directory");

    // paraproduct
    auto* pp = app.add_subcommand("paraproduct", "T_a u");
    std::string a_path, u_path;
    pp->add_option("--a", a_path, "coefficient GridFunction JSON")->required();
    pp->add_option("--u", u_path, "GridFunction JSON")->required();
    pp->add_option("--out", out, "output directory");

    // paradiff
    auto* pd = app.add_subcommand("paradiff", "apply a paradifferential operator or probe its order");
    std::string symbol, method = "lowrank";
    double rho = 1.0;
    std::uint64_t seed = 7;
    bool probe = false;
    pd->add_option("--symbol", symbol, "mult:<m> | func:<file> | prod:<file>:<m>, m in one, ixi, abs^p, japanese^p")
        ->required();
    pd->add_option("--u", u_path, "GridFunction JSON (also fixes the grid)")->required();
    pd->add_option("--rho", rho, "x-regularity of the symbol");
    pd->add_option("--method", method, "direct | lowrank");
    pd->add_flag("--probe", probe, "also fit the operator order with seeded band probes");
    pd->add_option("--seed", seed, "probe seed");
    pd->add_option("--out", out, "output directory");

    // paracompose
    auto* pc = app.add_subcommand("paracompose", "chi^* u, or the Alinhac variant");
    std::string map_path;
    std::optional<int> n_override;
    bool alinhac = false;
    pc->add_option("--u", u_path, "GridFunction JSON")->required();
    pc->add_option("--map", map_path, "TorusMap JSON")->required();
    pc->add_option("--n", n_override, "override the spectral gap N");
    pc->add_flag("--alinhac", alinhac, "use Alinhac's operator (diffeomorphisms only)");
    pc->add_option("--out", out, "output directory");

    // paralinearize
    auto* pl = app.add_subcommand("paralinearize", "split u o chi into T_{u' o chi} chi + chi^* u + remainders");
    bool emit_csv = false, emit_svg = false;
    int nodes = 8;
    pl->add_option("--u", u_path, "GridFunction JSON")->required();
    pl->add_option("--map", map_path, "TorusMap JSON")->required();
    pl->add_option("--n", n_override, "override the spectral gap N");
    pl->add_option("--norm", norm, "zygmund | sobolev");
    pl->add_option("--fit", fit, "fit range a:b (default 1:q_max)");
    pl->add_option("--quadrature-nodes", nodes, "Gauss-Legendre nodes for the mean value integral");
    pl->add_flag("--emit-csv", emit_csv, "write decay.csv");
    pl->add_flag("--emit-svg", emit_svg, "write decay.svg");
    pl->add_option("--out", out, "output directory");

    // conjugate
    auto* cj = app.add_subcommand("conjugate", "order of chi^* T_a - T_{a*} chi^*");
    cj->add_option("--symbol", symbol, "symbol spec, see paradiff")->required();
    cj->add_option("--map", map_path, "TorusMap JSON (fixes the grid)")->required();
    cj->add_option("--u", u_path, "optional GridFunction JSON to apply the defect to");
    cj->add_option("--rho", rho, "x-regularity of the symbol");
    cj->add_option("--n", n_override, "override the spectral gap N");
    cj->add_option("--seed", seed, "probe seed");
    cj->add_option("--out", out, "output directory");

    // verify
    auto* vf = app.add_subcommand("verify", "run the acceptance suite");
    std::vector<std::string> only;
    std::string fault;
    vf->add_option("--only", only, "restrict to check names or criterion ids (c1 .. c10)")->delimiter(',');
    vf->add_option("--out", out, "output directory");
    vf->add_option("--inject-fault", fault, "")->group("");  // test hook: "partition-profile"

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (gen->parsed()) {
            spec.kind = parse_generator_kind(kind);
            const TorusGrid grid(dim, grid_j);
            const auto obj = generate(spec, grid);
            const fs::path path(output);
            if (std::holds_alternative<GridFunction>(obj))
                write_json(path, to_json(std::get<GridFunction>(obj)));
            else
                write_json(path, to_json(std::get<TorusMap>(obj)));
            write_manifest(path.has_parent_path() ? path.parent_path() : fs::path("."), *gen);
            std::printf("wrote %s\n", output.c_str());
            return exit_ok;
        }

        if (dec->parsed()) {
            const auto u = load_grid_function(input);
            const DyadicPartition part(u.grid());
            const auto range = parse_fit(fit);
            const auto kind_n = parse_norm_kind(norm);
            write_manifest(out, *dec);
            RegularityReport rep;
            bool degenerate = false;
            try {
                rep = fit_regularity(u, part, kind_n, range.lo, top_of(range, part));
            } catch (const DegenerateSpectrum& e) {
                rep = e.report();
                degenerate = true;
            }
            write_text(fs::path(out) / "blocks.csv", blocks_csv(rep));
            write_json(fs::path(out) / "report.json", to_json(rep));
            if (degenerate) {
                std::fprintf(stderr, "degenerate spectrum: fewer than 3 usable blocks in the fit range\n");
                return exit_degenerate;
            }
            std::printf("exponent %.6f residual %.6f (%s, q in [%d, %d])\n", rep.exponent, rep.residual, norm.c_str(),
                        rep.fit_min, rep.fit_max);
            return exit_ok;
        }

        if (nrm->parsed()) {
            const auto u = load_grid_function(input);
            const DyadicPartition part(u.grid());
            const auto kind_n = parse_norm_kind(norm);
            const double v =
                kind_n == NormKind::zygmund ? zygmund_norm(u, regularity, part) : sobolev_norm(u, regularity, part);
            write_manifest(out, *nrm);
            Json j;
            j["norm_kind"] = to_string(kind_n);
            j["regularity"] = regularity;
            j["value"] = v;
            write_json(fs::path(out) / "norm.json", j);
            std::printf("%s norm of order %g: %.17g\n", norm.c_str(), regularity, v);
            return exit_ok;
        }

        if (pp->parsed()) {
            const auto a = load_grid_function(a_path), u = load_grid_function(u_path);
            require_same_grid(a.grid(), u.grid(), "coefficient and function");
            const DyadicPartition part(u.grid());
            write_manifest(out, *pp);
            write_json(fs::path(out) / "paraproduct.json", to_json(paraproduct(a, u, part)));
            std::printf("wrote %s\n", (fs::path(out) / "paraproduct.json").c_str());
            return exit_ok;
        }

        if (pd->parsed()) {
            const auto u = load_grid_function(u_path);
            const auto& grid = u.grid();
            const DyadicPartition part(grid);
            const AdmissibleCutoff psi(part);
            const auto a = symbol_from_spec(
                symbol, grid,
                [&](const std::string& p) {
                    auto f = load_grid_function(p);
                    require_same_grid(f.grid(), grid, "symbol coefficient and function");
                    return f;
                },
                rho);
            if (method != "direct" && method != "lowrank")
                throw FormatError("--method must be direct or lowrank, got '" + method + "'");
            write_manifest(out, *pd);
            Operator T;
            if (method == "direct") {
                auto op = std::make_shared<ParadiffOperator>(a, psi);
                T = [op](const GridFunction& v) { return op->apply(v); };
            } else {
                T = [&a, &psi](const GridFunction& v) { return paradiff_apply_lowrank(a, v, psi); };
            }
            write_json(fs::path(out) / "result.json", to_json(T(u)));
            if (probe) {
                const auto r = probe_operator_order(T, part, seed);
                Json j;
                j["fitted_order"] = detail::finite_or_null(r.fitted_order);
                j["fit_residual"] = detail::finite_or_null(r.fit_residual);
                j["degenerate"] = r.degenerate;
                j["seed"] = r.seed;
                auto bands = Json::array();
                for (const auto& [band, g] : r.per_band_gains)
                    bands.push_back({{"j", band}, {"log2_gain", detail::finite_or_null(g)}});
                j["bands"] = std::move(bands);
                write_json(fs::path(out) / "probe.json", j);
                if (r.degenerate) {
                    std::fprintf(stderr, "degenerate probe: fewer than 4 bands carry output\n");
                    return exit_degenerate;
                }
                std::printf("probe order %.6f residual %.6f\n", r.fitted_order, r.fit_residual);
            }
            return exit_ok;
        }

        if (pc->parsed()) {
            const auto u = load_grid_function(u_path);
            const auto chi = load_torus_map(map_path);
            require_same_grid(u.grid(), chi.grid(), "function and map");
            const DyadicPartition part(u.grid());
            write_manifest(out, *pc);
            const auto r = alinhac ? paracompose_alinhac(u, chi, part, n_override)
                                   : paracompose_new(u, chi, part, n_override);
            write_json(fs::path(out) / "paracomposed.json", to_json(r));
            std::printf("wrote %s\n", (fs::path(out) / "paracomposed.json").c_str());
            return exit_ok;
        }

        if (pl->parsed()) {
            const auto u = load_grid_function(u_path);
            const auto chi = load_torus_map(map_path);
            require_same_grid(u.grid(), chi.grid(), "function and map");
            const DyadicPartition part(u.grid());
            const auto range = parse_fit(fit);
            ParalinearizeOptions opt;
            opt.N = n_override;
            opt.fit = {parse_norm_kind(norm), range.lo, top_of(range, part)};
            opt.quadrature_nodes = nodes;
            write_manifest(out, *pl);
            const auto res = paralinearize(u, chi, part, opt);

            const fs::path dir(out);
            const std::vector<std::pair<std::string, const GridFunction*>> parts{
                {"composed", &res.composed}, {"chi_star_u", &res.chi_star_u}, {"T_term", &res.T_term},
                {"R0", &res.R0},           {"R1", &res.R1},                 {"R2", &res.R2},
                {"bookkeeping", &res.bookkeeping}};
            for (const auto& [name, f] : parts) write_json(dir / (name + ".json"), to_json(*f));

            Json s;
            s["N"] = res.N_used;
            s["residual"] = res.residual;
            s["bookkeeping_sup"] = res.bookkeeping.sup_norm();
            auto comps = Json::array();
            for (const auto& c : res.reports) {
                Json cj;
                cj["name"] = c.name;
                const auto* f = c.name == "R0" ? &res.R0 : c.name == "R1" ? &res.R1 : &res.R2;
                cj["sup"] = f->sup_norm();
                cj["degenerate"] = c.degenerate;
                cj["report"] = c.report ? to_json(*c.report) : Json(nullptr);
                comps.push_back(std::move(cj));
            }
            s["components"] = std::move(comps);
            write_json(dir / "summary.json", s);

            if (emit_csv || emit_svg) {
                std::vector<DecaySeries> series;
                for (const auto& [name, f] : parts)
                    if (name != "composed" && name != "bookkeeping") series.push_back(decay_series(name, *f, part));
                if (emit_csv) write_text(dir / "decay.csv", decay_csv(series));
                if (emit_svg) write_text(dir / "decay.svg", decay_svg(series));
            }
            for (const auto& c : res.reports) {
                if (c.degenerate || !c.report)
                    std::printf("%s: degenerate\n", c.name.c_str());
                else
                    std::printf("%s: exponent %.4f residual %.4f\n", c.name.c_str(), c.report->exponent,
                                c.report->residual);
            }
            std::printf("identity residual %.3e (N = %d)\n", res.residual, res.N_used);
            if (!(res.residual <= 1e-9))
                throw IdentityViolation("paralinearization residual " + std::to_string(res.residual) + " exceeds 1e-9");
            return exit_ok;
        }

        if (cj->parsed()) {
            const auto chi = load_torus_map(map_path);
            const auto& grid = chi.grid();
            const DyadicPartition part(grid);
            const AdmissibleCutoff psi(part);
            const auto a = symbol_from_spec(
                symbol, grid,
                [&](const std::string& p) {
                    auto f = load_grid_function(p);
                    require_same_grid(f.grid(), grid, "symbol coefficient and map");
                    return f;
                },
                rho);
            std::optional<GridFunction> u;
            if (!u_path.empty()) {
                u = load_grid_function(u_path);
                require_same_grid(u->grid(), grid, "function and map");
            }
            write_manifest(out, *cj);
            const auto D = conjugation_defect_operator(a, chi, part, psi, n_override);
            if (u) write_json(fs::path(out) / "defect.json", to_json(D(*u)));
            const auto r = probe_operator_order(D, part, seed);
            Json j;
            j["fitted_order"] = detail::finite_or_null(r.fitted_order);
            j["fit_residual"] = detail::finite_or_null(r.fit_residual);
            j["degenerate"] = r.degenerate;
            j["symbol_order"] = a.order();
            j["seed"] = r.seed;
            write_json(fs::path(out) / "summary.json", j);
            if (r.degenerate) {
                std::fprintf(stderr, "degenerate probe: the defect annihilates almost every band\n");
                return exit_degenerate;
            }
            std::printf("conjugation defect order %.6f (symbol order %g)\n", r.fitted_order, a.order());
            return exit_ok;
        }

        if (vf->parsed()) {
            for (const auto& s : only)
                if (!acceptance::known_selector(s)) throw FormatError("unknown check '" + s + "' in --only");
            if (!fault.empty() && fault != "partition-profile") throw FormatError("unknown fault '" + fault + "'");
            const acceptance::Context ctx(fault.empty() ? default_profile() : acceptance::faulty_profile());
            write_manifest(out, *vf);
            const auto results = acceptance::run_suite(ctx, only, [](const acceptance::CheckResult& r) {
                std::printf("%s  c%-2d %s%s%s\n", r.passed ? "PASS" : "FAIL", r.criterion, r.name.c_str(),
                            r.error.empty() ? "" : ": ", r.error.c_str());
                std::fflush(stdout);
            });
            const auto report = acceptance::to_json(results);
            write_json(fs::path(out) / "verify_report.json", report);
            return report["passed"].get<bool>() ? exit_ok : exit_acceptance;
        }
    } catch (const IdentityViolation& e) {
        std::fprintf(stderr, "identity violation: %s\n", e.what());
        return exit_identity;
    } catch (const DegenerateSpectrum& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_degenerate;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_input;
    }
    return exit_ok;
}
