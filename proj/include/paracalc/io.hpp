#pragma once

/**
 * @file io.hpp
 * @brief JSON files for grid functions, torus maps and regularity reports,
 * plus the CSV and SVG outputs of the command-line tool.
 *
 * GridFunction: {"d", "J", "length", "real", "values"} with values row-major,
 * plain numbers when real and [re, im] pairs otherwise.
 * TorusMap: {"d", "J", "g", "is_diffeo"} with one real value list per axis;
 * is_diffeo is recomputed on load.
 */

#include "paracalc/errors.hpp"
#include "paracalc/littlewood_paley.hpp"
#include "paracalc/spectral_grid.hpp"
#include "paracalc/torus_map.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace paracalc {

using Json = nlohmann::ordered_json;

namespace detail {

template <class T>
T field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError(std::string("field '") + key + "' has the wrong type");
    }
}

inline double number(const Json& v) {
    if (!v.is_number()) throw FormatError("expected a number in 'values'");
    return v.get<double>();
}

// Non-finite numbers have no JSON literal; they are written as null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline TorusGrid grid_of(const Json& j) {
    const int d = field<int>(j, "d"), J = field<int>(j, "J");
    const double length = j.contains("length") ? field<double>(j, "length") : two_pi;
    return TorusGrid(d, J, length);
}

}  // namespace detail

inline Json to_json(const GridFunction& f) {
    const auto& g = f.grid();
    Json j;
    j["d"] = g.dim();
    j["J"] = g.depth();
    j["length"] = g.length();
    j["real"] = f.is_real();
    auto vals = Json::array();
    for (const auto& v : f.values()) {
        if (f.is_real())
            vals.push_back(v.real());
        else
            vals.push_back(Json::array({v.real(), v.imag()}));
    }
    j["values"] = std::move(vals);
    return j;
}

inline GridFunction grid_function_from_json(const Json& j) {
    const auto grid = detail::grid_of(j);
    const bool real = detail::field<bool>(j, "real");
    if (!j.contains("values")) throw FormatError("missing field 'values'");
    const auto& vals = j.at("values");
    if (!vals.is_array() || vals.size() != grid.size())
        throw FormatError("'values' must hold " + std::to_string(grid.size()) + " entries");
    if (real) {
        std::vector<double> v;
        v.reserve(vals.size());
        for (const auto& x : vals) v.push_back(detail::number(x));
        return GridFunction::from_real(grid, v);
    }
    std::vector<cplx> v;
    v.reserve(vals.size());
    for (const auto& x : vals) {
        if (x.is_number())
            v.emplace_back(detail::number(x), 0.0);
        else if (x.is_array() && x.size() == 2)
            v.emplace_back(detail::number(x[0]), detail::number(x[1]));
        else
            throw FormatError("complex values must be [re, im] pairs");
    }
    return GridFunction::from_values(grid, std::move(v));
}

inline Json to_json(const TorusMap& chi) {
    const auto& g = chi.grid();
    Json j;
    j["d"] = g.dim();
    j["J"] = g.depth();
    auto gs = Json::array();
    for (const auto& gi : chi.displacements()) gs.push_back(gi.real_values());
    j["g"] = std::move(gs);
    j["is_diffeo"] = chi.is_diffeo();
    return j;
}

inline TorusMap torus_map_from_json(const Json& j) {
    const auto grid = detail::grid_of(j);
    if (!j.contains("g") || !j.at("g").is_array() || static_cast<int>(j.at("g").size()) != grid.dim())
        throw FormatError("'g' must hold one value list per axis");
    std::vector<GridFunction> g;
    for (const auto& axis : j.at("g")) {
        if (!axis.is_array() || axis.size() != grid.size())
            throw FormatError("each displacement needs " + std::to_string(grid.size()) + " values");
        std::vector<double> v;
        for (const auto& x : axis) v.push_back(detail::number(x));
        g.push_back(GridFunction::from_real(grid, v));
    }
    return TorusMap(grid, std::move(g));
}

inline Json to_json(const RegularityReport& r) {
    Json j;
    j["exponent"] = detail::finite_or_null(r.exponent);
    j["norm_kind"] = to_string(r.norm_kind);
    j["fit_range"] = Json::array({r.fit_min, r.fit_max});
    j["residual"] = detail::finite_or_null(r.residual);
    j["degenerate"] = r.degenerate;
    auto blocks = Json::array();
    for (std::size_t q = 0; q < r.sup.size(); ++q) {
        Json b;
        b["q"] = static_cast<int>(q);
        b["sup"] = r.sup[q];
        b["l2"] = r.l2[q];
        blocks.push_back(std::move(b));
    }
    j["blocks"] = std::move(blocks);
    return j;
}

// ------------------------------------------------------------------ files

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw FileError("write failed for '" + path.string() + "'");
}

inline Json read_json(const std::filesystem::path& path) {
    const auto text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(1) + "\n"); }

inline GridFunction load_grid_function(const std::filesystem::path& path) {
    return grid_function_from_json(read_json(path));
}

inline TorusMap load_torus_map(const std::filesystem::path& path) { return torus_map_from_json(read_json(path)); }

// -------------------------------------------------------------------- CSV

/// %.17g, so every double survives a round trip through the text.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// q,sup,l2 per block.
inline std::string blocks_csv(const RegularityReport& r) {
    std::string out = "q,sup,l2\n";
    for (std::size_t q = 0; q < r.sup.size(); ++q)
        out += std::to_string(q) + "," + fmt17(r.sup[q]) + "," + fmt17(r.l2[q]) + "\n";
    return out;
}

struct DecaySeries {
    std::string component;
    std::vector<double> sup, l2;  // per block
};

inline DecaySeries decay_series(const std::string& component, const GridFunction& f, const DyadicPartition& part) {
    auto dec = decompose(f, part);
    return {component, std::move(dec.sup), std::move(dec.l2)};
}

/// component,q,log2_sup,log2_l2; empty blocks give -inf.
inline std::string decay_csv(const std::vector<DecaySeries>& series) {
    std::string out = "component,q,log2_sup,log2_l2\n";
    for (const auto& s : series)
        for (std::size_t q = 0; q < s.sup.size(); ++q)
            out += s.component + "," + std::to_string(q) + "," + fmt17(std::log2(s.sup[q])) + "," +
                   fmt17(std::log2(s.l2[q])) + "\n";
    return out;
}

/// Line chart of log2 sup norms against q, one polyline per component.
inline std::string decay_svg(const std::vector<DecaySeries>& series) {
    constexpr double W = 640, H = 400, M = 50;
    double qmax = 1, lo = 0, hi = -1e300;
    for (const auto& s : series) {
        qmax = std::max(qmax, static_cast<double>(s.sup.size()) - 1);
        for (double v : s.sup)
            if (v > 0) {
                lo = std::min(lo, std::log2(v));
                hi = std::max(hi, std::log2(v));
            }
    }
    if (!(hi > lo)) hi = lo + 1;
    auto X = [&](double q) { return M + (W - 2 * M) * q / qmax; };
    auto Y = [&](double v) { return H - M - (H - 2 * M) * (v - lo) / (hi - lo); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" font-size=\"12\">q</text>\n";
    o << "<text x=\"8\" y=\"" << M - 12 << "\" font-size=\"12\">log2 sup of block (" << fmt17(lo).substr(0, 6) << " .. "
      << fmt17(hi).substr(0, 6) << ")</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* c = colors[i % 6];
        o << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
        for (std::size_t q = 0; q < series[i].sup.size(); ++q)
            if (series[i].sup[q] > 0) o << X(static_cast<double>(q)) << "," << Y(std::log2(series[i].sup[q])) << " ";
        o << "\"/>\n";
        o << "<text x=\"" << W - M + 4 << "\" y=\"" << M + 14.0 * static_cast<double>(i) << "\" font-size=\"11\" fill=\""
          << c << "\">" << series[i].component << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace paracalc
