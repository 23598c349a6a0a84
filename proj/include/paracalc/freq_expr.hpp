#pragma once

// Closed-form frequency multipliers m(xi) with symbolic differentiation.
// Expressions are immutable trees shared by pointer; copies are cheap.

#include "paracalc/errors.hpp"
#include "paracalc/spectral_grid.hpp"

#include <cmath>
#include <cstdio>
#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace paracalc {

class FreqExpr {
public:
    enum class Op { constant, coord, abs_pow, japanese_pow, sum, product, conj };

    /// The constant 1.
    FreqExpr() : FreqExpr(constant(1.0)) {}

    static FreqExpr constant(cplx c) { return FreqExpr(std::make_shared<Node>(Node{Op::constant, c, 0, 0.0, {}})); }
    /// xi_axis.
    static FreqExpr coord(int axis) { return FreqExpr(std::make_shared<Node>(Node{Op::coord, {}, axis, 0.0, {}})); }
    /// |xi|^p, taken as 0 at xi = 0 when p < 0.
    static FreqExpr abs_pow(double p) { return FreqExpr(std::make_shared<Node>(Node{Op::abs_pow, {}, 0, p, {}})); }
    /// (1 + |xi|^2)^{p/2}.
    static FreqExpr japanese_pow(double p) {
        return FreqExpr(std::make_shared<Node>(Node{Op::japanese_pow, {}, 0, p, {}}));
    }
    /// i xi_0.
    static FreqExpr ixi() { return constant(cplx(0.0, 1.0)) * coord(0); }

    friend FreqExpr operator+(const FreqExpr& a, const FreqExpr& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        return FreqExpr(std::make_shared<Node>(Node{Op::sum, {}, 0, 0.0, {a, b}}));
    }
    friend FreqExpr operator*(const FreqExpr& a, const FreqExpr& b) {
        if (a.is_zero() || b.is_zero()) return constant(0.0);
        if (a.is_one()) return b;
        if (b.is_one()) return a;
        if (a.node_->op == Op::constant && b.node_->op == Op::constant) return constant(a.node_->c * b.node_->c);
        return FreqExpr(std::make_shared<Node>(Node{Op::product, {}, 0, 0.0, {a, b}}));
    }
    friend FreqExpr operator*(cplx s, const FreqExpr& a) { return constant(s) * a; }

    FreqExpr conj() const {
        if (node_->op == Op::constant) return constant(std::conj(node_->c));
        if (node_->op == Op::coord || node_->op == Op::abs_pow || node_->op == Op::japanese_pow) return *this;
        return FreqExpr(std::make_shared<Node>(Node{Op::conj, {}, 0, 0.0, {*this}}));
    }

    cplx operator()(const Freq& xi, int d) const { return eval(*node_, xi, d); }

    /// d/d xi_axis.
    FreqExpr derivative(int axis) const {
        const Node& n = *node_;
        switch (n.op) {
            case Op::constant: return constant(0.0);
            case Op::coord: return constant(n.axis == axis ? 1.0 : 0.0);
            case Op::abs_pow:
                if (n.p == 0.0) return constant(0.0);
                return cplx(n.p) * (coord(axis) * abs_pow(n.p - 2.0));
            case Op::japanese_pow:
                if (n.p == 0.0) return constant(0.0);
                return cplx(n.p) * (coord(axis) * japanese_pow(n.p - 2.0));
            case Op::sum: return n.kids[0].derivative(axis) + n.kids[1].derivative(axis);
            case Op::product:
                return n.kids[0].derivative(axis) * n.kids[1] + n.kids[0] * n.kids[1].derivative(axis);
            case Op::conj: return n.kids[0].derivative(axis).conj();
        }
        return constant(0.0);
    }

    bool is_zero() const { return node_->op == Op::constant && node_->c == cplx(0.0); }
    bool is_one() const { return node_->op == Op::constant && node_->c == cplx(1.0); }
    Op op() const { return node_->op; }

    std::string to_string() const {
        const Node& n = *node_;
        switch (n.op) {
            case Op::constant:
                return n.c.imag() == 0.0 ? fmt(n.c.real()) : "(" + fmt(n.c.real()) + "+" + fmt(n.c.imag()) + "i)";
            case Op::coord: return "xi" + std::to_string(n.axis);
            case Op::abs_pow: return "|xi|^" + fmt(n.p);
            case Op::japanese_pow: return "<xi>^" + fmt(n.p);
            case Op::sum: return "(" + n.kids[0].to_string() + " + " + n.kids[1].to_string() + ")";
            case Op::product: return n.kids[0].to_string() + "*" + n.kids[1].to_string();
            case Op::conj: return "conj(" + n.kids[0].to_string() + ")";
        }
        return "?";
    }

private:
    struct Node {
        Op op;
        cplx c;
        int axis;
        double p;
        std::vector<FreqExpr> kids;
    };

    explicit FreqExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v);
        return buf;
    }

    static cplx eval(const Node& n, const Freq& xi, int d) {
        switch (n.op) {
            case Op::constant: return n.c;
            case Op::coord: return xi[static_cast<std::size_t>(n.axis)];
            case Op::abs_pow: {
                const double r = norm(xi, d);
                if (r == 0.0) return n.p > 0.0 ? 0.0 : (n.p == 0.0 ? 1.0 : 0.0);
                return std::pow(r, n.p);
            }
            case Op::japanese_pow: {
                const double r = norm(xi, d);
                return std::pow(1.0 + r * r, 0.5 * n.p);
            }
            case Op::sum: return eval(*n.kids[0].node_, xi, d) + eval(*n.kids[1].node_, xi, d);
            case Op::product: return eval(*n.kids[0].node_, xi, d) * eval(*n.kids[1].node_, xi, d);
            case Op::conj: return std::conj(eval(*n.kids[0].node_, xi, d));
        }
        return 0.0;
    }

    std::shared_ptr<const Node> node_;
};

/// A parsed multiplier together with its order.
struct OrderedExpr {
    FreqExpr expr;
    double order = 0.0;
};

/// Parses "one", "ixi", "abs^p" and "japanese^p".
inline OrderedExpr parse_freq_expr(const std::string& s) {
    if (s == "one") return {FreqExpr::constant(1.0), 0.0};
    if (s == "ixi") return {FreqExpr::ixi(), 1.0};
    auto power = [&](const std::string& prefix) -> double {
        const std::string tail = s.substr(prefix.size());
        std::size_t used = 0;
        double p = 0.0;
        try {
            p = std::stod(tail, &used);
        } catch (const std::exception&) {
            throw FormatError("bad exponent in '" + s + "'");
        }
        if (used != tail.size() || !std::isfinite(p)) throw FormatError("bad exponent in '" + s + "'");
        return p;
    };
    if (s.rfind("abs^", 0) == 0) {
        const double p = power("abs^");
        return {FreqExpr::abs_pow(p), p};
    }
    if (s.rfind("japanese^", 0) == 0) {
        const double p = power("japanese^");
        return {FreqExpr::japanese_pow(p), p};
    }
    throw FormatError("unknown multiplier '" + s + "' (expected one, ixi, abs^p, japanese^p)");
}

}  // namespace paracalc
