#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>

#include "robustkit/error.hpp"

namespace robustkit {

/// Opaque index into one of the model's identifier spaces.
template <class Tag>
struct Id {
    std::uint32_t value = 0;

    constexpr Id() = default;
    constexpr explicit Id(std::uint32_t v) : value(v) {}
    constexpr auto operator<=>(const Id&) const = default;
};

using VarId = Id<struct VarTag>;
using UncParamId = Id<struct UncParamTag>;
using AdjVarId = Id<struct AdjVarTag>;

/// Scalar expression
///
///     constant + sum lin_x*x + sum lin_xi*xi + sum bilin*x*xi + sum lin_y*y
///
/// affine in the uncertain parameters xi for fixed decisions and affine in the
/// decisions (x, y) for fixed xi. Terms are kept in canonical sparse form:
/// sorted by id, one entry per key, no zero coefficients. Products that would
/// leave this class (x*x, xi*xi, y*anything non-constant) raise MalformedExpr.
class Expr {
public:
    using BilinKey = std::pair<VarId, UncParamId>;

    Expr() = default;
    Expr(double c) : constant_(c) {}  // NOLINT(google-explicit-constructor)

    static Expr var(VarId id, double coef = 1.0) {
        Expr e;
        e.add_x(id, coef);
        return e;
    }
    static Expr unc(UncParamId id, double coef = 1.0) {
        Expr e;
        e.add_xi(id, coef);
        return e;
    }
    static Expr adj(AdjVarId id, double coef = 1.0) {
        Expr e;
        e.add_y(id, coef);
        return e;
    }

    double constant() const { return constant_; }
    const std::map<VarId, double>& lin_x() const { return lin_x_; }
    const std::map<UncParamId, double>& lin_xi() const { return lin_xi_; }
    const std::map<BilinKey, double>& bilin() const { return bilin_; }
    const std::map<AdjVarId, double>& lin_y() const { return lin_y_; }

    void set_constant(double c) { constant_ = c; }
    void add_constant(double c) { constant_ += c; }
    void add_x(VarId id, double c) { accumulate(lin_x_, id, c); }
    void add_xi(UncParamId id, double c) { accumulate(lin_xi_, id, c); }
    void add_bilin(VarId x, UncParamId xi, double c) { accumulate(bilin_, BilinKey{x, xi}, c); }
    void add_y(AdjVarId id, double c) { accumulate(lin_y_, id, c); }

    bool references_uncertainty() const { return !lin_xi_.empty() || !bilin_.empty(); }
    bool references_adjustable() const { return !lin_y_.empty(); }
    bool is_constant() const { return lin_x_.empty() && lin_xi_.empty() && bilin_.empty() && lin_y_.empty(); }

    Expr& operator+=(const Expr& o) {
        constant_ += o.constant_;
        for (const auto& [k, v] : o.lin_x_) add_x(k, v);
        for (const auto& [k, v] : o.lin_xi_) add_xi(k, v);
        for (const auto& [k, v] : o.bilin_) add_bilin(k.first, k.second, v);
        for (const auto& [k, v] : o.lin_y_) add_y(k, v);
        return *this;
    }
    Expr& operator-=(const Expr& o) { return *this += -o; }
    Expr& operator*=(double s) {
        if (s == 0.0) {
            *this = Expr();
            return *this;
        }
        constant_ *= s;
        for (auto& [k, v] : lin_x_) v *= s;
        for (auto& [k, v] : lin_xi_) v *= s;
        for (auto& [k, v] : bilin_) v *= s;
        for (auto& [k, v] : lin_y_) v *= s;
        return *this;
    }

    friend Expr operator-(Expr e) { return e *= -1.0; }
    friend Expr operator+(Expr a, const Expr& b) { return a += b; }
    friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
    friend Expr operator*(Expr a, double s) { return a *= s; }
    friend Expr operator*(double s, Expr a) { return a *= s; }

    friend Expr operator*(const Expr& a, const Expr& b) {
        if (a.is_constant()) return b * a.constant_;
        if (b.is_constant()) return a * b.constant_;
        if (!a.bilin_.empty() || !b.bilin_.empty()) {
            throw Error(ErrorCode::MalformedExpr, "bilinear term multiplied by a non-constant");
        }
        if (!a.lin_y_.empty() || !b.lin_y_.empty()) {
            throw Error(ErrorCode::MalformedExpr, "adjustable variable multiplied by a non-constant");
        }
        if ((!a.lin_x_.empty() && !b.lin_x_.empty()) || (!a.lin_xi_.empty() && !b.lin_xi_.empty())) {
            throw Error(ErrorCode::MalformedExpr, "product is quadratic in decisions or in uncertain parameters");
        }
        Expr out;
        out.constant_ = a.constant_ * b.constant_;
        for (const auto& [k, v] : a.lin_x_) out.add_x(k, v * b.constant_);
        for (const auto& [k, v] : b.lin_x_) out.add_x(k, v * a.constant_);
        for (const auto& [k, v] : a.lin_xi_) out.add_xi(k, v * b.constant_);
        for (const auto& [k, v] : b.lin_xi_) out.add_xi(k, v * a.constant_);
        for (const auto& [x, vx] : a.lin_x_) {
            for (const auto& [xi, vxi] : b.lin_xi_) out.add_bilin(x, xi, vx * vxi);
        }
        for (const auto& [x, vx] : b.lin_x_) {
            for (const auto& [xi, vxi] : a.lin_xi_) out.add_bilin(x, xi, vx * vxi);
        }
        return out;
    }

    bool operator==(const Expr&) const = default;

private:
    template <class Map, class Key>
    static void accumulate(Map& m, const Key& k, double c) {
        if (c == 0.0) return;
        auto [it, inserted] = m.try_emplace(k, c);
        if (!inserted && (it->second += c) == 0.0) m.erase(it);
    }

    double constant_ = 0.0;
    std::map<VarId, double> lin_x_;
    std::map<UncParamId, double> lin_xi_;
    std::map<BilinKey, double> bilin_;
    std::map<AdjVarId, double> lin_y_;
};

/// Evaluates `e` at a full assignment; assignments are indexed by id value.
inline double evaluate(const Expr& e, std::span<const double> x, std::span<const double> xi,
                       std::span<const double> y = {}) {
    auto at = [](std::span<const double> v, std::uint32_t id, const char* what) {
        if (id >= v.size()) {
            throw Error(ErrorCode::MissingAssignment, std::string("no value for ") + what + "[" + std::to_string(id) + "]");
        }
        return v[id];
    };
    double sum = e.constant();
    for (const auto& [k, c] : e.lin_x()) sum += c * at(x, k.value, "x");
    for (const auto& [k, c] : e.lin_xi()) sum += c * at(xi, k.value, "xi");
    for (const auto& [k, c] : e.bilin()) sum += c * at(x, k.first.value, "x") * at(xi, k.second.value, "xi");
    for (const auto& [k, c] : e.lin_y()) sum += c * at(y, k.value, "y");
    return sum;
}

}  // namespace robustkit
