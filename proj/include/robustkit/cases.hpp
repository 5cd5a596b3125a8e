#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robustkit/error.hpp"
#include "robustkit/expr.hpp"
#include "robustkit/model.hpp"
#include "robustkit/uncset.hpp"

namespace robustkit::cases {

enum class CaseKind { Portfolio, Knapsack, Facility };
enum class SetGeometry { Polyhedral, Ellipsoidal };

inline std::string to_string(CaseKind k) {
    switch (k) {
        case CaseKind::Portfolio: return "portfolio";
        case CaseKind::Knapsack: return "knapsack";
        case CaseKind::Facility: return "facility";
    }
    return "?";
}

inline std::string to_string(SetGeometry g) { return g == SetGeometry::Polyhedral ? "poly" : "ellip"; }

inline CaseKind parse_case(const std::string& s) {
    if (s == "portfolio") return CaseKind::Portfolio;
    if (s == "knapsack") return CaseKind::Knapsack;
    if (s == "facility") return CaseKind::Facility;
    throw Error(ErrorCode::ValidationError, "unknown case '" + s + "'");
}

inline SetGeometry parse_geometry(const std::string& s) {
    if (s == "poly" || s == "polyhedral") return SetGeometry::Polyhedral;
    if (s == "ellip" || s == "ellipsoidal") return SetGeometry::Ellipsoidal;
    throw Error(ErrorCode::ValidationError, "unknown geometry '" + s + "'");
}

/// 64-bit linear congruential generator with Knuth's MMIX constants.
/// uniform() uses the top 53 bits of the state.
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_;
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

struct CaseSpec {
    CaseKind kind = CaseKind::Portfolio;
    // assets / items / customers
    int n = 3;
    // facilities (facility case only)
    int m = 2;
    SetGeometry geometry = SetGeometry::Polyhedral;
    double alpha = 0.5;
    std::uint64_t seed = 1;
    // budget of scaled deviations; nullopt selects max(1, n/2), a negative
    // value drops the budget facet and leaves a plain box
    std::optional<double> budget;
};

/// Set over a group with nominal `center` and per-coordinate half widths
/// alpha*delta. Polyhedral: the box plus, unless disabled, one budget facet
/// on the scaled deviations in direction `budget_sign` (+1 limits upward
/// deviations, -1 downward ones). Ellipsoidal: the axis-aligned ellipsoid
/// with cov = n alpha^2 diag(delta^2), which contains the box. At alpha = 0
/// both geometries collapse to the singleton {center}, emitted as a
/// degenerate box.
inline UncertaintySet scaled_set(const Eigen::VectorXd& center, const Eigen::VectorXd& delta, double alpha,
                                 SetGeometry geometry, std::optional<double> budget, double budget_sign) {
    const auto n = center.size();
    if (geometry == SetGeometry::Ellipsoidal && alpha > 0.0) {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) cov(i, i) = static_cast<double>(n) * alpha * alpha * delta[i] * delta[i];
        return ellipsoidal(center, cov);
    }
    const double gamma = budget.value_or(std::max(1.0, static_cast<double>(n) / 2.0));
    const bool with_budget = geometry == SetGeometry::Polyhedral && gamma >= 0.0 && alpha > 0.0;
    const Eigen::Index rows = 2 * n + (with_budget ? 1 : 0);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(rows, n);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < n; ++i) {
        P(2 * i, i) = 1.0;
        b[2 * i] = center[i] + alpha * delta[i];
        P(2 * i + 1, i) = -1.0;
        b[2 * i + 1] = -(center[i] - alpha * delta[i]);
    }
    if (with_budget) {
        // sum_i sign (xi_i - center_i) / delta_i <= gamma alpha
        double rhs = gamma * alpha;
        for (Eigen::Index i = 0; i < n; ++i) {
            P(rows - 1, i) = budget_sign / delta[i];
            rhs += budget_sign * center[i] / delta[i];
        }
        b[rows - 1] = rhs;
    }
    return polyhedral(std::move(P), std::move(b));
}

/// max xi'x  s.t.  sum x = 1, x >= 0, with uncertain returns xi.
inline Model gen_portfolio(const CaseSpec& spec) {
    if (spec.n < 2) throw Error(ErrorCode::ValidationError, "portfolio needs n >= 2");
    Lcg rng(spec.seed);
    const int n = spec.n;
    Eigen::VectorXd mean(n), delta(n);
    for (int i = 0; i < n; ++i) {
        mean[i] = 1.05 + 0.1 * rng.uniform();
        delta[i] = 0.05 + 0.1 * rng.uniform();
    }
    Model m;
    std::vector<VarId> x;
    for (int i = 0; i < n; ++i) x.push_back(m.add_var("x" + std::to_string(i), Domain::Continuous, 0.0, kInf));
    const auto xi = m.add_unc_params("r", n, std::vector<double>(mean.data(), mean.data() + n),
                                     scaled_set(mean, delta, spec.alpha, spec.geometry, spec.budget, -1.0));
    Expr total, ret;
    for (int i = 0; i < n; ++i) {
        total += Expr::var(x[i]);
        ret += Expr::var(x[i]) * Expr::unc(xi[i]);
    }
    m.add_constraint(total, Sense::Equal, 1.0, "budget");
    m.set_objective(ret, ObjSense::Maximize);
    return m;
}

/// max v'x  s.t.  w'x <= cap, x binary, with uncertain weights w.
inline Model gen_knapsack(const CaseSpec& spec) {
    if (spec.n < 1) throw Error(ErrorCode::ValidationError, "knapsack needs n >= 1");
    Lcg rng(spec.seed);
    const int n = spec.n;
    Eigen::VectorXd value(n), weight(n), delta(n);
    for (int i = 0; i < n; ++i) {
        value[i] = 10.0 + 20.0 * rng.uniform();
        weight[i] = 5.0 + 10.0 * rng.uniform();
        delta[i] = 0.2 * weight[i];
    }
    const double cap = 0.5 * weight.sum();
    Model m;
    std::vector<VarId> x;
    for (int i = 0; i < n; ++i) x.push_back(m.add_var("x" + std::to_string(i), Domain::Binary, 0.0, 1.0));
    const auto w = m.add_unc_params("w", n, std::vector<double>(weight.data(), weight.data() + n),
                                    scaled_set(weight, delta, spec.alpha, spec.geometry, spec.budget, 1.0));
    Expr load, obj;
    for (int i = 0; i < n; ++i) {
        load += Expr::var(x[i]) * Expr::unc(w[i]);
        obj += Expr::var(x[i], value[i]);
    }
    m.add_constraint(load, Sense::LessEqual, cap, "capacity");
    m.set_objective(obj, ObjSense::Maximize);
    return m;
}

/// min sum F_i x_i + sum c_ij y_ij(d)
/// s.t. sum_i y_ij(d) >= d_j, sum_j y_ij(d) <= C_i x_i, y >= 0, x binary,
/// with uncertain demands d and supply y_ij adjustable on all demands.
inline Model gen_facility(const CaseSpec& spec) {
    if (spec.m < 1 || spec.n < 1) throw Error(ErrorCode::ValidationError, "facility needs m, n >= 1");
    Lcg rng(spec.seed);
    const int fm = spec.m;
    const int n = spec.n;
    Eigen::VectorXd fixed(fm), demand(n), delta(n);
    Eigen::MatrixXd cost(fm, n);
    for (int i = 0; i < fm; ++i) fixed[i] = 10.0 + 20.0 * rng.uniform();
    for (int j = 0; j < n; ++j) {
        demand[j] = 5.0 + 5.0 * rng.uniform();
        delta[j] = 0.5 * demand[j];
    }
    for (int i = 0; i < fm; ++i) {
        for (int j = 0; j < n; ++j) cost(i, j) = 1.0 + 4.0 * rng.uniform();
    }
    const double dmax = (demand + delta).sum();
    Eigen::VectorXd capacity(fm);
    for (int i = 0; i < fm; ++i) capacity[i] = dmax * (fm == 1 ? 1.2 : 0.7 + 0.6 * rng.uniform());

    Model m;
    std::vector<VarId> x;
    for (int i = 0; i < fm; ++i) x.push_back(m.add_var("open" + std::to_string(i), Domain::Binary, 0.0, 1.0));
    const auto d = m.add_unc_params("d", n, std::vector<double>(demand.data(), demand.data() + n),
                                    scaled_set(demand, delta, spec.alpha, spec.geometry, spec.budget, 1.0));
    std::vector<std::vector<AdjVarId>> y(fm);
    for (int i = 0; i < fm; ++i) {
        for (int j = 0; j < n; ++j) {
            y[i].push_back(m.add_adjustable("y" + std::to_string(i) + "_" + std::to_string(j), d, 0.0, kInf));
        }
    }
    for (int j = 0; j < n; ++j) {
        Expr served = -Expr::unc(d[j]);
        for (int i = 0; i < fm; ++i) served += Expr::adj(y[i][j]);
        m.add_constraint(served, Sense::GreaterEqual, 0.0, "demand" + std::to_string(j));
    }
    for (int i = 0; i < fm; ++i) {
        Expr shipped = Expr::var(x[i], -capacity[i]);
        for (int j = 0; j < n; ++j) shipped += Expr::adj(y[i][j]);
        m.add_constraint(shipped, Sense::LessEqual, 0.0, "capacity" + std::to_string(i));
    }
    Expr obj;
    for (int i = 0; i < fm; ++i) {
        obj += Expr::var(x[i], fixed[i]);
        for (int j = 0; j < n; ++j) obj += Expr::adj(y[i][j], cost(i, j));
    }
    m.set_objective(obj, ObjSense::Minimize);
    return m;
}

inline Model generate(const CaseSpec& spec) {
    switch (spec.kind) {
        case CaseKind::Portfolio: return gen_portfolio(spec);
        case CaseKind::Knapsack: return gen_knapsack(spec);
        case CaseKind::Facility: return gen_facility(spec);
    }
    throw Error(ErrorCode::ValidationError, "unknown case");
}

/// n evenly spaced values on [0, 1].
inline std::vector<double> alpha_grid(int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
    return out;
}

}  // namespace robustkit::cases
