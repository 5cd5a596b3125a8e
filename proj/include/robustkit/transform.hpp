#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "robustkit/error.hpp"
#include "robustkit/expr.hpp"
#include "robustkit/lp/standard_lp.hpp"
#include "robustkit/model.hpp"
#include "robustkit/uncset.hpp"

namespace robustkit {

/// Affine function of the deterministic model's columns.
struct LinearExpr {
    double constant = 0.0;
    std::map<int, double> coefs;

    void add(int col, double c) {
        if (c == 0.0) return;
        auto [it, inserted] = coefs.try_emplace(col, c);
        if (!inserted && (it->second += c) == 0.0) coefs.erase(it);
    }
    LinearExpr& operator+=(const LinearExpr& o) {
        constant += o.constant;
        for (const auto& [j, c] : o.coefs) add(j, c);
        return *this;
    }
    LinearExpr& operator*=(double s) {
        constant *= s;
        for (auto& [j, c] : coefs) c *= s;
        return *this;
    }
    double evaluate(std::span<const double> x) const {
        double v = constant;
        for (const auto& [j, c] : coefs) v += c * x[j];
        return v;
    }
    bool operator==(const LinearExpr&) const = default;
};

/// Where a generated column or row came from: the source constraint (empty
/// for original data) and the role it plays in the counterpart.
struct Provenance {
    std::string source;
    std::string role;

    bool operator==(const Provenance&) const = default;
};

struct DetVar {
    std::string name;
    Domain domain = Domain::Continuous;
    double lower = 0.0;
    double upper = kInf;
    Provenance provenance;
};

struct DetRow {
    std::string name;
    LinearExpr expr;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
    Provenance provenance;
};

/// sqrt(a(x)' cov a(x)), the worst-case deviation of one ellipsoidal group.
struct ConicTerm {
    std::string group;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    std::vector<LinearExpr> direction;

    double evaluate(std::span<const double> x) const {
        Eigen::VectorXd a(static_cast<Eigen::Index>(direction.size()));
        for (std::size_t j = 0; j < direction.size(); ++j) a[static_cast<Eigen::Index>(j)] = direction[j].evaluate(x);
        return std::sqrt(std::max(0.0, a.dot(cov * a)));
    }
};

/// linear(x) + sum_t sqrt(a_t(x)' cov_t a_t(x)) <= 0. The linear part
/// already contains the a_t(x)'mean_t contributions.
struct ConicRow {
    std::string name;
    LinearExpr linear;
    std::vector<ConicTerm> terms;
    Provenance provenance;

    double evaluate(std::span<const double> x) const {
        double v = linear.evaluate(x);
        for (const auto& t : terms) v += t.evaluate(x);
        return v;
    }
};

/// Deterministic LP/MILP (plus second-order-cone rows) produced by the
/// transforms. The first columns correspond one-to-one to the variables of
/// the source model.
struct DeterministicModel {
    ObjSense sense = ObjSense::Minimize;
    std::vector<DetVar> vars;
    std::vector<DetRow> rows;
    std::vector<ConicRow> conic_rows;
    LinearExpr objective;

    int add_var(std::string name, Domain domain, double lower, double upper, Provenance prov) {
        vars.push_back({std::move(name), domain, lower, upper, std::move(prov)});
        return static_cast<int>(vars.size()) - 1;
    }
    void add_row(std::string name, LinearExpr expr, Sense sense_, double rhs, Provenance prov) {
        rows.push_back({std::move(name), std::move(expr), sense_, rhs, std::move(prov)});
    }

    bool has_integers() const {
        for (const auto& v : vars) {
            if (v.domain != Domain::Continuous) return true;
        }
        return false;
    }

    /// Linear rows only; conic rows are handled by the solver.
    lp::StandardLp to_lp() const {
        lp::StandardLp out;
        out.sense = sense;
        out.objective_offset = objective.constant;
        for (const auto& v : vars) out.add_column(v.name, v.lower, v.upper, 0.0, v.domain != Domain::Continuous);
        for (const auto& [j, c] : objective.coefs) out.columns[j].cost = c;
        for (const auto& r : rows) out.add_row(r.name, to_coefs(r.expr), r.sense, r.rhs - r.expr.constant);
        return out;
    }

    static std::vector<std::pair<int, double>> to_coefs(const LinearExpr& e) {
        return {e.coefs.begin(), e.coefs.end()};
    }
};

/// Column ids created by the linear decision rule y(xi) = y0 + sum_j Y_j xi_j.
struct LdrCoefficients {
    struct Rule {
        AdjVarId adj;
        VarId intercept;
        std::vector<std::pair<UncParamId, VarId>> slopes;
    };
    std::vector<Rule> rules;
};

struct LdrOptions {
    // fix every slope Y_j to zero (static rule with the same structure)
    bool fix_slopes_to_zero = false;
    // drop dependencies entirely: y becomes an ordinary bounded variable
    bool static_rule = false;
};

struct LdrResult {
    Model model;
    LdrCoefficients coefficients;
};

namespace detail {

inline Expr copy_without_adjustables(const Expr& e) {
    Expr out(e.constant());
    for (const auto& [k, c] : e.lin_x()) out.add_x(k, c);
    for (const auto& [k, c] : e.lin_xi()) out.add_xi(k, c);
    for (const auto& [k, c] : e.bilin()) out.add_bilin(k.first, k.second, c);
    return out;
}

}  // namespace detail

/// Replaces an objective that depends on xi (directly or through adjustable
/// variables) by an epigraph variable t: min f -> min t, f - t <= 0;
/// max f -> max t, t - f <= 0. Other models are returned unchanged.
inline Model lift_objective(const Model& model, std::optional<VarId>* epigraph = nullptr) {
    const Expr& f = model.objective();
    if (!f.references_uncertainty() && !f.references_adjustable()) return model;
    Model out = model;
    const VarId t = out.add_var("epigraph_t", Domain::Continuous, -kInf, kInf);
    if (model.sense() == ObjSense::Minimize) {
        out.add_constraint(f - Expr::var(t), Sense::LessEqual, 0.0, "objective");
    } else {
        out.add_constraint(Expr::var(t) - f, Sense::LessEqual, 0.0, "objective");
    }
    out.set_objective(Expr::var(t), model.sense());
    if (epigraph) *epigraph = t;
    return out;
}

/// Substitutes y(xi) = y0 + sum_{j in deps} Y_j xi_j for every adjustable
/// variable. Finite bounds on y become robust rows `<y>.lb` / `<y>.ub`.
inline LdrResult apply_ldr(const Model& model, const LdrOptions& options = {}) {
    Model out;
    for (const auto& v : model.vars()) out.add_var(v.name, v.domain, v.lower, v.upper);
    for (const auto& g : model.groups()) out.add_unc_params(g.name, g.size(), g.nominal, g.uncset);

    LdrCoefficients coef;
    for (const auto& a : model.adjvars()) {
        LdrCoefficients::Rule rule;
        rule.adj = a.id;
        if (options.static_rule) {
            rule.intercept = out.add_var(a.name, Domain::Continuous, a.lower, a.upper);
        } else {
            rule.intercept = out.add_var(a.name + ".0", Domain::Continuous, -kInf, kInf);
            for (const auto& d : a.deps) {
                const double bound = options.fix_slopes_to_zero ? 0.0 : kInf;
                rule.slopes.emplace_back(d, out.add_var(a.name + "." + model.param_name(d), Domain::Continuous,
                                                        -bound, bound));
            }
        }
        coef.rules.push_back(std::move(rule));
    }

    auto substitute = [&](const Expr& e) {
        Expr r = detail::copy_without_adjustables(e);
        for (const auto& [y, c] : e.lin_y()) {
            const auto& rule = coef.rules[y.value];
            r.add_x(rule.intercept, c);
            for (const auto& [xi, slope] : rule.slopes) r.add_bilin(slope, xi, c);
        }
        return r;
    };

    for (const auto& c : model.constraints()) out.add_constraint(substitute(c.expr), c.sense, c.rhs, c.name);
    if (!options.static_rule) {
        for (const auto& a : model.adjvars()) {
            const Expr rule = substitute(Expr::adj(a.id));
            if (std::isfinite(a.lower)) out.add_constraint(rule, Sense::GreaterEqual, a.lower, a.name + ".lb");
            if (std::isfinite(a.upper)) out.add_constraint(rule, Sense::LessEqual, a.upper, a.name + ".ub");
        }
    }
    out.set_objective(substitute(model.objective()), model.sense());
    return {std::move(out), std::move(coef)};
}

/// Replaces every uncertain parameter by its nominal value. Adjustable
/// variables become ordinary columns (appended after the model's variables)
/// within their bounds.
inline DeterministicModel nominal_substitute(const Model& model) {
    const std::vector<double> nominal = model.nominal_point();
    DeterministicModel det;
    det.sense = model.sense();
    for (const auto& v : model.vars()) det.add_var(v.name, v.domain, v.lower, v.upper, {"", "original"});
    const int adj_offset = static_cast<int>(det.vars.size());
    for (const auto& a : model.adjvars()) det.add_var(a.name, Domain::Continuous, a.lower, a.upper, {"", "adjustable"});

    auto to_linear = [&](const Expr& e) {
        LinearExpr out;
        out.constant = e.constant();
        for (const auto& [k, c] : e.lin_xi()) out.constant += c * nominal[k.value];
        for (const auto& [k, c] : e.lin_x()) out.add(static_cast<int>(k.value), c);
        for (const auto& [k, c] : e.bilin()) out.add(static_cast<int>(k.first.value), c * nominal[k.second.value]);
        for (const auto& [k, c] : e.lin_y()) out.add(adj_offset + static_cast<int>(k.value), c);
        return out;
    };
    for (const auto& c : model.constraints()) {
        det.add_row(c.name, to_linear(c.expr), c.sense, c.rhs,
                    {c.name, c.is_robust() ? "nominal" : "deterministic"});
    }
    det.objective = to_linear(model.objective());
    return det;
}

/// A robust row in normalized form g(x, xi) = f(x) + sum_j a_j(x) xi_j <= 0,
/// split by parameter group. a_j are affine in the deterministic columns.
struct UncertainRow {
    std::string name;
    LinearExpr f;
    // group index -> direction vector (one entry per parameter in the group)
    std::map<int, std::vector<LinearExpr>> a;
};

/// Normalizes a constraint of a model without adjustable variables. Column
/// j of the deterministic model is VarId j.
inline UncertainRow decompose(const Model& model, const Constraint& c) {
    if (!c.expr.lin_y().empty()) {
        throw Error(ErrorCode::NonAffineAfterSubstitution, "constraint '" + c.name + "' still references y");
    }
    const double s = c.sense == Sense::GreaterEqual ? -1.0 : 1.0;
    UncertainRow row;
    row.name = c.name;
    row.f.constant = s * (c.expr.constant() - c.rhs);
    for (const auto& [k, v] : c.expr.lin_x()) row.f.add(static_cast<int>(k.value), s * v);
    auto slot = [&](UncParamId id) -> LinearExpr& {
        const int g = model.group_of(id);
        auto& vec = row.a[g];
        if (vec.empty()) vec.resize(model.groups()[g].size());
        return vec[model.position_in_group(id)];
    };
    for (const auto& [k, v] : c.expr.lin_xi()) slot(k).constant += s * v;
    for (const auto& [k, v] : c.expr.bilin()) slot(k.second).add(static_cast<int>(k.first.value), s * v);
    return row;
}

/// Duality block for one polyhedral group of a robust row:
///     lam >= 0,  P' lam = a(x),  and returns b' lam
/// which replaces max_{P xi <= b} a(x)' xi in the row.
inline LinearExpr reformulate_polyhedral(DeterministicModel& det, const std::string& source,
                                         std::span<const LinearExpr> a, const PolyhedralSet& set,
                                         int& dual_counter) {
    const int m = set.num_facets();
    const int k = set.dim();
    if (static_cast<int>(a.size()) != k) throw Error(ErrorCode::DimensionMismatch, "direction length differs from set");
    std::vector<int> lam(m);
    LinearExpr budget;
    for (int i = 0; i < m; ++i) {
        lam[i] = det.add_var("lam[" + source + "][" + std::to_string(dual_counter++) + "]", Domain::Continuous, 0.0,
                             kInf, {source, "dual"});
        budget.add(lam[i], set.b()[i]);
    }
    for (int j = 0; j < k; ++j) {
        LinearExpr eq;
        for (int i = 0; i < m; ++i) eq.add(lam[i], set.P()(i, j));
        LinearExpr neg = a[j];
        neg *= -1.0;
        eq += neg;
        const std::string name = "dual_eq[" + source + "][" + std::to_string(det.rows.size()) + "]";
        det.add_row(name, std::move(eq), Sense::Equal, 0.0, {source, "dual_equality"});
    }
    return budget;
}

/// Conic term for one ellipsoidal group: the row gains a(x)'mean in its
/// linear part plus sqrt(a(x)' cov a(x)).
inline ConicTerm reformulate_ellipsoidal(LinearExpr& linear, const std::string& group,
                                         std::span<const LinearExpr> a, const EllipsoidalSet& set) {
    if (static_cast<int>(a.size()) != set.dim()) throw Error(ErrorCode::DimensionMismatch, "direction length differs from set");
    for (int j = 0; j < set.dim(); ++j) {
        LinearExpr scaled = a[j];
        scaled *= set.mean()[j];
        linear += scaled;
    }
    return ConicTerm{group, set.mean(), set.cov(), {a.begin(), a.end()}};
}

/// Resolved sets for every group; unsupported geometry is left empty.
inline std::vector<std::optional<ResolvedSet>> resolve_groups(const Model& model) {
    std::vector<std::optional<ResolvedSet>> out;
    for (const auto& g : model.groups()) out.push_back(resolve(g.uncset));
    return out;
}

/// Robust counterpart of a model without adjustable variables and with a
/// deterministic objective (see lift_objective / apply_ldr).
inline DeterministicModel reformulate(const Model& model) {
    if (!model.adjvars().empty()) {
        throw Error(ErrorCode::NonAffineAfterSubstitution, "apply_ldr must run before reformulation");
    }
    if (model.objective().references_uncertainty()) {
        throw Error(ErrorCode::NoApplicableReformulation, "uncertain objective must be lifted first");
    }
    std::vector<std::optional<ResolvedSet>> sets;
    for (const auto& g : model.groups()) {
        try {
            sets.push_back(resolve(g.uncset));
        } catch (const Error& e) {
            throw Error(ErrorCode::NoApplicableReformulation, "group '" + g.name + "': " + e.what());
        }
    }

    DeterministicModel det;
    det.sense = model.sense();
    for (const auto& v : model.vars()) det.add_var(v.name, v.domain, v.lower, v.upper, {"", "original"});
    for (const auto& [k, c] : model.objective().lin_x()) det.objective.add(static_cast<int>(k.value), c);
    det.objective.constant = model.objective().constant();

    for (const auto& c : model.constraints()) {
        if (!c.is_robust()) {
            LinearExpr e;
            e.constant = c.expr.constant();
            for (const auto& [k, v] : c.expr.lin_x()) e.add(static_cast<int>(k.value), v);
            det.add_row(c.name, std::move(e), c.sense, c.rhs, {c.name, "deterministic"});
            continue;
        }
        UncertainRow row = decompose(model, c);
        LinearExpr linear = row.f;
        std::vector<ConicTerm> terms;
        int dual_counter = 0;
        for (const auto& [g, a] : row.a) {
            const auto& set = sets[g];
            if (!set) {
                throw Error(ErrorCode::NoApplicableReformulation,
                            "constraint '" + c.name + "': set of group '" + model.groups()[g].name +
                                "' has no known reformulation");
            }
            if (const auto* p = std::get_if<PolyhedralSet>(&*set)) {
                linear += reformulate_polyhedral(det, c.name, a, *p, dual_counter);
            } else {
                terms.push_back(reformulate_ellipsoidal(linear, model.groups()[g].name, a, std::get<EllipsoidalSet>(*set)));
            }
        }
        if (terms.empty()) {
            det.add_row(c.name, std::move(linear), Sense::LessEqual, 0.0, {c.name, "robust_row"});
        } else {
            det.conic_rows.push_back({c.name, std::move(linear), std::move(terms), {c.name, "conic_row"}});
        }
    }
    return det;
}

}  // namespace robustkit
