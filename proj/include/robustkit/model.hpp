#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "robustkit/error.hpp"
#include "robustkit/expr.hpp"
#include "robustkit/lp/standard_lp.hpp"
#include "robustkit/uncset.hpp"

namespace robustkit {

using lp::kInf;
using lp::ObjSense;

enum class Domain { Continuous, Binary, Integer };
enum class ConstraintKind { Deterministic, Uncertain };

struct DecisionVar {
    VarId id;
    std::string name;
    Domain domain = Domain::Continuous;
    double lower = 0.0;
    double upper = kInf;

    bool operator==(const DecisionVar&) const = default;
};

struct UncParamGroup {
    std::string name;
    std::vector<UncParamId> ids;
    std::optional<std::vector<double>> nominal;
    UncertaintySet uncset;

    int size() const { return static_cast<int>(ids.size()); }
    bool operator==(const UncParamGroup&) const = default;
};

struct AdjVar {
    AdjVarId id;
    std::string name;
    std::vector<UncParamId> deps;
    double lower = -kInf;
    double upper = kInf;

    bool operator==(const AdjVar&) const = default;
};

struct Constraint {
    std::string name;
    Expr expr;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;

    ConstraintKind kind() const {
        return expr.references_uncertainty() ? ConstraintKind::Uncertain : ConstraintKind::Deterministic;
    }
    /// True when the row must hold for every xi, directly or through y(xi).
    bool is_robust() const { return expr.references_uncertainty() || expr.references_adjustable(); }

    bool operator==(const Constraint&) const = default;
};

/// Container for   min/max_{x, y(.)} max_{xi in U} f(x, y(xi), xi)
///                 s.t. g_i(x, y(xi), xi) <sense_i> rhs_i   for all xi in U.
///
/// All invariants are enforced as elements are added; a fully built Model is
/// treated as immutable by the transforms and solvers.
class Model {
public:
    VarId add_var(std::string name, Domain domain = Domain::Continuous, double lower = 0.0, double upper = kInf) {
        if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
            throw Error(ErrorCode::InvalidBounds, "variable '" + name + "' has lower > upper");
        }
        if (domain == Domain::Binary && (lower < 0.0 || upper > 1.0)) {
            throw Error(ErrorCode::InvalidBounds, "binary variable '" + name + "' must have bounds within [0, 1]");
        }
        const VarId id(static_cast<std::uint32_t>(vars_.size()));
        vars_.push_back({id, std::move(name), domain, lower, upper});
        return id;
    }

    std::vector<UncParamId> add_unc_params(std::string name, int size, std::optional<std::vector<double>> nominal,
                                           UncertaintySet uncset) {
        if (size <= 0) throw Error(ErrorCode::DimensionMismatch, "parameter group '" + name + "' is empty");
        if (nominal && static_cast<int>(nominal->size()) != size) {
            throw Error(ErrorCode::DimensionMismatch, "nominal vector of '" + name + "' has length " +
                                                          std::to_string(nominal->size()) + ", expected " +
                                                          std::to_string(size));
        }
        if (dimension(uncset) != size) {
            throw Error(ErrorCode::DimensionMismatch, "uncertainty set of '" + name + "' has dimension " +
                                                          std::to_string(dimension(uncset)) + ", expected " +
                                                          std::to_string(size));
        }
        if (nominal) {
            const Eigen::Map<const Eigen::VectorXd> point(nominal->data(), size);
            if (!contains(uncset, point, 1e-8)) {
                throw Error(ErrorCode::NominalOutsideSet, "nominal point of '" + name + "' lies outside its set");
            }
        }
        UncParamGroup group{std::move(name), {}, std::move(nominal), std::move(uncset)};
        for (int i = 0; i < size; ++i) {
            const UncParamId id(static_cast<std::uint32_t>(param_group_.size()));
            group.ids.push_back(id);
            param_group_.push_back(static_cast<int>(groups_.size()));
            param_pos_.push_back(i);
        }
        groups_.push_back(std::move(group));
        return groups_.back().ids;
    }

    AdjVarId add_adjustable(std::string name, std::vector<UncParamId> deps, double lower = -kInf,
                            double upper = kInf) {
        check_deps(name, deps);
        if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
            throw Error(ErrorCode::InvalidBounds, "adjustable variable '" + name + "' has lower > upper");
        }
        const AdjVarId id(static_cast<std::uint32_t>(adjvars_.size()));
        adjvars_.push_back({id, std::move(name), std::move(deps), lower, upper});
        return id;
    }

    /// Replaces the dependency list of one adjustable variable.
    void set_uncparams(AdjVarId id, std::vector<UncParamId> deps) {
        if (id.value >= adjvars_.size()) throw Error(ErrorCode::MalformedExpr, "unknown adjustable variable");
        check_deps(adjvars_[id.value].name, deps);
        adjvars_[id.value].deps = std::move(deps);
    }

    int add_constraint(Expr expr, Sense sense, double rhs, std::string name = {}) {
        check_refs(expr);
        if (sense == Sense::Equal && (expr.references_uncertainty() || expr.references_adjustable())) {
            throw Error(ErrorCode::UncertainEquality, "equality constraints may not depend on uncertain parameters");
        }
        if (name.empty()) name = "c" + std::to_string(constraints_.size());
        constraints_.push_back({std::move(name), std::move(expr), sense, rhs});
        return static_cast<int>(constraints_.size()) - 1;
    }

    void set_objective(Expr expr, ObjSense sense) {
        check_refs(expr);
        objective_ = std::move(expr);
        sense_ = sense;
    }

    const std::vector<DecisionVar>& vars() const { return vars_; }
    const std::vector<AdjVar>& adjvars() const { return adjvars_; }
    const std::vector<UncParamGroup>& groups() const { return groups_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const Expr& objective() const { return objective_; }
    ObjSense sense() const { return sense_; }

    int num_params() const { return static_cast<int>(param_group_.size()); }
    int group_of(UncParamId id) const { return param_group_.at(id.value); }
    int position_in_group(UncParamId id) const { return param_pos_.at(id.value); }
    std::string param_name(UncParamId id) const {
        return groups_[group_of(id)].name + "[" + std::to_string(position_in_group(id)) + "]";
    }

    /// Nominal value of every parameter, indexed by UncParamId.
    std::vector<double> nominal_point() const {
        std::vector<double> out(param_group_.size());
        for (const auto& g : groups_) {
            if (!g.nominal) throw Error(ErrorCode::MissingNominal, "group '" + g.name + "' has no nominal value");
            for (int i = 0; i < g.size(); ++i) out[g.ids[i].value] = (*g.nominal)[i];
        }
        return out;
    }

    /// Re-checks every invariant. Elements added through this class already
    /// satisfy them; this exists for models assembled elsewhere.
    void validate() const {
        for (const auto& v : vars_) {
            if (v.lower > v.upper) throw Error(ErrorCode::InvalidBounds, v.name);
        }
        for (const auto& g : groups_) {
            if (g.nominal) {
                const Eigen::Map<const Eigen::VectorXd> point(g.nominal->data(), g.size());
                if (!contains(g.uncset, point, 1e-8)) throw Error(ErrorCode::NominalOutsideSet, g.name);
            }
        }
        for (const auto& a : adjvars_) check_deps(a.name, a.deps);
        for (const auto& c : constraints_) {
            check_refs(c.expr);
            if (c.sense == Sense::Equal && c.is_robust()) throw Error(ErrorCode::UncertainEquality, c.name);
        }
        check_refs(objective_);
    }

    bool operator==(const Model&) const = default;

private:
    void check_deps(const std::string& name, const std::vector<UncParamId>& deps) const {
        if (deps.empty()) throw Error(ErrorCode::EmptyDeps, "adjustable variable '" + name + "' has no dependencies");
        std::set<UncParamId> seen;
        for (const auto& d : deps) {
            if (d.value >= param_group_.size()) {
                throw Error(ErrorCode::UnknownUncParam, "adjustable variable '" + name + "' depends on unknown xi[" +
                                                            std::to_string(d.value) + "]");
            }
            if (!seen.insert(d).second) {
                throw Error(ErrorCode::UnknownUncParam, "adjustable variable '" + name + "' lists xi[" +
                                                            std::to_string(d.value) + "] twice");
            }
        }
    }

    void check_refs(const Expr& e) const {
        auto fail = [](const std::string& what) { throw Error(ErrorCode::MalformedExpr, "dangling " + what); };
        for (const auto& [k, c] : e.lin_x()) {
            if (k.value >= vars_.size()) fail("variable id " + std::to_string(k.value));
        }
        for (const auto& [k, c] : e.lin_xi()) {
            if (k.value >= param_group_.size()) fail("uncertain parameter id " + std::to_string(k.value));
        }
        for (const auto& [k, c] : e.bilin()) {
            if (k.first.value >= vars_.size()) fail("variable id " + std::to_string(k.first.value));
            if (k.second.value >= param_group_.size()) fail("uncertain parameter id " + std::to_string(k.second.value));
        }
        for (const auto& [k, c] : e.lin_y()) {
            if (k.value >= adjvars_.size()) fail("adjustable variable id " + std::to_string(k.value));
        }
    }

    std::vector<DecisionVar> vars_;
    std::vector<AdjVar> adjvars_;
    std::vector<UncParamGroup> groups_;
    std::vector<int> param_group_;
    std::vector<int> param_pos_;
    std::vector<Constraint> constraints_;
    Expr objective_;
    ObjSense sense_ = ObjSense::Minimize;
};

}  // namespace robustkit
