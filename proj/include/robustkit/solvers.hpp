#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "robustkit/error.hpp"
#include "robustkit/lp/branch_and_bound.hpp"
#include "robustkit/lp/simplex.hpp"
#include "robustkit/model.hpp"
#include "robustkit/transform.hpp"
#include "robustkit/uncset.hpp"

namespace robustkit {

using lp::Status;

struct SolveOptions {
    double cut_tol = 1e-6;
    int max_iter = 200;
    double conic_tol = 1e-6;
    double mip_gap = 1e-6;
    // force every decision-rule slope to zero
    bool fix_ldr_slopes = false;
    // treat adjustable variables as ordinary (here-and-now) variables
    bool static_adjustables = false;
    lp::LpOptions lp;
};

/// Decision rule y(xi) = intercept + sum slopes[j].second * xi_{slopes[j].first}.
struct LdrRule {
    double intercept = 0.0;
    std::vector<std::pair<UncParamId, double>> slopes;

    double evaluate(std::span<const double> xi) const {
        double v = intercept;
        for (const auto& [id, s] : slopes) v += s * xi[id.value];
        return v;
    }
};

/// A candidate solution of the original model: x indexed by VarId and one
/// rule per adjustable variable indexed by AdjVarId.
struct RobustPoint {
    std::vector<double> x;
    std::vector<LdrRule> rules;
};

/// Separation outcome for one robust row in normalized form g <= 0.
struct ConstraintReport {
    std::string name;
    double value = 0.0;
    // group name -> maximizing parameter vector
    std::map<std::string, std::vector<double>> worst_case;
};

struct FeasibilityReport {
    std::vector<ConstraintReport> constraints;
    double max_violation = 0.0;
    bool feasible = true;
};

struct SolveStats {
    int cuts_added = 0;
    int iterations = 0;
    int master_solves = 0;
    int separation_solves = 0;
    double transform_ms = 0.0;
    double solve_ms = 0.0;
    std::vector<double> master_objectives;
};

struct SolveResult {
    std::string solver;
    Status status = Status::Infeasible;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x;
    std::vector<std::string> var_names;
    std::vector<std::string> adj_names;
    std::vector<LdrRule> rules;
    std::vector<ConstraintReport> worst_case;
    double max_violation = 0.0;
    SolveStats stats;

    RobustPoint point() const { return {x, rules}; }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Numeric form f + sum_j a_j xi_j of a robust row at a fixed point.
struct NumericRow {
    double f = 0.0;
    std::map<int, Eigen::VectorXd> a;
};

inline std::vector<std::optional<ResolvedSet>> separable_sets(const Model& model) {
    std::vector<std::optional<ResolvedSet>> sets;
    for (const auto& g : model.groups()) {
        std::optional<ResolvedSet> s;
        try {
            s = resolve(g.uncset);
        } catch (const Error& e) {
            throw Error(ErrorCode::SeparationUnavailable, "group '" + g.name + "': " + e.what());
        }
        sets.push_back(std::move(s));
    }
    return sets;
}

inline ConstraintReport separate(const Model& model, const std::vector<std::optional<ResolvedSet>>& sets,
                                 const std::string& name, const NumericRow& row, int* separation_solves = nullptr) {
    ConstraintReport rep{name, row.f, {}};
    for (const auto& [g, a] : row.a) {
        const auto& group = model.groups()[g];
        if (!sets[g]) {
            throw Error(ErrorCode::SeparationUnavailable, "set of group '" + group.name + "' has no separation oracle");
        }
        const SupportResult s = support_function(*sets[g], a);
        if (separation_solves) ++*separation_solves;
        rep.value += s.value;
        rep.worst_case[group.name] = std::vector<double>(s.argmax.data(), s.argmax.data() + s.argmax.size());
    }
    return rep;
}

inline NumericRow numeric_row(const Model& model, const Expr& expr, Sense sense, double rhs, const RobustPoint& p) {
    const double s = sense == Sense::GreaterEqual ? -1.0 : 1.0;
    NumericRow row;
    row.f = expr.constant() - rhs;
    auto slot = [&](UncParamId id) -> double& {
        const int g = model.group_of(id);
        auto [it, inserted] = row.a.try_emplace(g, Eigen::VectorXd::Zero(model.groups()[g].size()));
        return it->second[model.position_in_group(id)];
    };
    for (const auto& [k, c] : expr.lin_x()) row.f += c * p.x.at(k.value);
    for (const auto& [k, c] : expr.lin_xi()) slot(k) += c;
    for (const auto& [k, c] : expr.bilin()) slot(k.second) += c * p.x.at(k.first.value);
    for (const auto& [k, c] : expr.lin_y()) {
        if (k.value >= p.rules.size()) {
            throw Error(ErrorCode::MissingAssignment, "no decision rule for adjustable variable " + std::to_string(k.value));
        }
        const LdrRule& rule = p.rules[k.value];
        row.f += c * rule.intercept;
        for (const auto& [xi, slope] : rule.slopes) slot(xi) += c * slope;
    }
    row.f *= s;
    for (auto& [g, a] : row.a) a *= s;
    return row;
}

inline lp::LpSolution solve_kernel(const lp::StandardLp& lp, const SolveOptions& opts) {
    lp::LpOptions o = opts.lp;
    o.mip_gap = opts.mip_gap;
    if (!lp.integer_columns().empty()) return lp::solve_milp(lp, o);
    return lp::solve_lp(lp, o);
}

/// Solves a deterministic model; conic rows are handled by supporting
/// hyperplane outer approximation.
inline lp::LpSolution solve_deterministic(const DeterministicModel& det, const SolveOptions& opts, SolveStats& stats) {
    lp::StandardLp lp = det.to_lp();
    // initial outer approximation: linearize every cone at +-e_j
    for (const auto& row : det.conic_rows) {
        std::size_t dim = 0;
        for (const auto& term : row.terms) dim = std::max(dim, term.direction.size());
        int k = 0;
        for (std::size_t j = 0; j < dim; ++j) {
            for (double sign : {1.0, -1.0}) {
                LinearExpr cut = row.linear;
                for (const auto& term : row.terms) {
                    if (j >= term.direction.size()) continue;
                    const auto jj = static_cast<Eigen::Index>(j);
                    const Eigen::VectorXd g = sign * term.cov.col(jj) / std::sqrt(term.cov(jj, jj));
                    for (Eigen::Index i = 0; i < g.size(); ++i) {
                        LinearExpr scaled = term.direction[static_cast<std::size_t>(i)];
                        scaled *= g[i];
                        cut += scaled;
                    }
                }
                lp.add_row(row.name + ".init" + std::to_string(k++), DeterministicModel::to_coefs(cut),
                           Sense::LessEqual, -cut.constant);
            }
        }
    }
    if (det.conic_rows.empty()) {
        ++stats.master_solves;
        ++stats.iterations;
        lp::LpSolution sol = solve_kernel(lp, opts);
        if (sol.status == Status::Optimal) stats.master_objectives.push_back(sol.objective);
        return sol;
    }

    // adds a tangent cut for every conic row violated at x
    int round = 0;
    auto add_cuts = [&](const std::vector<double>& x, std::vector<lp::StandardLp*> targets) {
        ++round;
        int added = 0;
        for (const auto& row : det.conic_rows) {
            if (row.evaluate(x) <= opts.conic_tol) continue;
            // gradient of sqrt(a' S a) at a_hat is S a_hat / sqrt(a_hat' S a_hat)
            LinearExpr cut = row.linear;
            for (const auto& term : row.terms) {
                Eigen::VectorXd a(static_cast<Eigen::Index>(term.direction.size()));
                for (Eigen::Index j = 0; j < a.size(); ++j) a[j] = term.direction[j].evaluate(x);
                const double q = a.dot(term.cov * a);
                if (q <= 0.0) continue;
                const Eigen::VectorXd g = term.cov * a / std::sqrt(q);
                for (Eigen::Index j = 0; j < a.size(); ++j) {
                    LinearExpr scaled = term.direction[j];
                    scaled *= g[j];
                    cut += scaled;
                }
            }
            const auto coefs = DeterministicModel::to_coefs(cut);
            for (auto* t : targets) t->add_row(row.name + ".oa" + std::to_string(round), coefs, Sense::LessEqual, -cut.constant);
            ++added;
        }
        stats.cuts_added += added;
        return added;
    };
    auto budget_left = [&] { return stats.master_solves < opts.max_iter; };

    // Continuous outer approximation on `work`, mirroring its cuts into `mirror`.
    auto converge = [&](lp::StandardLp& work, lp::StandardLp* mirror) {
        while (true) {
            lp::LpSolution sol = solve_kernel(work, opts);
            ++stats.master_solves;
            ++stats.iterations;
            if (sol.status != Status::Optimal) return sol;
            if (!mirror) stats.master_objectives.push_back(sol.objective);
            std::vector<lp::StandardLp*> targets{&work};
            if (mirror) targets.push_back(mirror);
            const int added = add_cuts(sol.x, targets);
            spdlog::debug("outer approximation round {}: objective {}, {} cuts", round, sol.objective, added);
            if (added == 0) return sol;
            if (!budget_left()) {
                sol.status = Status::IterLimit;
                return sol;
            }
        }
    };

    const std::vector<int> integers = lp.integer_columns();
    if (integers.empty()) return converge(lp, nullptr);

    // Integer models: converge on the continuous relaxation first, then
    // alternate MILP masters with continuous passes at the master's integer
    // assignment. Every cut is a tangent of a convex cone, so all stay valid.
    {
        lp::StandardLp relaxed = lp;
        for (int j : integers) relaxed.columns[j].integer = false;
        converge(relaxed, &lp);
    }
    while (true) {
        lp::LpSolution sol = solve_kernel(lp, opts);
        ++stats.master_solves;
        ++stats.iterations;
        if (sol.status != Status::Optimal) return sol;
        stats.master_objectives.push_back(sol.objective);
        const int added = add_cuts(sol.x, {&lp});
        spdlog::debug("outer approximation master {}: objective {}, {} cuts", round, sol.objective, added);
        if (added == 0) return sol;
        if (!budget_left()) {
            sol.status = Status::IterLimit;
            return sol;
        }
        lp::StandardLp fixed = lp;
        for (int j : integers) {
            fixed.columns[j].integer = false;
            fixed.columns[j].lower = fixed.columns[j].upper = std::round(sol.x[j]);
        }
        const lp::LpSolution pass = converge(fixed, &lp);
        if (pass.status == Status::IterLimit) {
            sol.status = Status::IterLimit;
            return sol;
        }
    }
}

/// Lifted and decision-rule-substituted model plus the bookkeeping needed
/// to map its solution back onto the original model.
struct Prepared {
    Model model;
    LdrCoefficients ldr;
};

inline Prepared prepare(const Model& model, const SolveOptions& opts) {
    Model lifted = lift_objective(model);
    if (lifted.adjvars().empty()) return {std::move(lifted), {}};
    LdrOptions lo;
    lo.fix_slopes_to_zero = opts.fix_ldr_slopes;
    lo.static_rule = opts.static_adjustables;
    auto [m, c] = apply_ldr(lifted, lo);
    return {std::move(m), std::move(c)};
}

inline void fill_point(const Model& original, const Prepared& prep, std::span<const double> cols, SolveResult& res) {
    res.x.assign(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(original.vars().size()));
    res.rules.clear();
    for (const auto& r : prep.ldr.rules) {
        LdrRule rule{cols[r.intercept.value], {}};
        for (const auto& [xi, col] : r.slopes) rule.slopes.emplace_back(xi, cols[col.value]);
        res.rules.push_back(std::move(rule));
    }
}

inline void describe(const Model& model, SolveResult& res) {
    for (const auto& v : model.vars()) res.var_names.push_back(v.name);
    for (const auto& a : model.adjvars()) res.adj_names.push_back(a.name);
}

}  // namespace detail

/// Worst-case value of every robust row (including decision-rule bound rows
/// `<y>.lb` / `<y>.ub`) at a candidate point, in normalized form g <= 0.
inline FeasibilityReport check_robust_feasibility(const Model& model, const RobustPoint& point, double tol = 1e-6) {
    if (point.x.size() != model.vars().size()) {
        throw Error(ErrorCode::MissingAssignment, "point has " + std::to_string(point.x.size()) + " values, model has " +
                                                      std::to_string(model.vars().size()) + " variables");
    }
    const auto sets = detail::separable_sets(model);
    FeasibilityReport rep;
    auto record = [&](ConstraintReport c) {
        rep.max_violation = std::max(rep.max_violation, c.value);
        rep.constraints.push_back(std::move(c));
    };
    for (const auto& c : model.constraints()) {
        if (!c.is_robust()) continue;
        record(detail::separate(model, sets, c.name, detail::numeric_row(model, c.expr, c.sense, c.rhs, point)));
    }
    for (const auto& a : model.adjvars()) {
        const Expr y = Expr::adj(a.id);
        if (std::isfinite(a.lower)) {
            record(detail::separate(model, sets, a.name + ".lb",
                                    detail::numeric_row(model, y, Sense::GreaterEqual, a.lower, point)));
        }
        if (std::isfinite(a.upper)) {
            record(detail::separate(model, sets, a.name + ".ub",
                                    detail::numeric_row(model, y, Sense::LessEqual, a.upper, point)));
        }
    }
    rep.feasible = rep.max_violation <= tol;
    return rep;
}

namespace detail {

inline void finish(const Model& model, SolveResult& res) {
    if (res.x.empty()) return;
    const FeasibilityReport rep = check_robust_feasibility(model, res.point());
    res.worst_case = rep.constraints;
    res.max_violation = rep.max_violation;
}

}  // namespace detail

/// Duality-based robust counterpart solved by the embedded kernel.
inline SolveResult solve_reformulation(const Model& model, const SolveOptions& opts = {}) {
    SolveResult res;
    res.solver = "reformulate";
    detail::describe(model, res);
    const auto t0 = detail::Clock::now();
    const detail::Prepared prep = detail::prepare(model, opts);
    const DeterministicModel det = reformulate(prep.model);
    res.stats.transform_ms = detail::ms_since(t0);

    const auto t1 = detail::Clock::now();
    const lp::LpSolution sol = detail::solve_deterministic(det, opts, res.stats);
    res.stats.solve_ms = detail::ms_since(t1);
    res.status = sol.status;
    if (!sol.x.empty() && (sol.status == Status::Optimal || sol.status == Status::IterLimit)) {
        res.objective = sol.objective;
        detail::fill_point(model, prep, sol.x, res);
        detail::finish(model, res);
    }
    return res;
}

/// Robust counterpart of `model` after lifting and decision-rule
/// substitution, as solved by solve_reformulation.
inline DeterministicModel build_counterpart(const Model& model, const SolveOptions& opts = {}) {
    return reformulate(detail::prepare(model, opts).model);
}

/// Scenario-based cutting planes: the master holds each robust row at a
/// growing list of parameter scenarios.
inline SolveResult solve_cutting_plane(const Model& model, const SolveOptions& opts = {}) {
    SolveResult res;
    res.solver = "cuts";
    detail::describe(model, res);
    const auto t0 = detail::Clock::now();
    const detail::Prepared prep = detail::prepare(model, opts);
    const Model& m = prep.model;
    const auto sets = detail::separable_sets(m);

    struct Generator {
        UncertainRow row;
        std::vector<Eigen::VectorXd> scenarios;
    };
    lp::StandardLp master;
    master.sense = m.sense();
    master.objective_offset = m.objective().constant();
    for (const auto& v : m.vars()) master.add_column(v.name, v.lower, v.upper, 0.0, v.domain != Domain::Continuous);
    for (const auto& [k, c] : m.objective().lin_x()) master.columns[k.value].cost = c;

    std::vector<double> reference(static_cast<std::size_t>(m.num_params()));
    for (std::size_t g = 0; g < m.groups().size(); ++g) {
        const auto& group = m.groups()[g];
        if (!sets[g]) continue;
        const Eigen::VectorXd ref = group.nominal ? Eigen::Map<const Eigen::VectorXd>(group.nominal->data(), group.size())
                                                        .eval()
                                                  : reference_point(*sets[g]);
        for (int i = 0; i < group.size(); ++i) reference[group.ids[i].value] = ref[i];
    }

    auto scenario_row = [&](const UncertainRow& row, const std::map<int, Eigen::VectorXd>& xi, const std::string& name) {
        LinearExpr e = row.f;
        for (const auto& [g, a] : row.a) {
            for (std::size_t j = 0; j < a.size(); ++j) {
                LinearExpr scaled = a[j];
                scaled *= xi.at(g)[static_cast<Eigen::Index>(j)];
                e += scaled;
            }
        }
        master.add_row(name, DeterministicModel::to_coefs(e), Sense::LessEqual, -e.constant);
    };

    std::vector<Generator> gens;
    for (const auto& c : m.constraints()) {
        if (!c.is_robust()) {
            std::vector<std::pair<int, double>> coefs;
            for (const auto& [k, v] : c.expr.lin_x()) coefs.emplace_back(static_cast<int>(k.value), v);
            master.add_row(c.name, std::move(coefs), c.sense, c.rhs - c.expr.constant());
            continue;
        }
        Generator gen{decompose(m, c), {}};
        std::map<int, Eigen::VectorXd> xi;
        for (const auto& [g, a] : gen.row.a) {
            if (!sets[g]) {
                throw Error(ErrorCode::SeparationUnavailable,
                            "set of group '" + m.groups()[g].name + "' has no separation oracle");
            }
            const auto& group = m.groups()[g];
            Eigen::VectorXd v(group.size());
            for (int i = 0; i < group.size(); ++i) v[i] = reference[group.ids[i].value];
            xi.emplace(g, std::move(v));
        }
        scenario_row(gen.row, xi, c.name + "[0]");
        gens.push_back(std::move(gen));
    }
    res.stats.transform_ms = detail::ms_since(t0);

    const auto t1 = detail::Clock::now();
    lp::LpSolution sol;
    double max_violation = 0.0;
    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
        sol = detail::solve_kernel(master, opts);
        ++res.stats.master_solves;
        ++res.stats.iterations;
        if (sol.status != Status::Optimal) break;
        res.stats.master_objectives.push_back(sol.objective);
        max_violation = 0.0;
        int added = 0;
        for (auto& gen : gens) {
            detail::NumericRow num;
            num.f = gen.row.f.evaluate(sol.x);
            for (const auto& [g, a] : gen.row.a) {
                Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
                for (std::size_t j = 0; j < a.size(); ++j) v[static_cast<Eigen::Index>(j)] = a[j].evaluate(sol.x);
                num.a.emplace(g, std::move(v));
            }
            std::map<int, Eigen::VectorXd> worst;
            double value = num.f;
            for (const auto& [g, a] : num.a) {
                const SupportResult s = support_function(*sets[g], a);
                ++res.stats.separation_solves;
                value += s.value;
                worst.emplace(g, s.argmax);
            }
            max_violation = std::max(max_violation, value);
            if (value > opts.cut_tol) {
                scenario_row(gen.row, worst, gen.row.name + "[" + std::to_string(gen.scenarios.size() + 1) + "]");
                gen.scenarios.push_back(worst.begin()->second);
                ++added;
            }
        }
        res.stats.cuts_added += added;
        spdlog::debug("cutting plane iteration {}: master objective {}, max violation {}, {} cuts", it, sol.objective,
                      max_violation, added);
        if (added == 0) {
            converged = true;
            break;
        }
    }
    res.stats.solve_ms = detail::ms_since(t1);

    res.status = sol.status;
    if (sol.status == Status::Optimal && !converged) res.status = Status::IterLimit;
    if (!sol.x.empty() && (res.status == Status::Optimal || res.status == Status::IterLimit)) {
        res.objective = sol.objective;
        detail::fill_point(model, prep, sol.x, res);
        detail::finish(model, res);
        res.max_violation = std::max(res.max_violation, max_violation);
    }
    return res;
}

/// Every uncertain parameter fixed at its nominal value; adjustable
/// variables become ordinary variables.
inline SolveResult solve_nominal(const Model& model, const SolveOptions& opts = {}) {
    SolveResult res;
    res.solver = "nominal";
    detail::describe(model, res);
    const auto t0 = detail::Clock::now();
    const DeterministicModel det = nominal_substitute(model);
    res.stats.transform_ms = detail::ms_since(t0);
    const auto t1 = detail::Clock::now();
    const lp::LpSolution sol = detail::solve_deterministic(det, opts, res.stats);
    res.stats.solve_ms = detail::ms_since(t1);
    res.status = sol.status;
    if (sol.status == Status::Optimal) {
        res.objective = sol.objective;
        const auto n = static_cast<std::ptrdiff_t>(model.vars().size());
        res.x.assign(sol.x.begin(), sol.x.begin() + n);
        for (std::size_t i = 0; i < model.adjvars().size(); ++i) res.rules.push_back({sol.x[n + i], {}});
        // robust worst case of the nominal decision, when it can be computed
        try {
            detail::finish(model, res);
        } catch (const Error&) {
            res.worst_case.clear();
        }
    }
    return res;
}

enum class SolverKind { Reformulate, Cuts, Nominal };

inline SolverKind parse_solver(const std::string& s) {
    if (s == "reformulate") return SolverKind::Reformulate;
    if (s == "cuts") return SolverKind::Cuts;
    if (s == "nominal") return SolverKind::Nominal;
    throw Error(ErrorCode::ValidationError, "unknown solver '" + s + "'");
}

inline SolveResult solve(const Model& model, SolverKind kind, const SolveOptions& opts = {}) {
    switch (kind) {
        case SolverKind::Reformulate: return solve_reformulation(model, opts);
        case SolverKind::Cuts: return solve_cutting_plane(model, opts);
        case SolverKind::Nominal: return solve_nominal(model, opts);
    }
    throw Error(ErrorCode::ValidationError, "unknown solver");
}

}  // namespace robustkit
