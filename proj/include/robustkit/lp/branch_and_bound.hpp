#pragma once

#include <cmath>
#include <queue>
#include <span>
#include <vector>

#include "robustkit/lp/simplex.hpp"
#include "robustkit/lp/standard_lp.hpp"

namespace robustkit::lp {

namespace detail {

struct BbNode {
    long id = 0;
    // objective bound in minimization form
    double bound = 0.0;
    std::vector<double> lower;
    std::vector<double> upper;
    LpSolution relaxation;
};

struct BbNodeOrder {
    bool operator()(const BbNode& a, const BbNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

// Most fractional integer column; ties go to the lowest column index.
inline int most_fractional(std::span<const double> x, std::span<const int> integer_columns,
                           double int_tol) {
    int best = -1;
    double best_frac = int_tol;
    for (int j : integer_columns) {
        const double frac = std::abs(x[j] - std::round(x[j]));
        if (frac > best_frac || (best >= 0 && frac == best_frac && j < best)) {
            best_frac = frac;
            best = j;
        }
    }
    return best;
}

}  // namespace detail

/// Best-bound branch and bound over the simplex relaxation.
///
/// Nodes are ordered by relaxation bound (ties by creation order) and
/// branched on the most fractional integer column. A node is pruned when its
/// bound is within options.mip_gap (absolute) of the incumbent. Integer
/// columns of the returned incumbent are rounded to exact integers and the
/// objective recomputed from the rounded point.
inline LpSolution solve_milp(const StandardLp& lp, std::span<const int> integer_columns,
                             const LpOptions& options = {}) {
    const double sign = lp.sense == ObjSense::Minimize ? 1.0 : -1.0;
    StandardLp work = lp;
    long next_id = 0;
    long iterations = 0;
    long nodes = 0;

    auto solve_node = [&](std::vector<double> lower, std::vector<double> upper) {
        for (int j = 0; j < work.num_columns(); ++j) {
            work.columns[j].lower = lower[j];
            work.columns[j].upper = upper[j];
        }
        detail::BbNode node;
        node.id = next_id++;
        node.relaxation = solve_lp(work, options);
        iterations += node.relaxation.iterations;
        ++nodes;
        node.bound = sign * node.relaxation.objective;
        node.lower = std::move(lower);
        node.upper = std::move(upper);
        return node;
    };

    std::vector<double> root_lower, root_upper;
    for (const auto& col : lp.columns) {
        root_lower.push_back(col.lower);
        root_upper.push_back(col.upper);
    }
    for (int j : integer_columns) {
        root_lower[j] = std::ceil(root_lower[j] - options.int_tol);
        root_upper[j] = std::floor(root_upper[j] + options.int_tol);
    }

    LpSolution result;
    detail::BbNode root = solve_node(root_lower, root_upper);
    if (root.relaxation.status != Status::Optimal) {
        result = root.relaxation;
        result.nodes = nodes;
        return result;
    }

    std::priority_queue<detail::BbNode, std::vector<detail::BbNode>, detail::BbNodeOrder> open;
    open.push(std::move(root));

    bool have_incumbent = false;
    double incumbent_bound = kInf;
    bool hit_iter_limit = false;

    while (!open.empty()) {
        if (have_incumbent && open.top().bound >= incumbent_bound - options.mip_gap) break;
        if (nodes >= options.max_nodes) {
            result.status = Status::NodeLimit;
            result.nodes = nodes;
            result.iterations = iterations;
            return result;
        }
        detail::BbNode node = open.top();
        open.pop();

        const int branch = detail::most_fractional(node.relaxation.x, integer_columns, options.int_tol);
        if (branch < 0) {
            LpSolution candidate = node.relaxation;
            for (int j : integer_columns) candidate.x[j] = std::round(candidate.x[j]) + 0.0;
            candidate.objective = lp.objective_value(candidate.x);
            const double cand_bound = sign * candidate.objective;
            if (!have_incumbent || cand_bound < incumbent_bound) {
                have_incumbent = true;
                incumbent_bound = cand_bound;
                result = std::move(candidate);
            }
            continue;
        }

        const double v = node.relaxation.x[branch];
        std::vector<double> down_upper = node.upper;
        down_upper[branch] = std::floor(v);
        std::vector<double> up_lower = node.lower;
        up_lower[branch] = std::ceil(v);

        detail::BbNode children[2] = {solve_node(node.lower, std::move(down_upper)),
                                      solve_node(std::move(up_lower), node.upper)};
        for (auto& child : children) {
            if (child.relaxation.status == Status::IterLimit) hit_iter_limit = true;
            if (child.relaxation.status != Status::Optimal) continue;
            if (have_incumbent && child.bound >= incumbent_bound - options.mip_gap) continue;
            open.push(std::move(child));
        }
    }

    if (!have_incumbent) {
        result = LpSolution{};
        result.status = hit_iter_limit ? Status::IterLimit : Status::Infeasible;
    } else {
        result.status = Status::Optimal;
    }
    result.nodes = nodes;
    result.iterations = iterations;
    return result;
}

inline LpSolution solve_milp(const StandardLp& lp, const LpOptions& options = {}) {
    const std::vector<int> integer_columns = lp.integer_columns();
    return solve_milp(lp, integer_columns, options);
}

}  // namespace robustkit::lp
