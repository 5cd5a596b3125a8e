#pragma once

#include <algorithm>
#include <cmath>

#include "robustkit/lp/standard_lp.hpp"

namespace robustkit::lp {

struct VerificationReport {
    double max_primal_violation = 0.0;
    // wrong-signed row duals and reduced costs pointing out of the bounds
    double max_dual_violation = 0.0;
    // |dual * slack| over rows plus |reduced cost * distance to bound| over columns
    double max_complementarity_violation = 0.0;
    // |c'x + offset - reported objective|
    double objective_mismatch = 0.0;
    double dual_objective = 0.0;
    double duality_gap = 0.0;
};

/// Recomputes row activities and reduced costs for a claimed optimum.
inline VerificationReport verify_solution(const StandardLp& lp, const LpSolution& sol) {
    VerificationReport rep;
    const double sign = lp.sense == ObjSense::Minimize ? 1.0 : -1.0;
    const int n = lp.num_columns();
    const int m = lp.num_rows();
    const bool has_duals = static_cast<int>(sol.duals.size()) == m;

    std::vector<double> reduced(n);
    for (int j = 0; j < n; ++j) reduced[j] = lp.columns[j].cost;

    double dual_obj = lp.objective_offset;
    for (int i = 0; i < m; ++i) {
        const Row& row = lp.rows[i];
        const double act = lp.row_activity(i, sol.x);
        double viol = 0.0;
        if (row.sense != RowSense::GreaterEqual) viol = std::max(viol, act - row.rhs);
        if (row.sense != RowSense::LessEqual) viol = std::max(viol, row.rhs - act);
        rep.max_primal_violation = std::max(rep.max_primal_violation, viol);
        if (!has_duals) continue;

        // min-form dual: <= rows need y <= 0, >= rows need y >= 0
        const double y = sign * sol.duals[i];
        double dviol = 0.0;
        if (row.sense == RowSense::LessEqual) dviol = std::max(0.0, y);
        if (row.sense == RowSense::GreaterEqual) dviol = std::max(0.0, -y);
        rep.max_dual_violation = std::max(rep.max_dual_violation, dviol);
        rep.max_complementarity_violation =
            std::max(rep.max_complementarity_violation, std::abs(y * (act - row.rhs)));
        for (const auto& [j, a] : row.coefs) reduced[j] -= sol.duals[i] * a;
        dual_obj += sol.duals[i] * row.rhs;
    }

    constexpr double kZero = 1e-9;
    for (int j = 0; j < n; ++j) {
        const Column& col = lp.columns[j];
        const double x = sol.x[j];
        rep.max_primal_violation = std::max({rep.max_primal_violation, col.lower - x, x - col.upper});
        if (!has_duals) continue;
        const double d = sign * reduced[j];
        const double to_lower = x - col.lower;
        const double to_upper = col.upper - x;
        double dviol = 0.0;
        if (d > kZero) {
            dviol = std::isfinite(col.lower) ? 0.0 : d;
            rep.max_complementarity_violation =
                std::max(rep.max_complementarity_violation, d * std::max(0.0, to_lower));
        } else if (d < -kZero) {
            dviol = std::isfinite(col.upper) ? 0.0 : -d;
            rep.max_complementarity_violation =
                std::max(rep.max_complementarity_violation, -d * std::max(0.0, to_upper));
        }
        rep.max_dual_violation = std::max(rep.max_dual_violation, dviol);
        if (std::abs(d) > kZero) dual_obj += reduced[j] * (d > 0 ? col.lower : col.upper);
    }

    rep.objective_mismatch = std::abs(lp.objective_value(sol.x) - sol.objective);
    rep.dual_objective = dual_obj;
    rep.duality_gap = std::abs(dual_obj - sol.objective);
    return rep;
}

}  // namespace robustkit::lp
