#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace robustkit::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ObjSense { Minimize, Maximize };
enum class RowSense { LessEqual, GreaterEqual, Equal };
enum class Status { Optimal, Infeasible, Unbounded, IterLimit, NodeLimit };

inline std::string_view to_string(Status status) {
    switch (status) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterLimit: return "iter_limit";
        case Status::NodeLimit: return "node_limit";
    }
    return "unknown";
}

struct Column {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    double cost = 0.0;
    bool integer = false;
};

/// Sparse row `sum(coef * x) <sense> rhs`. Duplicate column entries are summed.
struct Row {
    std::string name;
    std::vector<std::pair<int, double>> coefs;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
};

struct StandardLp {
    ObjSense sense = ObjSense::Minimize;
    double objective_offset = 0.0;
    std::vector<Column> columns;
    std::vector<Row> rows;

    int add_column(std::string name, double lower, double upper, double cost = 0.0,
                   bool integer = false) {
        columns.push_back({std::move(name), lower, upper, cost, integer});
        return static_cast<int>(columns.size()) - 1;
    }

    int add_row(std::string name, std::vector<std::pair<int, double>> coefs, RowSense row_sense,
                double rhs) {
        rows.push_back({std::move(name), std::move(coefs), row_sense, rhs});
        return static_cast<int>(rows.size()) - 1;
    }

    int num_columns() const { return static_cast<int>(columns.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }

    std::vector<int> integer_columns() const {
        std::vector<int> out;
        for (int j = 0; j < num_columns(); ++j) {
            if (columns[j].integer) out.push_back(j);
        }
        return out;
    }

    double row_activity(int i, std::span<const double> x) const {
        double sum = 0.0;
        for (const auto& [j, a] : rows[i].coefs) sum += a * x[j];
        return sum;
    }

    double objective_value(std::span<const double> x) const {
        double sum = objective_offset;
        for (int j = 0; j < num_columns(); ++j) sum += columns[j].cost * x[j];
        return sum;
    }
};

enum class Factorization {
    Auto,
    // dense inverse of the full basis
    Dense,
    // factor of the basic structural block only, suited to tall problems
    Reduced,
};

struct LpOptions {
    int max_iters = 50000;
    double feas_tol = 1e-7;
    double opt_tol = 1e-7;
    int refactor_every = 50;
    // consecutive degenerate pivots before switching to Bland's rule
    int stall_limit = 30;
    double mip_gap = 1e-6;
    double int_tol = 1e-6;
    long max_nodes = 200000;
    bool record_pivots = false;
    Factorization factorization = Factorization::Auto;
};

/// Duals and reduced costs are reported in the sense of the original
/// objective: objective = sum(duals * row activity) + sum(reduced_costs * x).
struct LpSolution {
    Status status = Status::Infeasible;
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x;
    std::vector<double> duals;
    std::vector<double> reduced_costs;
    long iterations = 0;
    long nodes = 0;
    // (entering, leaving) variable indices; leaving is -1 for a bound flip
    std::vector<std::pair<int, int>> pivots;
};

}  // namespace robustkit::lp
