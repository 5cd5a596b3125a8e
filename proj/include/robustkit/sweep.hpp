#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "robustkit/cases.hpp"
#include "robustkit/error.hpp"
#include "robustkit/solvers.hpp"

namespace robustkit::cases {

struct SweepSpec {
    CaseKind kind = CaseKind::Knapsack;
    int n = 4;
    int m = 2;
    std::uint64_t seed = 1;
    std::vector<double> alphas = alpha_grid(30);
    std::vector<SetGeometry> geometries{SetGeometry::Polyhedral, SetGeometry::Ellipsoidal};
    std::optional<double> budget;
    SolverKind solver = SolverKind::Reformulate;
    SolveOptions options;
    int jobs = 1;
};

struct SweepRow {
    std::string case_name;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::string geometry;
    std::string solver;
    std::string status;
    double objective = std::numeric_limits<double>::quiet_NaN();
    // robust objective / nominal objective
    double normalized = std::numeric_limits<double>::quiet_NaN();
    int cuts_added = 0;
    int iterations = 0;
    double transform_ms = 0.0;
    double solve_ms = 0.0;
};

inline std::string solver_name(SolverKind k) {
    switch (k) {
        case SolverKind::Reformulate: return "reformulate";
        case SolverKind::Cuts: return "cuts";
        case SolverKind::Nominal: return "nominal";
    }
    return "?";
}

inline SweepRow run_instance(const SweepSpec& spec, SetGeometry geometry, double alpha) {
    CaseSpec cs{spec.kind, spec.n, spec.m, geometry, alpha, spec.seed, spec.budget};
    SweepRow row{to_string(spec.kind), spec.seed, alpha, to_string(geometry), solver_name(spec.solver), "error"};
    try {
        const Model model = generate(cs);
        const SolveResult robust = solve(model, spec.solver, spec.options);
        row.status = std::string(lp::to_string(robust.status));
        row.objective = robust.objective;
        row.cuts_added = robust.stats.cuts_added;
        row.iterations = robust.stats.iterations;
        row.transform_ms = robust.stats.transform_ms;
        row.solve_ms = robust.stats.solve_ms;
        const SolveResult nominal = solve_nominal(model, spec.options);
        if (nominal.status == Status::Optimal && robust.status == Status::Optimal) {
            row.normalized = robust.objective / nominal.objective;
        }
    } catch (const Error& e) {
        row.status = "error: " + std::string(to_string(e.code()));
    }
    return row;
}

/// One row per (geometry, alpha), geometry-major in the order given.
/// Instances run on `spec.jobs` worker threads; row order does not depend
/// on the number of workers.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    struct Task {
        SetGeometry geometry;
        double alpha;
    };
    std::vector<Task> tasks;
    for (const auto g : spec.geometries) {
        for (const double a : spec.alphas) tasks.push_back({g, a});
    }
    std::vector<SweepRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) rows[i] = run_instance(spec, tasks[i].geometry, tasks[i].alpha);
    };
    const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "case,seed,alpha,geometry,solver,status,objective,normalized,cuts_added,iterations,transform_ms,solve_ms\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        out << r.case_name << ',' << r.seed << ',' << num(r.alpha) << ',' << r.geometry << ',' << r.solver << ','
            << r.status << ',' << num(r.objective) << ',' << num(r.normalized) << ',' << r.cuts_added << ','
            << r.iterations << ',' << num(r.transform_ms) << ',' << num(r.solve_ms) << '\n';
    }
    return out.str();
}

/// Median transform time over rows, in milliseconds.
inline double median_transform_ms(const std::vector<SweepRow>& rows) {
    std::vector<double> t;
    for (const auto& r : rows) t.push_back(r.transform_ms);
    if (t.empty()) return 0.0;
    std::sort(t.begin(), t.end());
    const std::size_t k = t.size() / 2;
    return t.size() % 2 ? t[k] : 0.5 * (t[k - 1] + t[k]);
}

}  // namespace robustkit::cases
