#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "robustkit/robustkit.hpp"

namespace {

namespace rk = robustkit;

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kInfeasible = 2,
    kUnbounded = 3,
    kIterLimit = 4,
    kUsage = 64,
    kDataError = 65,
};

int exit_code(rk::Status s) {
    switch (s) {
        case rk::Status::Optimal: return kOk;
        case rk::Status::Infeasible: return kInfeasible;
        case rk::Status::Unbounded: return kUnbounded;
        case rk::Status::IterLimit:
        case rk::Status::NodeLimit: return kIterLimit;
    }
    return kFailure;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rk::DocumentError(rk::ErrorCode::ParseError, path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rk::Error(rk::ErrorCode::ValidationError, "cannot write '" + path + "'");
    out << text;
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("robustkit");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("ROBUSTKIT_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

std::vector<double> parse_alphas(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size() || v < 0.0) throw CLI::ValidationError("--alphas", "bad value '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Robust linear and mixed-integer optimization"};
    app.require_subcommand(1);

    rk::SolveOptions opts;
    std::string model_path, out_path, counterpart_path, format = "json", solver = "reformulate";
    auto* solve = app.add_subcommand("solve", "Solve a model document");
    solve->add_option("model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    solve->add_option("--solver", solver, "reformulate | cuts | nominal")
        ->capture_default_str()
        ->check(CLI::IsMember({"reformulate", "cuts", "nominal"}));
    solve->add_option("--cut-tol", opts.cut_tol, "Separation tolerance")
        ->capture_default_str()->check(CLI::PositiveNumber);
    solve->add_option("--max-iter", opts.max_iter, "Cutting-plane / outer-approximation rounds")
        ->capture_default_str()->check(CLI::PositiveNumber);
    solve->add_option("--conic-tol", opts.conic_tol, "Conic row tolerance")
        ->capture_default_str()->check(CLI::PositiveNumber);
    solve->add_option("--mip-gap", opts.mip_gap, "Absolute MIP gap")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    solve->add_option("--out", out_path, "Result file (default stdout)");
    solve->add_option("--export-counterpart", counterpart_path, "Write the deterministic counterpart JSON");
    solve->add_option("--format", format, "json | table")
        ->capture_default_str()->check(CLI::IsMember({"json", "table"}));

    std::string case_name, alphas_text, geometry = "both", sweep_out;
    std::uint64_t seed = 1;
    int jobs = 1, n = 4, m = 2;
    double budget = 0.0;
    auto* sweep = app.add_subcommand("sweep", "Conservatism sweep over uncertainty set sizes");
    sweep->add_option("case", case_name, "portfolio | knapsack | facility")
        ->required()
        ->check(CLI::IsMember({"portfolio", "knapsack", "facility"}));
    sweep->add_option("--alphas", alphas_text, "Comma-separated set scales (default: 30 points on [0,1])");
    sweep->add_option("--geometry", geometry, "poly | ellip | both")
        ->capture_default_str()->check(CLI::IsMember({"poly", "ellip", "both"}));
    sweep->add_option("--seed", seed, "Instance seed")->capture_default_str();
    sweep->add_option("--out", sweep_out, "CSV file (default stdout)");
    sweep->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--solver", solver, "reformulate | cuts | nominal")
        ->capture_default_str()
        ->check(CLI::IsMember({"reformulate", "cuts", "nominal"}));
    sweep->add_option("--n", n, "Assets, items or customers")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--m", m, "Facilities")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--max-iter", opts.max_iter, "Cutting-plane / outer-approximation rounds")
        ->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--budget", budget, "Budget of scaled deviations (default max(1, n/2); negative: box only)");

    std::string point_path;
    double tol = 1e-6;
    auto* check = app.add_subcommand("check", "Robust feasibility report for a candidate point");
    check->add_option("model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
    check->add_option("--point", point_path, "Point JSON (x and decision rules)")->required()->check(CLI::ExistingFile);
    check->add_option("--tol", tol, "Feasibility tolerance")->capture_default_str()->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*solve) {
            const rk::Model model = rk::io::parse_model(read_file(model_path));
            const auto kind = rk::parse_solver(solver);
            if (!counterpart_path.empty()) {
                const rk::DeterministicModel det =
                    kind == rk::SolverKind::Nominal ? rk::nominal_substitute(model) : rk::build_counterpart(model, opts);
                write_output(counterpart_path, rk::io::export_counterpart(det));
            }
            const rk::SolveResult res = rk::solve(model, kind, opts);
            write_output(out_path, rk::io::emit_result(res, format == "json" ? rk::io::ResultFormat::Json
                                                                             : rk::io::ResultFormat::Table));
            return exit_code(res.status);
        }
        if (*sweep) {
            rk::cases::SweepSpec spec;
            spec.kind = rk::cases::parse_case(case_name);
            spec.n = n;
            spec.m = m;
            spec.seed = seed;
            spec.jobs = jobs;
            spec.solver = rk::parse_solver(solver);
            spec.options = opts;
            if (!alphas_text.empty()) spec.alphas = parse_alphas(alphas_text);
            if (geometry != "both") spec.geometries = {rk::cases::parse_geometry(geometry)};
            if (sweep->count("--budget")) spec.budget = budget;
            const auto rows = rk::cases::run_sweep(spec);
            write_output(sweep_out, rk::cases::sweep_csv(rows));
            std::cerr << "median transform time " << rk::cases::median_transform_ms(rows) << " ms over " << rows.size()
                      << " instances\n";
            return kOk;
        }
        if (*check) {
            const rk::Model model = rk::io::parse_model(read_file(model_path));
            const auto point = rk::io::point_from_json(rk::io::json::parse(read_file(point_path)), model);
            const rk::FeasibilityReport rep = rk::check_robust_feasibility(model, point, tol);
            std::cout << rk::io::feasibility_to_json(rep).dump(2) << "\n";
            return rep.feasible ? kOk : kInfeasible;
        }
    } catch (const rk::DocumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const rk::io::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const rk::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
