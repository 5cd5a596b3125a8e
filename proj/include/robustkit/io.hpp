#pragma once

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "robustkit/error.hpp"
#include "robustkit/expr.hpp"
#include "robustkit/model.hpp"
#include "robustkit/solvers.hpp"
#include "robustkit/transform.hpp"
#include "robustkit/uncset.hpp"

namespace robustkit::io {

using json = nlohmann::json;

inline constexpr const char* kFormatVersion = "1.0";

namespace detail {

// ---- writing ---------------------------------------------------------------

inline json bound(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json mat(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec(m.row(i).transpose()));
    return rows;
}

inline std::string sense_str(Sense s) {
    switch (s) {
        case Sense::LessEqual: return "<=";
        case Sense::GreaterEqual: return ">=";
        case Sense::Equal: return "==";
    }
    return "?";
}

inline std::string domain_str(Domain d) {
    switch (d) {
        case Domain::Continuous: return "continuous";
        case Domain::Binary: return "binary";
        case Domain::Integer: return "integer";
    }
    return "?";
}

inline json expr_json(const Expr& e) {
    json out = json::object();
    out["constant"] = e.constant();
    if (!e.lin_x().empty()) {
        json t = json::array();
        for (const auto& [k, c] : e.lin_x()) t.push_back({k.value, c});
        out["lin_x"] = std::move(t);
    }
    if (!e.lin_xi().empty()) {
        json t = json::array();
        for (const auto& [k, c] : e.lin_xi()) t.push_back({k.value, c});
        out["lin_xi"] = std::move(t);
    }
    if (!e.bilin().empty()) {
        json t = json::array();
        for (const auto& [k, c] : e.bilin()) t.push_back({k.first.value, k.second.value, c});
        out["bilin"] = std::move(t);
    }
    if (!e.lin_y().empty()) {
        json t = json::array();
        for (const auto& [k, c] : e.lin_y()) t.push_back({k.value, c});
        out["lin_y"] = std::move(t);
    }
    return out;
}

inline json set_json(const UncertaintySet& set) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PolyhedralSet>) {
                return {{"type", "polyhedral"}, {"P", mat(s.P())}, {"b", vec(s.b())}};
            } else if constexpr (std::is_same_v<T, EllipsoidalSet>) {
                return {{"type", "ellipsoidal"}, {"mean", vec(s.mean())}, {"cov", mat(s.cov())}};
            } else {
                json cons = json::array();
                for (const auto& c : s.constraints) {
                    json lin = json::array();
                    for (const auto& [i, v] : c.linear) lin.push_back({i, v});
                    json quad = json::array();
                    for (const auto& [ij, v] : c.quadratic) quad.push_back({ij.first, ij.second, v});
                    cons.push_back({{"constant", c.constant},
                                    {"linear", std::move(lin)},
                                    {"quadratic", std::move(quad)},
                                    {"sense", sense_str(c.sense)},
                                    {"rhs", c.rhs}});
                }
                return {{"type", "generic"}, {"dim", s.dim}, {"constraints", std::move(cons)}};
            }
        },
        set);
}

inline json linear_json(const LinearExpr& e) {
    json coefs = json::array();
    for (const auto& [j, c] : e.coefs) coefs.push_back({j, c});
    return {{"constant", e.constant}, {"coefs", std::move(coefs)}};
}

inline json prov_json(const Provenance& p) { return {{"source", p.source}, {"role", p.role}}; }

// ---- reading ---------------------------------------------------------------

[[noreturn]] inline void fail(const std::string& path, const std::string& reason,
                              ErrorCode code = ErrorCode::ParseError) {
    throw DocumentError(code, path.empty() ? "$" : path, reason);
}

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}
inline std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline const json& object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) fail(join(path, k), "unknown field");
    }
    return j;
}

inline const json& field(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) fail(join(path, key), "missing field");
    return j.at(key);
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline std::uint32_t id(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer id");
    return static_cast<std::uint32_t>(j.get<long long>());
}

inline std::string string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

/// Absent bounds take `missing`; null means infinite with the sign of `infinite`.
inline double bound_of(const json& j, const char* key, const std::string& path, double missing, double infinite) {
    if (!j.contains(key)) return missing;
    if (j.at(key).is_null()) return infinite;
    return number(j.at(key), join(path, key));
}

inline const json& array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < array(j, path).size(); ++i) out.push_back(number(j[i], index(path, i)));
    return out;
}

inline Eigen::VectorXd vector_of(const json& j, const std::string& path) {
    const auto v = numbers(j, path);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::MatrixXd matrix_of(const json& j, const std::string& path) {
    array(j, path);
    if (j.empty()) return {};
    const std::size_t cols = array(j[0], index(path, 0)).size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto row = numbers(j[i], index(path, i));
        if (row.size() != cols) fail(index(path, i), "ragged matrix row", ErrorCode::ValidationError);
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
    }
    return m;
}

inline Sense sense_of(const json& j, const std::string& path) {
    const std::string s = string(j, path);
    if (s == "<=") return Sense::LessEqual;
    if (s == ">=") return Sense::GreaterEqual;
    if (s == "==") return Sense::Equal;
    fail(path, "sense must be one of <=, >=, ==");
}

inline Domain domain_of(const json& j, const std::string& path) {
    const std::string s = string(j, path);
    if (s == "continuous") return Domain::Continuous;
    if (s == "binary") return Domain::Binary;
    if (s == "integer") return Domain::Integer;
    fail(path, "domain must be continuous, binary or integer");
}

/// Runs `f`, re-raising model errors as validation errors located at `path`.
template <class F>
auto validated(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const DocumentError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what(), ErrorCode::ValidationError);
    }
}

inline Expr expr_of(const json& j, const std::string& path) {
    object(j, path, {"constant", "lin_x", "lin_xi", "bilin", "lin_y"});
    Expr e(j.contains("constant") ? number(j.at("constant"), join(path, "constant")) : 0.0);
    auto pairs = [&](const char* key, auto&& add) {
        if (!j.contains(key)) return;
        const std::string p = join(path, key);
        const json& arr = array(j.at(key), p);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string pi = index(p, i);
            if (!arr[i].is_array() || arr[i].size() != 2) fail(pi, "expected [id, coefficient]");
            add(id(arr[i][0], index(pi, 0)), number(arr[i][1], index(pi, 1)));
        }
    };
    pairs("lin_x", [&](std::uint32_t k, double c) { e.add_x(VarId(k), c); });
    pairs("lin_xi", [&](std::uint32_t k, double c) { e.add_xi(UncParamId(k), c); });
    pairs("lin_y", [&](std::uint32_t k, double c) { e.add_y(AdjVarId(k), c); });
    if (j.contains("bilin")) {
        const std::string p = join(path, "bilin");
        const json& arr = array(j.at("bilin"), p);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string pi = index(p, i);
            if (!arr[i].is_array() || arr[i].size() != 3) fail(pi, "expected [var id, param id, coefficient]");
            e.add_bilin(VarId(id(arr[i][0], index(pi, 0))), UncParamId(id(arr[i][1], index(pi, 1))),
                        number(arr[i][2], index(pi, 2)));
        }
    }
    return e;
}

inline UncertaintySet set_of(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const std::string type = string(field(j, path, "type"), join(path, "type"));
    if (type == "polyhedral") {
        object(j, path, {"type", "P", "b"});
        Eigen::MatrixXd P = matrix_of(field(j, path, "P"), join(path, "P"));
        Eigen::VectorXd b = vector_of(field(j, path, "b"), join(path, "b"));
        return validated(path, [&]() -> UncertaintySet { return polyhedral(std::move(P), std::move(b)); });
    }
    if (type == "ellipsoidal") {
        object(j, path, {"type", "mean", "cov"});
        Eigen::VectorXd mean = vector_of(field(j, path, "mean"), join(path, "mean"));
        Eigen::MatrixXd cov = matrix_of(field(j, path, "cov"), join(path, "cov"));
        return validated(path, [&]() -> UncertaintySet { return ellipsoidal(std::move(mean), std::move(cov)); });
    }
    if (type == "gaussian_confidence") {
        object(j, path, {"type", "mean", "cov", "alpha"});
        Eigen::VectorXd mean = vector_of(field(j, path, "mean"), join(path, "mean"));
        Eigen::MatrixXd cov = matrix_of(field(j, path, "cov"), join(path, "cov"));
        const double alpha = number(field(j, path, "alpha"), join(path, "alpha"));
        return validated(path, [&]() -> UncertaintySet {
            return gaussian_confidence_set(std::move(mean), std::move(cov), alpha);
        });
    }
    if (type == "generic") {
        object(j, path, {"type", "dim", "constraints"});
        GenericSet set;
        const json& dim = field(j, path, "dim");
        set.dim = static_cast<int>(id(dim, join(path, "dim")));
        const std::string cp = join(path, "constraints");
        const json& cons = array(field(j, path, "constraints"), cp);
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const std::string ci = index(cp, i);
            const json& c = object(cons[i], ci, {"constant", "linear", "quadratic", "sense", "rhs"});
            GenericConstraint g;
            if (c.contains("constant")) g.constant = number(c.at("constant"), join(ci, "constant"));
            if (c.contains("linear")) {
                const json& lin = array(c.at("linear"), join(ci, "linear"));
                for (std::size_t t = 0; t < lin.size(); ++t) {
                    const std::string pt = index(join(ci, "linear"), t);
                    if (!lin[t].is_array() || lin[t].size() != 2) fail(pt, "expected [index, coefficient]");
                    g.add_linear(static_cast<int>(id(lin[t][0], pt)), number(lin[t][1], pt));
                }
            }
            if (c.contains("quadratic")) {
                const json& quad = array(c.at("quadratic"), join(ci, "quadratic"));
                for (std::size_t t = 0; t < quad.size(); ++t) {
                    const std::string pt = index(join(ci, "quadratic"), t);
                    if (!quad[t].is_array() || quad[t].size() != 3) fail(pt, "expected [i, j, coefficient]");
                    g.add_quadratic(static_cast<int>(id(quad[t][0], pt)), static_cast<int>(id(quad[t][1], pt)),
                                    number(quad[t][2], pt));
                }
            }
            g.sense = sense_of(field(c, ci, "sense"), join(ci, "sense"));
            g.rhs = number(field(c, ci, "rhs"), join(ci, "rhs"));
            for (const auto& [k, v] : g.linear) {
                if (k >= set.dim) fail(join(ci, "linear"), "index outside the group", ErrorCode::ValidationError);
            }
            for (const auto& [k, v] : g.quadratic) {
                if (k.second >= set.dim) fail(join(ci, "quadratic"), "index outside the group", ErrorCode::ValidationError);
            }
            set.constraints.push_back(std::move(g));
        }
        return set;
    }
    fail(join(path, "type"), "unknown set type '" + type + "'");
}

}  // namespace detail

// ---- model documents -------------------------------------------------------

inline json model_to_json(const Model& m) {
    using namespace detail;
    json doc;
    doc["format_version"] = kFormatVersion;
    doc["sense"] = m.sense() == ObjSense::Minimize ? "min" : "max";
    json vars = json::array();
    for (const auto& v : m.vars()) {
        vars.push_back({{"name", v.name}, {"domain", domain_str(v.domain)}, {"lower", bound(v.lower)}, {"upper", bound(v.upper)}});
    }
    doc["variables"] = std::move(vars);
    json groups = json::array();
    for (const auto& g : m.groups()) {
        json jg = {{"name", g.name}, {"size", g.size()}};
        if (g.nominal) jg["nominal"] = *g.nominal;
        jg["uncset"] = set_json(g.uncset);
        groups.push_back(std::move(jg));
    }
    doc["unc_groups"] = std::move(groups);
    json adj = json::array();
    for (const auto& a : m.adjvars()) {
        json deps = json::array();
        for (const auto& d : a.deps) deps.push_back(d.value);
        adj.push_back({{"name", a.name}, {"deps", std::move(deps)}, {"lower", bound(a.lower)}, {"upper", bound(a.upper)}});
    }
    doc["adjustables"] = std::move(adj);
    json cons = json::array();
    for (const auto& c : m.constraints()) {
        cons.push_back({{"name", c.name}, {"expr", expr_json(c.expr)}, {"sense", sense_str(c.sense)}, {"rhs", c.rhs}});
    }
    doc["constraints"] = std::move(cons);
    doc["objective"] = expr_json(m.objective());
    return doc;
}

inline std::string serialize_model(const Model& m) { return model_to_json(m).dump(2) + "\n"; }

inline Model model_from_json(const json& doc) {
    using namespace detail;
    object(doc, "", {"format_version", "sense", "variables", "unc_groups", "adjustables", "constraints", "objective"});
    const std::string version = string(field(doc, "", "format_version"), "format_version");
    if (version != kFormatVersion) fail("format_version", "unsupported version '" + version + "'");

    Model m;
    if (doc.contains("variables")) {
        const json& vars = array(doc.at("variables"), "variables");
        for (std::size_t i = 0; i < vars.size(); ++i) {
            const std::string p = index("variables", i);
            const json& v = object(vars[i], p, {"name", "domain", "lower", "upper"});
            const std::string name = string(field(v, p, "name"), join(p, "name"));
            const Domain dom = v.contains("domain") ? domain_of(v.at("domain"), join(p, "domain")) : Domain::Continuous;
            const double lo = bound_of(v, "lower", p, 0.0, -kInf);
            const double hi = bound_of(v, "upper", p, kInf, kInf);
            validated(p, [&] { return m.add_var(name, dom, lo, hi); });
        }
    }
    if (doc.contains("unc_groups")) {
        const json& groups = array(doc.at("unc_groups"), "unc_groups");
        for (std::size_t i = 0; i < groups.size(); ++i) {
            const std::string p = index("unc_groups", i);
            const json& g = object(groups[i], p, {"name", "size", "nominal", "uncset"});
            const std::string name = string(field(g, p, "name"), join(p, "name"));
            const int size = static_cast<int>(id(field(g, p, "size"), join(p, "size")));
            std::optional<std::vector<double>> nominal;
            if (g.contains("nominal") && !g.at("nominal").is_null()) nominal = numbers(g.at("nominal"), join(p, "nominal"));
            UncertaintySet set = set_of(field(g, p, "uncset"), join(p, "uncset"));
            std::string where = p;
            if (nominal && static_cast<int>(nominal->size()) != size) {
                where = join(p, "nominal");
            } else if (dimension(set) != size) {
                where = join(p, "uncset");
            } else if (nominal) {
                where = join(p, "nominal");
            }
            validated(where, [&] { return m.add_unc_params(name, size, nominal, std::move(set)); });
        }
    }
    if (doc.contains("adjustables")) {
        const json& adj = array(doc.at("adjustables"), "adjustables");
        for (std::size_t i = 0; i < adj.size(); ++i) {
            const std::string p = index("adjustables", i);
            const json& a = object(adj[i], p, {"name", "deps", "lower", "upper"});
            const std::string name = string(field(a, p, "name"), join(p, "name"));
            std::vector<UncParamId> deps;
            const json& jd = array(field(a, p, "deps"), join(p, "deps"));
            for (std::size_t k = 0; k < jd.size(); ++k) deps.emplace_back(id(jd[k], index(join(p, "deps"), k)));
            const double lo = bound_of(a, "lower", p, -kInf, -kInf);
            const double hi = bound_of(a, "upper", p, kInf, kInf);
            validated(join(p, "deps"), [&] { return m.add_adjustable(name, deps, lo, hi); });
        }
    }
    if (doc.contains("constraints")) {
        const json& cons = array(doc.at("constraints"), "constraints");
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const std::string p = index("constraints", i);
            const json& c = object(cons[i], p, {"name", "expr", "sense", "rhs"});
            const std::string name = c.contains("name") ? string(c.at("name"), join(p, "name")) : std::string();
            Expr e = expr_of(field(c, p, "expr"), join(p, "expr"));
            const Sense s = sense_of(field(c, p, "sense"), join(p, "sense"));
            const double rhs = number(field(c, p, "rhs"), join(p, "rhs"));
            validated(p, [&] { return m.add_constraint(std::move(e), s, rhs, name); });
        }
    }
    const std::string sense = string(field(doc, "", "sense"), "sense");
    if (sense != "min" && sense != "max") fail("sense", "sense must be min or max");
    Expr obj = doc.contains("objective") ? expr_of(doc.at("objective"), "objective") : Expr();
    validated("objective", [&] {
        m.set_objective(std::move(obj), sense == "min" ? ObjSense::Minimize : ObjSense::Maximize);
        return 0;
    });
    return m;
}

inline Model parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        detail::fail("$", e.what());
    }
    return model_from_json(doc);
}

// ---- deterministic counterparts ---------------------------------------------

inline json counterpart_to_json(const DeterministicModel& det) {
    using namespace detail;
    json doc;
    doc["format_version"] = kFormatVersion;
    doc["kind"] = "deterministic";
    doc["sense"] = det.sense == ObjSense::Minimize ? "min" : "max";
    json vars = json::array();
    for (const auto& v : det.vars) {
        vars.push_back({{"name", v.name},
                        {"domain", domain_str(v.domain)},
                        {"lower", bound(v.lower)},
                        {"upper", bound(v.upper)},
                        {"provenance", prov_json(v.provenance)}});
    }
    doc["variables"] = std::move(vars);
    json rows = json::array();
    for (const auto& r : det.rows) {
        rows.push_back({{"name", r.name},
                        {"expr", linear_json(r.expr)},
                        {"sense", sense_str(r.sense)},
                        {"rhs", r.rhs},
                        {"provenance", prov_json(r.provenance)}});
    }
    doc["rows"] = std::move(rows);
    json conic = json::array();
    for (const auto& r : det.conic_rows) {
        json terms = json::array();
        for (const auto& t : r.terms) {
            json dir = json::array();
            for (const auto& a : t.direction) dir.push_back(linear_json(a));
            terms.push_back({{"group", t.group}, {"mean", vec(t.mean)}, {"cov", mat(t.cov)}, {"direction", std::move(dir)}});
        }
        conic.push_back({{"name", r.name},
                         {"linear", linear_json(r.linear)},
                         {"terms", std::move(terms)},
                         {"provenance", prov_json(r.provenance)}});
    }
    doc["conic_rows"] = std::move(conic);
    doc["objective"] = linear_json(det.objective);
    return doc;
}

inline std::string export_counterpart(const DeterministicModel& det) { return counterpart_to_json(det).dump(2) + "\n"; }

// ---- results -----------------------------------------------------------------

enum class ResultFormat { Json, Table };

inline json result_to_json(const SolveResult& r) {
    json doc;
    doc["solver"] = r.solver;
    doc["status"] = lp::to_string(r.status);
    doc["objective"] = std::isfinite(r.objective) ? json(r.objective) : json(nullptr);
    json x = json::object();
    for (std::size_t i = 0; i < r.x.size(); ++i) x[i < r.var_names.size() ? r.var_names[i] : std::to_string(i)] = r.x[i];
    doc["x"] = std::move(x);
    json ldr = json::object();
    for (std::size_t i = 0; i < r.rules.size(); ++i) {
        json slopes = json::array();
        for (const auto& [id, s] : r.rules[i].slopes) slopes.push_back({id.value, s});
        ldr[i < r.adj_names.size() ? r.adj_names[i] : std::to_string(i)] = {{"intercept", r.rules[i].intercept},
                                                                            {"slopes", std::move(slopes)}};
    }
    doc["ldr"] = std::move(ldr);
    json wc = json::array();
    for (const auto& c : r.worst_case) wc.push_back({{"name", c.name}, {"value", c.value}, {"worst_case", c.worst_case}});
    doc["worst_case"] = std::move(wc);
    doc["max_violation"] = r.max_violation;
    doc["stats"] = {{"cuts_added", r.stats.cuts_added},
                    {"iterations", r.stats.iterations},
                    {"master_solves", r.stats.master_solves},
                    {"separation_solves", r.stats.separation_solves},
                    {"transform_ms", r.stats.transform_ms},
                    {"solve_ms", r.stats.solve_ms}};
    return doc;
}

inline std::string emit_result(const SolveResult& r, ResultFormat format = ResultFormat::Json) {
    if (format == ResultFormat::Json) return result_to_json(r).dump(2) + "\n";
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-12s %22s %10s %10s %14s\n", "solver", "status", "objective", "iterations",
                  "cuts", "max_violation");
    out << line;
    std::snprintf(line, sizeof line, "%-12s %-12s %22.12g %10d %10d %14.3e\n", r.solver.c_str(),
                  std::string(lp::to_string(r.status)).c_str(), r.objective, r.stats.iterations, r.stats.cuts_added, r.max_violation);
    out << line;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        std::snprintf(line, sizeof line, "  %-30s %22.12g\n", (i < r.var_names.size() ? r.var_names[i] : std::to_string(i)).c_str(),
                      r.x[i]);
        out << line;
    }
    return out.str();
}

/// Candidate point for check_robust_feasibility. Accepts `x` as an array in
/// VarId order or as an object keyed by variable name, and `ldr` keyed by
/// adjustable name; a solve result document is therefore a valid point.
inline RobustPoint point_from_json(const json& doc, const Model& model) {
    using namespace detail;
    if (!doc.is_object()) fail("$", "expected an object");
    RobustPoint p;
    const json& x = field(doc, "", "x");
    if (x.is_array()) {
        p.x = numbers(x, "x");
    } else if (x.is_object()) {
        for (const auto& v : model.vars()) {
            if (!x.contains(v.name)) fail(join("x", v.name), "missing value", ErrorCode::ValidationError);
            p.x.push_back(number(x.at(v.name), join("x", v.name)));
        }
    } else {
        fail("x", "expected an array or an object");
    }
    if (p.x.size() != model.vars().size()) fail("x", "wrong number of values", ErrorCode::ValidationError);
    for (const auto& a : model.adjvars()) {
        const std::string path = join("ldr", a.name);
        if (!doc.contains("ldr") || !doc.at("ldr").contains(a.name)) fail(path, "missing decision rule", ErrorCode::ValidationError);
        const json& r = object(doc.at("ldr").at(a.name), path, {"intercept", "slopes"});
        LdrRule rule{number(field(r, path, "intercept"), join(path, "intercept")), {}};
        if (r.contains("slopes")) {
            const json& s = array(r.at("slopes"), join(path, "slopes"));
            for (std::size_t i = 0; i < s.size(); ++i) {
                const std::string pi = index(join(path, "slopes"), i);
                if (!s[i].is_array() || s[i].size() != 2) fail(pi, "expected [param id, slope]");
                const std::uint32_t k = id(s[i][0], pi);
                if (k >= static_cast<std::uint32_t>(model.num_params())) fail(pi, "unknown parameter", ErrorCode::ValidationError);
                rule.slopes.emplace_back(UncParamId(k), number(s[i][1], pi));
            }
        }
        p.rules.push_back(std::move(rule));
    }
    return p;
}

inline json feasibility_to_json(const FeasibilityReport& rep) {
    json cons = json::array();
    for (const auto& c : rep.constraints) cons.push_back({{"name", c.name}, {"value", c.value}, {"worst_case", c.worst_case}});
    return {{"feasible", rep.feasible}, {"max_violation", rep.max_violation}, {"constraints", std::move(cons)}};
}

}  // namespace robustkit::io
