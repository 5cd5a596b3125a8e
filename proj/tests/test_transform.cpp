#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "robust_oracle.hpp"
#include "robustkit/cases.hpp"
#include "robustkit/solvers.hpp"
#include "robustkit/transform.hpp"

using namespace robustkit;

namespace {

PolyhedralSet diamond() {
    Eigen::MatrixXd P(4, 2);
    P << 1, 1, 1, -1, -1, 1, -1, -1;
    return polyhedral(P, Eigen::Vector4d::Ones());
}

PolyhedralSet box(int k, double lo, double hi) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2 * k, k);
    Eigen::VectorXd b(2 * k);
    for (int i = 0; i < k; ++i) {
        P(2 * i, i) = 1.0;
        b[2 * i] = hi;
        P(2 * i + 1, i) = -1.0;
        b[2 * i + 1] = -lo;
    }
    return polyhedral(P, b);
}

PolyhedralSet random_polytope(std::mt19937_64& rng, int k, int extra) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.5, 2.0);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2 * k + extra, k);
    Eigen::VectorXd b(2 * k + extra);
    for (int i = 0; i < k; ++i) {
        P(2 * i, i) = 1.0;
        b[2 * i] = w(rng);
        P(2 * i + 1, i) = -1.0;
        b[2 * i + 1] = w(rng);
    }
    for (int r = 0; r < extra; ++r) {
        for (int j = 0; j < k; ++j) P(2 * k + r, j) = u(rng);
        b[2 * k + r] = 0.2 + 0.5 * w(rng);
    }
    return polyhedral(P, b);
}

int count_role(const DeterministicModel& det, const std::string& role) {
    int n = 0;
    for (const auto& v : det.vars) n += v.provenance.role == role;
    for (const auto& r : det.rows) n += r.provenance.role == role;
    return n;
}

// Counterpart with the original columns fixed at x; feasible iff x is robust.
bool counterpart_feasible_at(const DeterministicModel& det, const std::vector<double>& x) {
    lp::StandardLp lp = det.to_lp();
    for (std::size_t j = 0; j < x.size(); ++j) lp.columns[j].lower = lp.columns[j].upper = x[j];
    for (auto& c : lp.columns) c.cost = 0.0;
    return lp::solve_lp(lp).status == lp::Status::Optimal;
}

}  // namespace

TEST(NominalSubstitute, ListingExample) {
    Model m;
    std::vector<VarId> x;
    for (int i = 0; i < 3; ++i) x.push_back(m.add_var("x" + std::to_string(i)));
    const auto c = m.add_unc_params("c", 3, std::vector<double>{0.1, 0.2, 0.3}, box(3, 0.0, 1.0));
    Expr lhs;
    for (int i = 0; i < 3; ++i) lhs += Expr::unc(c[i]) * Expr::var(x[i]);
    m.add_constraint(lhs, Sense::LessEqual, 0.0);
    const DeterministicModel det = nominal_substitute(m);
    ASSERT_EQ(det.rows.size(), 1U);
    EXPECT_EQ(det.rows[0].expr.coefs, (std::map<int, double>{{0, 0.1}, {1, 0.2}, {2, 0.3}}));
    EXPECT_EQ(det.rows[0].expr.constant, 0.0);
    EXPECT_EQ(det.vars.size(), 3U);
}

TEST(NominalSubstitute, CollapsesBilinearTerms) {
    Model m;
    const VarId x = m.add_var("x");
    const auto xi = m.add_unc_params("xi", 1, std::vector<double>{0.0}, box(1, -1.0, 1.0));
    m.add_constraint((1.0 + Expr::unc(xi[0])) * Expr::var(x), Sense::LessEqual, 2.0);
    const DeterministicModel det = nominal_substitute(m);
    EXPECT_EQ(det.rows[0].expr.coefs, (std::map<int, double>{{0, 1.0}}));
    EXPECT_EQ(det.rows[0].rhs, 2.0);
}

TEST(NominalSubstitute, ObjectiveAtNominal) {
    Model m;
    const VarId x0 = m.add_var("x0"), x1 = m.add_var("x1");
    const auto w = m.add_unc_params("w", 2, std::vector<double>{0.5, 0.5}, diamond());
    m.set_objective(Expr::unc(w[0]) * Expr::var(x0) + Expr::unc(w[1]) * Expr::var(x1), ObjSense::Maximize);
    const DeterministicModel det = nominal_substitute(m);
    EXPECT_EQ(det.objective.coefs, (std::map<int, double>{{0, 0.5}, {1, 0.5}}));
    EXPECT_EQ(det.sense, ObjSense::Maximize);
}

TEST(NominalSubstitute, MissingNominal) {
    Model m;
    const VarId x = m.add_var("x");
    const auto xi = m.add_unc_params("xi", 1, std::nullopt, box(1, 0.0, 1.0));
    m.add_constraint(Expr::unc(xi[0]) * Expr::var(x), Sense::LessEqual, 1.0);
    EXPECT_THROW(nominal_substitute(m), Error);
}

TEST(LiftObjective, MaxSense) {
    Model m;
    const VarId x0 = m.add_var("x0"), x1 = m.add_var("x1");
    const auto w = m.add_unc_params("w", 2, std::vector<double>{0.5, 0.5}, diamond());
    const Expr f = Expr::unc(w[0]) * Expr::var(x0) + Expr::unc(w[1]) * Expr::var(x1);
    m.set_objective(f, ObjSense::Maximize);
    std::optional<VarId> t;
    const Model lifted = lift_objective(m, &t);
    ASSERT_TRUE(t.has_value());
    EXPECT_EQ(lifted.objective(), Expr::var(*t));
    EXPECT_EQ(lifted.sense(), ObjSense::Maximize);
    const Constraint& c = lifted.constraints().back();
    EXPECT_EQ(c.expr, Expr::var(*t) - f);
    EXPECT_EQ(c.sense, Sense::LessEqual);
    EXPECT_EQ(c.rhs, 0.0);
}

TEST(LiftObjective, MinSense) {
    Model m;
    const VarId x0 = m.add_var("x0");
    const auto xi = m.add_unc_params("xi", 1, std::vector<double>{0.0}, box(1, -1.0, 1.0));
    const Expr f = (Expr::unc(xi[0]) + 1.0) * Expr::var(x0);
    m.set_objective(f, ObjSense::Minimize);
    std::optional<VarId> t;
    const Model lifted = lift_objective(m, &t);
    EXPECT_EQ(lifted.constraints().back().expr, f - Expr::var(*t));
}

TEST(LiftObjective, DeterministicObjectiveIsIdentity) {
    Model m;
    const VarId x0 = m.add_var("x0");
    m.set_objective(Expr::var(x0, 2.0), ObjSense::Minimize);
    EXPECT_EQ(lift_objective(m), m);
}

TEST(ApplyLdr, ExactTrackingRule) {
    // y >= xi0 with xi0 in [0, 1]
    Model m;
    const auto xi = m.add_unc_params("xi", 1, std::vector<double>{0.5}, box(1, 0.0, 1.0));
    const AdjVarId y = m.add_adjustable("y", xi);
    m.add_constraint(Expr::adj(y) - Expr::unc(xi[0]), Sense::GreaterEqual, 0.0, "track");
    const auto [out, coef] = apply_ldr(m);
    ASSERT_EQ(coef.rules.size(), 1U);
    const auto& rule = coef.rules[0];
    ASSERT_EQ(rule.slopes.size(), 1U);
    EXPECT_EQ(out.vars()[rule.intercept.value].name, "y.0");
    EXPECT_EQ(out.vars()[rule.slopes[0].second.value].name, "y.xi[0]");
    EXPECT_EQ(out.constraints().size(), 1U);
    // y0 = 0, Y0 = 1 is robustly feasible; y0 = 0, Y0 = 0.5 is not
    std::vector<double> x(out.vars().size(), 0.0);
    x[rule.slopes[0].second.value] = 1.0;
    const auto ok = check_robust_feasibility(out, {x, {}});
    EXPECT_TRUE(ok.feasible);
    x[rule.slopes[0].second.value] = 0.5;
    EXPECT_FALSE(check_robust_feasibility(out, {x, {}}).feasible);
}

TEST(ApplyLdr, BoundsBecomeRobustRows) {
    Model m;
    const auto w = m.add_unc_params("w", 3, std::vector<double>{0.5, 0.5, 0.5}, box(3, 0.0, 1.0));
    m.add_adjustable("y", w, 0.0, 1.0);
    m.add_adjustable("z", w);
    const auto [out, coef] = apply_ldr(m);
    ASSERT_EQ(out.constraints().size(), 2U);
    EXPECT_EQ(out.constraints()[0].name, "y.lb");
    EXPECT_EQ(out.constraints()[0].sense, Sense::GreaterEqual);
    EXPECT_EQ(out.constraints()[1].name, "y.ub");
    EXPECT_EQ(out.constraints()[0].kind(), ConstraintKind::Uncertain);
    EXPECT_EQ(coef.rules[0].slopes.size(), 3U);
    EXPECT_TRUE(out.adjvars().empty());
}

TEST(ApplyLdr, StaticRuleKeepsVariable) {
    Model m;
    const auto w = m.add_unc_params("w", 1, std::vector<double>{0.5}, box(1, 0.0, 1.0));
    m.add_adjustable("y", w, 0.0, 1.0);
    LdrOptions o;
    o.static_rule = true;
    const auto [out, coef] = apply_ldr(m, o);
    EXPECT_TRUE(out.constraints().empty());
    ASSERT_EQ(out.vars().size(), 1U);
    EXPECT_EQ(out.vars()[0].name, "y");
    EXPECT_EQ(out.vars()[0].upper, 1.0);
    EXPECT_TRUE(coef.rules[0].slopes.empty());
}

TEST(ApplyLdr, RuleReconstructsAdjustableValue) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Model m;
    const auto w = m.add_unc_params("w", 3, std::nullopt, box(3, -1.0, 1.0));
    const AdjVarId y = m.add_adjustable("y", {w[0], w[2]});
    m.add_constraint(Expr::adj(y, 2.0) + Expr::unc(w[1]), Sense::LessEqual, 5.0);
    const auto [out, coef] = apply_ldr(m);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(out.vars().size()), xi(3);
        for (auto& v : x) v = u(rng);
        for (auto& v : xi) v = u(rng);
        const auto& r = coef.rules[0];
        const double yv = x[r.intercept.value] + x[r.slopes[0].second.value] * xi[0] + x[r.slopes[1].second.value] * xi[2];
        EXPECT_NEAR(evaluate(out.constraints()[0].expr, x, xi), 2.0 * yv + xi[1], 1e-12);
    }
}

TEST(ReformulatePolyhedral, DiamondCounts) {
    Model m;
    const VarId x0 = m.add_var("x0", Domain::Continuous, 0, 1), x1 = m.add_var("x1", Domain::Continuous, 0, 1);
    const auto w = m.add_unc_params("w", 2, std::vector<double>{0.0, 0.0}, diamond());
    m.add_constraint(Expr::unc(w[0]) * Expr::var(x0) + Expr::unc(w[1]) * Expr::var(x1), Sense::LessEqual, 1.0, "c0");
    const DeterministicModel det = reformulate(m);
    EXPECT_EQ(count_role(det, "dual"), 4);
    EXPECT_EQ(count_role(det, "dual_equality"), 2);
    EXPECT_EQ(count_role(det, "robust_row"), 1);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(det.vars[2 + i].name, "lam[c0][" + std::to_string(i) + "]");
    EXPECT_EQ(det.vars[2].lower, 0.0);
    EXPECT_TRUE(det.conic_rows.empty());
    // x = (1, 0) is binding: worst case xi0 = 1
    EXPECT_TRUE(counterpart_feasible_at(det, {1.0, 0.0}));
    EXPECT_TRUE(counterpart_feasible_at(det, {0.5, 0.5}));
}

TEST(ReformulatePolyhedral, BoxWorstCaseIsL1Norm) {
    Model m;
    const VarId x0 = m.add_var("x0", Domain::Continuous, -kInf, kInf);
    const VarId x1 = m.add_var("x1", Domain::Continuous, -kInf, kInf);
    const auto w = m.add_unc_params("w", 2, std::nullopt, box(2, -1.0, 1.0));
    m.add_constraint(Expr::unc(w[0]) * Expr::var(x0) + Expr::unc(w[1]) * Expr::var(x1), Sense::LessEqual, 1.0);
    const DeterministicModel det = reformulate(m);
    EXPECT_FALSE(counterpart_feasible_at(det, {1.0, 1.0}));
    EXPECT_TRUE(counterpart_feasible_at(det, {0.5, -0.5}));
    EXPECT_FALSE(counterpart_feasible_at(det, {0.5, -0.51}));
}

TEST(ReformulatePolyhedral, CertaintyCase) {
    // a(x) = 0: row reduces to f(x) <= 0, lam = 0 admissible since b >= 0
    Model m;
    const VarId x = m.add_var("x", Domain::Continuous, -kInf, kInf);
    const auto w = m.add_unc_params("w", 2, std::nullopt, diamond());
    Expr e = Expr::var(x) + Expr::unc(w[0]);
    e += Expr::unc(w[0], -1.0);
    m.add_constraint(e + Expr::unc(w[1], 0.0), Sense::LessEqual, 2.0);
    const DeterministicModel det = reformulate(m);
    EXPECT_TRUE(counterpart_feasible_at(det, {2.0}));
    EXPECT_FALSE(counterpart_feasible_at(det, {2.1}));
}

TEST(ReformulatePolyhedral, StrongDuality) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + trial % 4;
        const PolyhedralSet set = random_polytope(rng, k, trial % 3);
        std::vector<LinearExpr> a(k);
        Eigen::VectorXd av(k);
        for (int j = 0; j < k; ++j) a[j].constant = av[j] = u(rng);
        DeterministicModel det;
        int counter = 0;
        det.objective = reformulate_polyhedral(det, "c", a, set, counter);
        det.sense = ObjSense::Minimize;
        const auto dual = lp::solve_lp(det.to_lp());
        ASSERT_EQ(dual.status, lp::Status::Optimal);
        double best = -kInf;
        for (const auto& v : oracle::polytope_vertices(set.P(), set.b())) best = std::max(best, av.dot(v));
        EXPECT_NEAR(dual.objective, best, 1e-7);
        EXPECT_NEAR(dual.objective, support_function(set, av).value, 1e-7);
    }
}

TEST(ReformulatePolyhedral, SoundAndComplete) {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = 1 + trial % 3;
        const PolyhedralSet set = random_polytope(rng, k, trial % 3);
        const auto verts = oracle::polytope_vertices(set.P(), set.b());
        // row: sum_j (c_j + d_j x_j) xi_j + e'x <= 1 with x in [-1, 1]^k
        Model m;
        std::vector<VarId> x;
        for (int j = 0; j < k; ++j) x.push_back(m.add_var("x" + std::to_string(j), Domain::Continuous, -1.0, 1.0));
        const auto xi = m.add_unc_params("xi", k, std::nullopt, set);
        Expr row;
        for (int j = 0; j < k; ++j) {
            row += (u(rng) + u(rng) * Expr::var(x[j])) * Expr::unc(xi[j]);
            row += Expr::var(x[j], u(rng));
        }
        m.add_constraint(row, Sense::LessEqual, 1.0);
        Expr obj;
        for (int j = 0; j < k; ++j) obj += Expr::var(x[j], u(rng));
        m.set_objective(obj, ObjSense::Maximize);
        const DeterministicModel det = reformulate(m);

        auto worst = [&](const std::vector<double>& xv) {
            double w = -kInf;
            for (const auto& v : verts) {
                w = std::max(w, evaluate(row, xv, std::vector<double>(v.data(), v.data() + k)) - 1.0);
            }
            return w;
        };
        // soundness at the counterpart optimum
        const auto sol = lp::solve_lp(det.to_lp());
        if (sol.status == lp::Status::Optimal) {
            EXPECT_LE(worst({sol.x.begin(), sol.x.begin() + k}), 1e-7);
        }
        // completeness at random points that pass the vertex check
        for (int probe = 0; probe < 10; ++probe) {
            std::vector<double> xv(k);
            for (auto& v : xv) v = u(rng);
            const double w = worst(xv);
            if (w <= -1e-9) EXPECT_TRUE(counterpart_feasible_at(det, xv));
            if (w >= 1e-6) EXPECT_FALSE(counterpart_feasible_at(det, xv));
        }
    }
}

TEST(ReformulateEllipsoidal, ConicRowValues) {
    auto conic_value = [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const std::vector<double>& xv,
                          double rhs) {
        Model m;
        std::vector<VarId> x;
        for (std::size_t j = 0; j < xv.size(); ++j) {
            x.push_back(m.add_var("x" + std::to_string(j), Domain::Continuous, -kInf, kInf));
        }
        const auto xi = m.add_unc_params("xi", static_cast<int>(xv.size()), std::nullopt, ellipsoidal(mean, cov));
        Expr row;
        for (std::size_t j = 0; j < xv.size(); ++j) row += Expr::unc(xi[j]) * Expr::var(x[j]);
        m.add_constraint(row, Sense::LessEqual, rhs);
        const DeterministicModel det = reformulate(m);
        EXPECT_EQ(det.conic_rows.size(), 1U);
        EXPECT_EQ(det.conic_rows[0].terms.size(), 1U);
        return det.conic_rows[0].evaluate(xv);
    };
    EXPECT_NEAR(conic_value(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), {0.6, 0.8}, 1.0), 0.0, 1e-12);
    EXPECT_NEAR(conic_value(Eigen::Vector3d(0.5, 0.3, 0.1), Eigen::Matrix3d::Identity(), {1, 0, 0}, 2.0), -0.5, 1e-12);
    EXPECT_NEAR(conic_value(Eigen::Vector2d::Zero(), Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix(), {1, 0}, 0.0),
                2.0, 1e-12);
}

TEST(Reformulate, UnsupportedSet) {
    Model m;
    const VarId x = m.add_var("x");
    GenericSet g{2, {}};
    GenericConstraint c;
    c.add_quadratic(0, 0, 1);
    c.add_linear(1, -1);
    g.constraints = {c};
    const auto xi = m.add_unc_params("xi", 2, std::nullopt, g);
    m.add_constraint(Expr::unc(xi[0]) * Expr::var(x), Sense::LessEqual, 1.0);
    try {
        reformulate(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoApplicableReformulation);
    }
}

TEST(Reformulate, GenericAffineSetIsDetected) {
    Model m;
    const VarId x = m.add_var("x", Domain::Continuous, 0, 10);
    GenericSet g{1, {}};
    GenericConstraint lo, hi;
    lo.add_linear(0, 1);
    lo.sense = Sense::GreaterEqual;
    lo.rhs = 1;
    hi.add_linear(0, 1);
    hi.rhs = 2;
    g.constraints = {lo, hi};
    const auto xi = m.add_unc_params("xi", 1, std::vector<double>{1.5}, g);
    m.add_constraint(Expr::unc(xi[0]) * Expr::var(x), Sense::LessEqual, 1.0);
    m.set_objective(Expr::var(x), ObjSense::Maximize);
    const SolveResult r = solve_reformulation(m);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.objective, 0.5, 1e-9);
}

TEST(Reformulate, RequiresDecisionRulesFirst) {
    Model m;
    const auto xi = m.add_unc_params("xi", 1, std::nullopt, box(1, 0, 1));
    const AdjVarId y = m.add_adjustable("y", xi);
    m.add_constraint(Expr::adj(y) - Expr::unc(xi[0]), Sense::GreaterEqual, 0.0);
    try {
        reformulate(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonAffineAfterSubstitution);
    }
}

TEST(Ldr, ZeroSlopesEqualStaticOptimum) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cases::CaseSpec spec{cases::CaseKind::Facility, 2, 2, cases::SetGeometry::Polyhedral, 0.5, seed, std::nullopt};
        const Model m = cases::generate(spec);
        SolveOptions fixed, stat;
        fixed.fix_ldr_slopes = true;
        stat.static_adjustables = true;
        const auto a = solve_reformulation(m, fixed);
        const auto b = solve_reformulation(m, stat);
        ASSERT_EQ(a.status, Status::Optimal);
        ASSERT_EQ(b.status, Status::Optimal);
        EXPECT_NEAR(a.objective, b.objective, 1e-9 * std::max(1.0, std::abs(b.objective)));
    }
}

TEST(Ldr, ScenarioOracleAgreesOnFacility) {
    cases::CaseSpec spec{cases::CaseKind::Facility, 2, 1, cases::SetGeometry::Polyhedral, 0.7, 3, std::nullopt};
    const Model m = cases::generate(spec);
    const auto oracle_obj = oracle::robust_by_vertices(m);
    ASSERT_TRUE(oracle_obj.has_value());
    const auto r = solve_reformulation(m);
    ASSERT_EQ(r.status, Status::Optimal);
    EXPECT_NEAR(r.objective, *oracle_obj, 1e-6 * std::max(1.0, std::abs(*oracle_obj)));
}

TEST(NominalSubstitute, ObjectiveMatchesEvaluation) {
    for (auto kind : {cases::CaseKind::Portfolio, cases::CaseKind::Knapsack, cases::CaseKind::Facility}) {
        cases::CaseSpec spec{kind, 3, 2, cases::SetGeometry::Polyhedral, 0.5, 7, std::nullopt};
        const Model m = cases::generate(spec);
        const SolveResult r = solve_nominal(m);
        ASSERT_EQ(r.status, Status::Optimal);
        std::vector<double> y;
        for (const auto& rule : r.rules) y.push_back(rule.intercept);
        EXPECT_NEAR(evaluate(m.objective(), r.x, m.nominal_point(), y), r.objective, 1e-9 * std::max(1.0, std::abs(r.objective)));
    }
}
