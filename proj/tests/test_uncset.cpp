#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "robustkit/uncset.hpp"

using namespace robustkit;

namespace {

Eigen::MatrixXd diamond_P() {
    Eigen::MatrixXd P(4, 2);
    P << 1, 1, 1, -1, -1, 1, -1, -1;
    return P;
}

void expect_code(ErrorCode code, const std::function<void()>& f) {
    try {
        f();
        ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

// Random bounded polytope: a box plus a few random cuts through it, so the
// center stays inside.
PolyhedralSet random_polytope(std::mt19937_64& rng, int k, int extra) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.5, 2.0);
    Eigen::MatrixXd P(2 * k + extra, k);
    Eigen::VectorXd b(2 * k + extra);
    P.setZero();
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

EllipsoidalSet random_ellipsoid(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd A(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) A(i, j) = u(rng);
    }
    Eigen::VectorXd mu(k);
    for (int i = 0; i < k; ++i) mu[i] = u(rng);
    return ellipsoidal(mu, A * A.transpose() + 0.3 * Eigen::MatrixXd::Identity(k, k));
}

GenericSet as_generic(const PolyhedralSet& p) {
    GenericSet g{p.dim(), {}};
    for (int i = 0; i < p.num_facets(); ++i) {
        GenericConstraint c;
        for (int j = 0; j < p.dim(); ++j) {
            if (p.P()(i, j) != 0.0) c.add_linear(j, p.P()(i, j));
        }
        c.rhs = p.b()[i];
        g.constraints.push_back(c);
    }
    return g;
}

}  // namespace

TEST(PolyhedralSet, Diamond) {
    const PolyhedralSet d = polyhedral(diamond_P(), Eigen::Vector4d::Ones());
    EXPECT_EQ(d.dim(), 2);
    EXPECT_TRUE(contains(d, Eigen::Vector2d(0.5, 0.5)));
    EXPECT_FALSE(contains(d, Eigen::Vector2d(0.6, 0.6)));
}

TEST(PolyhedralSet, Interval) {
    Eigen::MatrixXd P(2, 1);
    P << 1, -1;
    const PolyhedralSet s = polyhedral(P, Eigen::Vector2d(1, 0));
    EXPECT_NEAR(support_function(s, Eigen::VectorXd::Constant(1, 1.0)).value, 1.0, 1e-12);
    EXPECT_NEAR(support_function(s, Eigen::VectorXd::Constant(1, -1.0)).value, 0.0, 1e-12);
}

TEST(PolyhedralSet, ConstructionErrors) {
    expect_code(ErrorCode::UnboundedSet, [] { polyhedral(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1)); });
    Eigen::MatrixXd P(2, 1);
    P << 1, -1;
    expect_code(ErrorCode::EmptySet, [&] { polyhedral(P, Eigen::Vector2d(-1, 0)); });
    expect_code(ErrorCode::DimensionMismatch, [&] { polyhedral(P, Eigen::Vector3d(1, 1, 1)); });
}

TEST(EllipsoidalSet, Construction) {
    const EllipsoidalSet ball = ellipsoidal(Eigen::Vector3d(0.5, 0.3, 0.1), Eigen::Matrix3d::Identity());
    EXPECT_NEAR(support_function(ball, Eigen::Vector3d(1, 0, 0)).value, 1.5, 1e-12);
    const EllipsoidalSet e = ellipsoidal(Eigen::Vector2d::Zero(), Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix());
    EXPECT_NEAR(support_function(e, Eigen::Vector2d(1, 0)).value, 2.0, 1e-12);
    EXPECT_NEAR(support_function(e, Eigen::Vector2d(0, 1)).value, 1.0, 1e-12);
}

TEST(EllipsoidalSet, ConstructionErrors) {
    Eigen::Matrix2d indefinite;
    indefinite << 1, 2, 2, 1;
    expect_code(ErrorCode::NotPositiveDefinite, [&] { ellipsoidal(Eigen::Vector2d::Zero(), indefinite); });
    Eigen::Matrix2d asym;
    asym << 1, 0.5, 0, 1;
    expect_code(ErrorCode::NotSymmetric, [&] { ellipsoidal(Eigen::Vector2d::Zero(), asym); });
    Eigen::Matrix2d singular;
    singular << 1, 1, 1, 1;
    expect_code(ErrorCode::NotPositiveDefinite, [&] { ellipsoidal(Eigen::Vector2d::Zero(), singular); });
}

TEST(SupportFunction, DiamondMatchesVertices) {
    const PolyhedralSet d = polyhedral(diamond_P(), Eigen::Vector4d::Ones());
    const auto r = support_function(d, Eigen::Vector2d(1, 0));
    EXPECT_NEAR(r.value, 1.0, 1e-12);
    EXPECT_NEAR((r.argmax - Eigen::Vector2d(1, 0)).norm(), 0.0, 1e-9);
}

TEST(SupportFunction, UnitBall) {
    const EllipsoidalSet ball = ellipsoidal(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
    const auto r = support_function(ball, Eigen::Vector2d(3, 4));
    EXPECT_NEAR(r.value, 5.0, 1e-12);
    EXPECT_NEAR((r.argmax - Eigen::Vector2d(0.6, 0.8)).norm(), 0.0, 1e-12);
    const auto zero = support_function(ball, Eigen::Vector2d::Zero());
    EXPECT_EQ(zero.value, 0.0);
    EXPECT_EQ(zero.argmax, Eigen::Vector2d::Zero());
}

TEST(SupportFunction, DimensionMismatch) {
    const EllipsoidalSet ball = ellipsoidal(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
    expect_code(ErrorCode::DimensionMismatch, [&] { support_function(ball, Eigen::Vector3d::Ones()); });
}

TEST(SupportFunction, PolyhedralMatchesVertexEnumeration) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_int_distribution<int> dim(1, 3), extra(0, 2);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = dim(rng);
        const PolyhedralSet s = random_polytope(rng, k, extra(rng));
        ASSERT_LE(s.num_facets(), 8);
        const auto verts = oracle::polytope_vertices(s.P(), s.b());
        ASSERT_FALSE(verts.empty());
        Eigen::VectorXd a(k);
        for (int j = 0; j < k; ++j) a[j] = u(rng);
        double best = -lp::kInf;
        for (const auto& v : verts) best = std::max(best, a.dot(v));
        EXPECT_NEAR(support_function(s, a).value, best, 1e-8);
    }
}

TEST(SupportFunction, Sublinear) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + trial % 4;
        const ResolvedSet s = trial % 2 ? ResolvedSet{random_polytope(rng, k, 2)} : ResolvedSet{random_ellipsoid(rng, k)};
        Eigen::VectorXd a1(k), a2(k);
        for (int j = 0; j < k; ++j) {
            a1[j] = u(rng);
            a2[j] = u(rng);
        }
        const double lam = pos(rng);
        const double v1 = support_function(s, a1).value;
        const double v2 = support_function(s, a2).value;
        EXPECT_LE(support_function(s, a1 + a2).value, v1 + v2 + 1e-8);
        EXPECT_NEAR(support_function(s, lam * a1).value, lam * v1, 1e-8 * std::max(1.0, std::abs(lam * v1)));
    }
}

TEST(SupportFunction, EllipsoidalArgmaxOnBoundary) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + trial % 4;
        const EllipsoidalSet e = random_ellipsoid(rng, k);
        Eigen::VectorXd a(k);
        for (int j = 0; j < k; ++j) a[j] = u(rng);
        const auto r = support_function(e, a);
        EXPECT_NEAR(e.mahalanobis_sq(r.argmax), 1.0, 1e-8);
        EXPECT_NEAR(a.dot(r.argmax), r.value, 1e-10);
    }
}

TEST(DetectGeometry, AffineConstraints) {
    GenericSet g{2, {}};
    GenericConstraint c1, c2;
    c1.add_linear(0, 1);
    c1.add_linear(1, 1);
    c1.rhs = 1;
    c2.add_linear(0, 1);
    c2.add_linear(1, -1);
    c2.rhs = 1;
    g.constraints = {c1, c2};
    const auto geo = detect_geometry(g);
    const auto* p = std::get_if<PolyhedralGeometry>(&geo);
    ASSERT_NE(p, nullptr);
    Eigen::Matrix2d P;
    P << 1, 1, 1, -1;
    EXPECT_EQ(p->P, P);
    EXPECT_EQ(p->b, Eigen::Vector2d(1, 1));
}

TEST(DetectGeometry, GreaterEqualAndEqualityRows) {
    GenericSet g{1, {}};
    GenericConstraint ge, eq;
    ge.add_linear(0, 2);
    ge.sense = Sense::GreaterEqual;
    ge.rhs = 1;
    eq.add_linear(0, 1);
    eq.sense = Sense::Equal;
    eq.rhs = 3;
    g.constraints = {ge, eq};
    const auto geo = detect_geometry(g);
    const auto& p = std::get<PolyhedralGeometry>(geo);
    ASSERT_EQ(p.P.rows(), 3);
    EXPECT_EQ(p.P(0, 0), -2);
    EXPECT_EQ(p.b[0], -1);
    EXPECT_EQ(p.P(1, 0), 1);
    EXPECT_EQ(p.b[1], 3);
    EXPECT_EQ(p.P(2, 0), -1);
    EXPECT_EQ(p.b[2], -3);
}

TEST(DetectGeometry, UnitBall) {
    GenericSet g{2, {}};
    GenericConstraint c;
    c.add_quadratic(0, 0, 1);
    c.add_quadratic(1, 1, 1);
    c.rhs = 1;
    g.constraints = {c};
    const auto geo = detect_geometry(g);
    const auto* e = std::get_if<EllipsoidalGeometry>(&geo);
    ASSERT_NE(e, nullptr);
    EXPECT_NEAR(e->mean.norm(), 0.0, 1e-12);
    EXPECT_NEAR((e->cov - Eigen::Matrix2d::Identity()).norm(), 0.0, 1e-12);
}

TEST(DetectGeometry, ShiftedEllipseCompletesTheSquare) {
    // (x0 - 1)^2 / 4 + (x1 + 2)^2 <= 1  expanded
    GenericSet g{2, {}};
    GenericConstraint c;
    c.add_quadratic(0, 0, 0.25);
    c.add_quadratic(1, 1, 1.0);
    c.add_linear(0, -0.5);
    c.add_linear(1, 4.0);
    c.constant = 0.25 + 4.0;
    c.rhs = 1.0;
    g.constraints = {c};
    const auto geo = detect_geometry(g);
    const auto& e = std::get<EllipsoidalGeometry>(geo);
    EXPECT_NEAR((e.mean - Eigen::Vector2d(1, -2)).norm(), 0.0, 1e-12);
    EXPECT_NEAR((e.cov - Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix()).norm(), 0.0, 1e-12);
}

TEST(DetectGeometry, Unsupported) {
    // xi0^2 <= xi1
    GenericSet g{2, {}};
    GenericConstraint c;
    c.add_quadratic(0, 0, 1);
    c.add_linear(1, -1);
    g.constraints = {c};
    EXPECT_TRUE(std::holds_alternative<UnsupportedGeometry>(detect_geometry(g)));
    GenericSet mixed = g;
    GenericConstraint lin;
    lin.add_linear(0, 1);
    lin.rhs = 1;
    mixed.constraints.push_back(lin);
    EXPECT_TRUE(std::holds_alternative<UnsupportedGeometry>(detect_geometry(mixed)));
    EXPECT_FALSE(resolve(UncertaintySet{g}).has_value());
}

TEST(DetectGeometry, IsDeterministic) {
    std::mt19937_64 rng(17);
    const GenericSet g = as_generic(random_polytope(rng, 3, 2));
    const auto a = std::get<PolyhedralGeometry>(detect_geometry(g));
    const auto b = std::get<PolyhedralGeometry>(detect_geometry(g));
    EXPECT_EQ(a.P, b.P);
    EXPECT_EQ(a.b, b.b);
}

TEST(DetectGeometry, PolyhedralRoundTrip) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const PolyhedralSet s = random_polytope(rng, 1 + trial % 4, trial % 3);
        const auto geo = detect_geometry(as_generic(s));
        const auto* p = std::get_if<PolyhedralGeometry>(&geo);
        ASSERT_NE(p, nullptr);
        EXPECT_EQ(p->P, s.P());
        EXPECT_EQ(p->b, s.b());
    }
}

TEST(DetectGeometry, EllipsoidalRoundTrip) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 1 + trial % 4;
        const EllipsoidalSet e = random_ellipsoid(rng, k);
        // (q - mu)' cov^-1 (q - mu) <= 1 expanded into a generic constraint
        const Eigen::MatrixXd A = e.cov().inverse();
        const Eigen::VectorXd l = -2.0 * A * e.mean();
        GenericConstraint c;
        for (int i = 0; i < k; ++i) {
            c.add_quadratic(i, i, A(i, i));
            for (int j = i + 1; j < k; ++j) c.add_quadratic(i, j, 2.0 * A(i, j));
            c.add_linear(i, l[i]);
        }
        c.constant = e.mean().dot(A * e.mean());
        c.rhs = 1.0;
        const auto geo = detect_geometry(GenericSet{k, {c}});
        const auto* r = std::get_if<EllipsoidalGeometry>(&geo);
        ASSERT_NE(r, nullptr);
        EXPECT_NEAR((r->mean - e.mean()).norm(), 0.0, 1e-8);
        EXPECT_NEAR((r->cov - e.cov()).norm(), 0.0, 1e-8 * e.cov().norm());
    }
}

TEST(ChiSquare, QuantilesMatchReferenceValues) {
    EXPECT_NEAR(chi_square_quantile(0.95, 1), 3.8415, 1e-3);
    EXPECT_NEAR(chi_square_quantile(0.95, 2), 5.9915, 1e-3);
    for (double p : {0.01, 0.1, 0.5, 0.9, 0.95, 0.99, 0.999}) {
        EXPECT_NEAR(chi_square_quantile(p, 2), -2.0 * std::log(1.0 - p), 1e-6);
        for (int k : {1, 3, 5, 10}) {
            const boost::math::chi_squared dist(k);
            const double expected = boost::math::quantile(dist, p);
            EXPECT_NEAR(chi_square_quantile(p, k), expected, 1e-6 * std::max(1.0, expected)) << "k=" << k << " p=" << p;
        }
    }
}

TEST(GaussianConfidenceSet, ScalesCovariance) {
    const auto s = gaussian_confidence_set(Eigen::Vector2d(1, 2), Eigen::Matrix2d::Identity(), 0.95);
    EXPECT_NEAR(s.cov()(0, 0), 5.9915, 1e-3);
    EXPECT_EQ(s.mean(), Eigen::Vector2d(1, 2));
    const auto tiny = gaussian_confidence_set(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), 1e-6);
    EXPECT_LT(tiny.cov()(0, 0), 1e-5);
}

TEST(GaussianConfidenceSet, Errors) {
    expect_code(ErrorCode::AlphaOutOfRange,
                [] { gaussian_confidence_set(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), 1.0); });
    expect_code(ErrorCode::AlphaOutOfRange,
                [] { gaussian_confidence_set(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(), 0.0); });
    Eigen::Matrix2d bad;
    bad << 1, 2, 2, 1;
    expect_code(ErrorCode::NotPositiveDefinite, [&] { gaussian_confidence_set(Eigen::Vector2d::Zero(), bad, 0.5); });
}

TEST(GaussianConfidenceSet, MonteCarloCoverage) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> z;
    for (int k = 1; k <= 3; ++k) {
        Eigen::MatrixXd B = Eigen::MatrixXd::Random(k, k);
        const Eigen::MatrixXd cov = B * B.transpose() + Eigen::MatrixXd::Identity(k, k);
        const Eigen::VectorXd mean = Eigen::VectorXd::LinSpaced(k, -1.0, 1.0);
        const Eigen::MatrixXd L = cov.llt().matrixL();
        for (double alpha : {0.5, 0.9, 0.95}) {
            const EllipsoidalSet s = gaussian_confidence_set(mean, cov, alpha);
            constexpr int kSamples = 100000;
            int inside = 0;
            Eigen::VectorXd u(k);
            for (int i = 0; i < kSamples; ++i) {
                for (int j = 0; j < k; ++j) u[j] = z(rng);
                if (s.mahalanobis_sq(mean + L * u) <= 1.0) ++inside;
            }
            EXPECT_NEAR(static_cast<double>(inside) / kSamples, alpha, 0.01) << "k=" << k << " alpha=" << alpha;
        }
    }
}
