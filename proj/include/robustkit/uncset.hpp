#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "robustkit/chi_square.hpp"
#include "robustkit/error.hpp"
#include "robustkit/lp/simplex.hpp"
#include "robustkit/lp/standard_lp.hpp"

namespace robustkit {

using Sense = lp::RowSense;

namespace detail {

inline lp::StandardLp polyhedron_lp(const Eigen::MatrixXd& P, const Eigen::VectorXd& b) {
    lp::StandardLp lp;
    const auto k = P.cols();
    for (Eigen::Index j = 0; j < k; ++j) lp.add_column("xi" + std::to_string(j), -lp::kInf, lp::kInf);
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        std::vector<std::pair<int, double>> coefs;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (P(i, j) != 0.0) coefs.emplace_back(static_cast<int>(j), P(i, j));
        }
        lp.add_row("p" + std::to_string(i), std::move(coefs), lp::RowSense::LessEqual, b[i]);
    }
    return lp;
}

}  // namespace detail

/// {xi : P xi <= b}, validated nonempty and bounded on construction.
class PolyhedralSet {
public:
    PolyhedralSet(Eigen::MatrixXd P, Eigen::VectorXd b) : P_(std::move(P)), b_(std::move(b)) {
        if (P_.cols() == 0 || P_.rows() != b_.size()) {
            throw Error(ErrorCode::DimensionMismatch, "polyhedral set needs P (m x k, k >= 1) and b of length m");
        }
        lp::StandardLp lp = detail::polyhedron_lp(P_, b_);
        if (lp::solve_lp(lp).status == lp::Status::Infeasible) {
            throw Error(ErrorCode::EmptySet, "{xi : P xi <= b} is empty");
        }
        lp.sense = lp::ObjSense::Maximize;
        for (int j = 0; j < lp.num_columns(); ++j) {
            for (double dir : {1.0, -1.0}) {
                for (auto& col : lp.columns) col.cost = 0.0;
                lp.columns[j].cost = dir;
                if (lp::solve_lp(lp).status == lp::Status::Unbounded) {
                    throw Error(ErrorCode::UnboundedSet,
                                "xi[" + std::to_string(j) + "] is unbounded " + (dir > 0 ? "above" : "below"));
                }
            }
        }
    }

    const Eigen::MatrixXd& P() const { return P_; }
    const Eigen::VectorXd& b() const { return b_; }
    int dim() const { return static_cast<int>(P_.cols()); }
    int num_facets() const { return static_cast<int>(P_.rows()); }

    bool operator==(const PolyhedralSet& o) const { return P_ == o.P_ && b_ == o.b_; }

private:
    Eigen::MatrixXd P_;
    Eigen::VectorXd b_;
};

/// {xi : (xi - mean)' cov^-1 (xi - mean) <= 1} with cov symmetric positive definite.
class EllipsoidalSet {
public:
    EllipsoidalSet(Eigen::VectorXd mean, Eigen::MatrixXd cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
        const auto k = mean_.size();
        if (k == 0 || cov_.rows() != k || cov_.cols() != k) {
            throw Error(ErrorCode::DimensionMismatch, "ellipsoidal set needs mean of length k and k x k cov");
        }
        const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
        if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            throw Error(ErrorCode::NotSymmetric, "covariance matrix is not symmetric");
        }
        Eigen::LLT<Eigen::MatrixXd> llt(cov_);
        const double diag_scale = cov_.diagonal().cwiseAbs().maxCoeff();
        if (llt.info() != Eigen::Success) {
            throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
        }
        const Eigen::MatrixXd L = llt.matrixL();
        for (Eigen::Index i = 0; i < k; ++i) {
            if (L(i, i) * L(i, i) <= 1e-10 * diag_scale) {
                throw Error(ErrorCode::NotPositiveDefinite, "covariance matrix is numerically singular");
            }
        }
        chol_ = L;
    }

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    /// Lower Cholesky factor of cov.
    const Eigen::MatrixXd& chol() const { return chol_; }
    int dim() const { return static_cast<int>(mean_.size()); }

    /// (xi - mean)' cov^-1 (xi - mean)
    double mahalanobis_sq(const Eigen::VectorXd& xi) const {
        const Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(xi - mean_);
        return z.squaredNorm();
    }

    bool operator==(const EllipsoidalSet& o) const { return mean_ == o.mean_ && cov_ == o.cov_; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd chol_;
};

/// One constraint `constant + linear'xi + xi'Q xi <sense> rhs` of a generic
/// set. Indices are positions within the owning parameter group; quadratic
/// keys are stored with i <= j.
struct GenericConstraint {
    double constant = 0.0;
    std::map<int, double> linear;
    std::map<std::pair<int, int>, double> quadratic;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;

    void add_linear(int i, double c) {
        if ((linear[i] += c) == 0.0) linear.erase(i);
    }
    void add_quadratic(int i, int j, double c) {
        const auto key = i <= j ? std::make_pair(i, j) : std::make_pair(j, i);
        if ((quadratic[key] += c) == 0.0) quadratic.erase(key);
    }
    double lhs(const Eigen::VectorXd& xi) const {
        double v = constant;
        for (const auto& [i, c] : linear) v += c * xi[i];
        for (const auto& [ij, c] : quadratic) v += c * xi[ij.first] * xi[ij.second];
        return v;
    }
    bool operator==(const GenericConstraint&) const = default;
};

struct GenericSet {
    int dim = 0;
    std::vector<GenericConstraint> constraints;

    bool operator==(const GenericSet&) const = default;
};

using UncertaintySet = std::variant<PolyhedralSet, EllipsoidalSet, GenericSet>;

inline PolyhedralSet polyhedral(Eigen::MatrixXd P, Eigen::VectorXd b) {
    return PolyhedralSet(std::move(P), std::move(b));
}

inline EllipsoidalSet ellipsoidal(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    return EllipsoidalSet(std::move(mean), std::move(cov));
}

/// Ellipsoid containing a Gaussian(mean, cov) draw with probability `alpha`:
/// the covariance is scaled by the chi-square quantile with k = dim degrees of
/// freedom.
inline EllipsoidalSet gaussian_confidence_set(Eigen::VectorXd mean, Eigen::MatrixXd cov, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange, "confidence level must lie in (0, 1)");
    }
    const int k = static_cast<int>(mean.size());
    EllipsoidalSet base(mean, cov);  // validates cov before scaling
    const double r2 = chi_square_quantile(alpha, k);
    return EllipsoidalSet(std::move(mean), r2 * cov);
}

// Raw geometry recognized from a generic set, before any validation.
struct PolyhedralGeometry {
    Eigen::MatrixXd P;
    Eigen::VectorXd b;
};
struct EllipsoidalGeometry {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};
struct UnsupportedGeometry {
    std::string reason;
};
using Geometry = std::variant<PolyhedralGeometry, EllipsoidalGeometry, UnsupportedGeometry>;

/// Classifies a generic set. All-affine sets become P xi <= b (>= rows
/// negated, = rows split in two); a set made of one convex quadratic
/// constraint is completed to a square.
inline Geometry detect_geometry(const GenericSet& set) {
    const int k = set.dim;
    bool all_affine = true;
    for (const auto& c : set.constraints) all_affine = all_affine && c.quadratic.empty();

    if (all_affine) {
        std::vector<std::pair<Eigen::RowVectorXd, double>> rows;
        for (const auto& c : set.constraints) {
            Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(k);
            for (const auto& [i, v] : c.linear) a[i] = v;
            const double r = c.rhs - c.constant;
            if (c.sense != Sense::GreaterEqual) rows.emplace_back(a, r);
            if (c.sense != Sense::LessEqual) rows.emplace_back(-a, -r);
        }
        if (rows.empty()) return UnsupportedGeometry{"generic set has no constraints"};
        PolyhedralGeometry g{Eigen::MatrixXd(rows.size(), k), Eigen::VectorXd(rows.size())};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            g.P.row(static_cast<Eigen::Index>(i)) = rows[i].first;
            g.b[static_cast<Eigen::Index>(i)] = rows[i].second;
        }
        return g;
    }

    if (set.constraints.size() != 1) {
        return UnsupportedGeometry{"quadratic constraint mixed with other constraints"};
    }
    const GenericConstraint& c = set.constraints.front();
    if (c.sense == Sense::Equal) return UnsupportedGeometry{"quadratic equality"};
    // normalize to q'Aq + l'q + c0 <= 0
    const double s = c.sense == Sense::LessEqual ? 1.0 : -1.0;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd l = Eigen::VectorXd::Zero(k);
    for (const auto& [ij, v] : c.quadratic) {
        if (ij.first == ij.second) {
            A(ij.first, ij.first) += s * v;
        } else {
            A(ij.first, ij.second) += 0.5 * s * v;
            A(ij.second, ij.first) += 0.5 * s * v;
        }
    }
    for (const auto& [i, v] : c.linear) l[i] = s * v;
    const double c0 = s * (c.constant - c.rhs);

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) return UnsupportedGeometry{"quadratic form is not positive definite"};
    const Eigen::MatrixXd L = llt.matrixL();
    const double diag_scale = A.diagonal().cwiseAbs().maxCoeff();
    for (int i = 0; i < k; ++i) {
        if (L(i, i) * L(i, i) <= 1e-10 * diag_scale) {
            return UnsupportedGeometry{"quadratic form is numerically singular"};
        }
    }
    // (q - mu)' A (q - mu) <= mu' A mu - c0 with mu = -A^-1 l / 2
    const Eigen::VectorXd mu = -0.5 * llt.solve(l);
    const double radius = mu.dot(A * mu) - c0;
    if (!(radius > 0.0)) return UnsupportedGeometry{"quadratic set is empty or a single point"};
    const Eigen::MatrixXd Ainv = llt.solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd cov = radius * Ainv;
    cov = 0.5 * (cov + cov.transpose()).eval();
    return EllipsoidalGeometry{mu, cov};
}

inline int dimension(const UncertaintySet& set) {
    return std::visit(
        [](const auto& s) -> int {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GenericSet>) {
                return s.dim;
            } else {
                return s.dim();
            }
        },
        set);
}

/// Membership with absolute tolerance on every defining constraint
/// (Mahalanobis radius for ellipsoids).
inline bool contains(const UncertaintySet& set, const Eigen::VectorXd& xi, double tol = 1e-8) {
    if (const auto* p = std::get_if<PolyhedralSet>(&set)) {
        return ((p->P() * xi - p->b()).array() <= tol).all();
    }
    if (const auto* e = std::get_if<EllipsoidalSet>(&set)) {
        return e->mahalanobis_sq(xi) <= 1.0 + tol;
    }
    const auto& g = std::get<GenericSet>(set);
    for (const auto& c : g.constraints) {
        const double v = c.lhs(xi) - c.rhs;
        if (c.sense != Sense::GreaterEqual && v > tol) return false;
        if (c.sense != Sense::LessEqual && v < -tol) return false;
    }
    return true;
}

/// A set whose geometry is known to the separation and reformulation code.
using ResolvedSet = std::variant<PolyhedralSet, EllipsoidalSet>;

/// Library sets pass through; generic sets go through detect_geometry and
/// are validated (throwing EmptySet / UnboundedSet). Unsupported geometry
/// yields nullopt.
inline std::optional<ResolvedSet> resolve(const UncertaintySet& set) {
    if (const auto* p = std::get_if<PolyhedralSet>(&set)) return ResolvedSet{*p};
    if (const auto* e = std::get_if<EllipsoidalSet>(&set)) return ResolvedSet{*e};
    const Geometry g = detect_geometry(std::get<GenericSet>(set));
    if (const auto* p = std::get_if<PolyhedralGeometry>(&g)) return ResolvedSet{PolyhedralSet(p->P, p->b)};
    if (const auto* e = std::get_if<EllipsoidalGeometry>(&g)) return ResolvedSet{EllipsoidalSet(e->mean, e->cov)};
    return std::nullopt;
}

struct SupportResult {
    double value = 0.0;
    Eigen::VectorXd argmax;
};

/// max_{xi in U} a'xi and a maximizer.
inline SupportResult support_function(const ResolvedSet& set, const Eigen::VectorXd& a) {
    if (const auto* e = std::get_if<EllipsoidalSet>(&set)) {
        if (a.size() != e->dim()) throw Error(ErrorCode::DimensionMismatch, "direction length differs from set dimension");
        const Eigen::VectorXd sa = e->cov() * a;
        const double q = a.dot(sa);
        if (!(q > 0.0)) return {a.dot(e->mean()), e->mean()};
        const double root = std::sqrt(q);
        return {a.dot(e->mean()) + root, e->mean() + sa / root};
    }
    const auto& p = std::get<PolyhedralSet>(set);
    if (a.size() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "direction length differs from set dimension");
    lp::StandardLp lp = detail::polyhedron_lp(p.P(), p.b());
    lp.sense = lp::ObjSense::Maximize;
    for (int j = 0; j < p.dim(); ++j) lp.columns[j].cost = a[j];
    const lp::LpSolution sol = lp::solve_lp(lp);
    if (sol.status == lp::Status::Infeasible) throw Error(ErrorCode::EmptySet, "support function over an empty set");
    if (sol.status != lp::Status::Optimal) {
        throw Error(ErrorCode::UnboundedSet, "support function LP did not reach an optimum");
    }
    return {sol.objective, Eigen::Map<const Eigen::VectorXd>(sol.x.data(), p.dim())};
}

inline SupportResult support_function(const UncertaintySet& set, const Eigen::VectorXd& a) {
    const auto resolved = resolve(set);
    if (!resolved) throw Error(ErrorCode::SeparationUnavailable, "set geometry is not supported");
    return support_function(*resolved, a);
}

inline SupportResult support_function(const PolyhedralSet& set, const Eigen::VectorXd& a) {
    return support_function(ResolvedSet(set), a);
}

inline SupportResult support_function(const EllipsoidalSet& set, const Eigen::VectorXd& a) {
    return support_function(ResolvedSet(set), a);
}

/// A point of the set used when a parameter group has no nominal value.
inline Eigen::VectorXd reference_point(const ResolvedSet& set) {
    if (const auto* e = std::get_if<EllipsoidalSet>(&set)) return e->mean();
    const auto& p = std::get<PolyhedralSet>(set);
    return support_function(set, Eigen::VectorXd::Zero(p.dim())).argmax;
}

}  // namespace robustkit
