#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "robustkit/lp/standard_lp.hpp"

namespace robustkit::lp {

namespace detail {

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, Free };

inline constexpr double kMinRcond = 1e-12;

// Bounded-variable primal revised simplex over the computational form
//
//     A x - r = 0,   lower <= (x, r) <= upper
//
// where r holds one logical variable per row carrying the row bounds. It
// starts from the all-logical basis and minimizes the sum of bound
// infeasibilities of the basic variables until the basis is feasible, then
// switches to the true costs. Feasibility is re-examined every iteration, so
// drift uncovered by a refactorization simply resumes phase 1. When
// columns are few the basis is handled through the square block of basic
// structurals on rows with nonbasic logicals; otherwise a dense inverse is
// updated in product form between refactorizations.
class BoundedSimplex {
public:
    BoundedSimplex(const StandardLp& lp, const LpOptions& options)
        : lp_(lp), opt_(options), m_(lp.num_rows()), n_(lp.num_columns()) {
        cols_.assign(n_, {});
        for (int i = 0; i < m_; ++i) {
            for (const auto& [j, a] : lp.rows[i].coefs) {
                auto& col = cols_[j];
                if (!col.empty() && col.back().first == i) {
                    col.back().second += a;
                } else {
                    col.emplace_back(i, a);
                }
            }
        }
        const double sign = lp.sense == ObjSense::Minimize ? 1.0 : -1.0;
        for (int j = 0; j < n_; ++j) {
            lower_.push_back(lp.columns[j].lower);
            upper_.push_back(lp.columns[j].upper);
            cost_.push_back(sign * lp.columns[j].cost);
        }
        for (int i = 0; i < m_; ++i) {
            const Row& row = lp.rows[i];
            lower_.push_back(row.sense == RowSense::LessEqual ? -kInf : row.rhs);
            upper_.push_back(row.sense == RowSense::GreaterEqual ? kInf : row.rhs);
            cost_.push_back(0.0);
        }
        const double nd = n_, md = m_;
        switch (opt_.factorization) {
            case Factorization::Auto: reduced_ = nd * nd * nd < 9.0 * md * md; break;
            case Factorization::Dense: reduced_ = false; break;
            case Factorization::Reduced: reduced_ = true; break;
        }
    }

    LpSolution run() {
        LpSolution sol;
        initialize_basis();
        refactor();
        sol.status = iterate(sol);
        if (sol.status != Status::Optimal) return sol;

        const double sign = lp_.sense == ObjSense::Minimize ? 1.0 : -1.0;
        const Eigen::VectorXd y = duals(false);
        sol.x.assign(value_.begin(), value_.begin() + n_);
        sol.duals.resize(m_);
        for (int i = 0; i < m_; ++i) sol.duals[i] = sign * y[i];
        sol.reduced_costs.resize(n_);
        for (int j = 0; j < n_; ++j) {
            double d = lp_.columns[j].cost;
            for (const auto& [i, a] : cols_[j]) d -= sol.duals[i] * a;
            sol.reduced_costs[j] = d;
        }
        sol.objective = lp_.objective_value(sol.x);
        return sol;
    }

private:
    int total() const { return n_ + m_; }

    void initialize_basis() {
        value_.assign(total(), 0.0);
        state_.assign(total(), VarState::AtLower);
        for (int j = 0; j < n_; ++j) {
            if (std::isfinite(lower_[j])) {
                value_[j] = lower_[j];
            } else if (std::isfinite(upper_[j])) {
                value_[j] = upper_[j];
                state_[j] = VarState::AtUpper;
            } else {
                state_[j] = VarState::Free;
            }
        }
        rejected_.assign(total(), 0);
        basis_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            basis_[i] = n_ + i;
            state_[n_ + i] = VarState::Basic;
        }
    }

    template <class F>
    void for_column(int j, F&& f) const {
        if (j < n_) {
            for (const auto& [i, a] : cols_[j]) f(i, a);
        } else {
            f(j - n_, -1.0);
        }
    }

    // B^-1 a_j
    Eigen::VectorXd ftran(int j) const {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
        for_column(j, [&](int i, double v) { a[i] += v; });
        return solve(a);
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& a) const {
        if (!reduced_) return binv_ * a;
        // rows with a nonbasic logical pin the basic structurals through K
        Eigen::VectorXd rk(static_cast<int>(struct_pos_.size()));
        for (int t = 0; t < rk.size(); ++t) rk[t] = a[free_rows_[t]];
        const Eigen::VectorXd zs = kinv_ * rk;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(m_);
        Eigen::VectorXd z(m_);
        for (int t = 0; t < zs.size(); ++t) {
            z[struct_pos_[t]] = zs[t];
            for (const auto& [i, v] : cols_[basis_[struct_pos_[t]]]) w[i] += v * zs[t];
        }
        for (int i = 0; i < m_; ++i) {
            if (row_pos_[i] >= 0) z[row_pos_[i]] = w[i] - a[i];
        }
        return z;
    }

    // B^-T c, with c indexed by basis position
    Eigen::VectorXd btran(const Eigen::VectorXd& c) const {
        if (!reduced_) return binv_.transpose() * c;
        Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
        for (int i = 0; i < m_; ++i) {
            if (row_pos_[i] >= 0) y[i] = -c[row_pos_[i]];
        }
        Eigen::VectorXd rk(static_cast<int>(struct_pos_.size()));
        for (int t = 0; t < rk.size(); ++t) {
            double v = c[struct_pos_[t]];
            for (const auto& [i, a] : cols_[basis_[struct_pos_[t]]]) v -= y[i] * a;
            rk[t] = v;
        }
        const Eigen::VectorXd yk = kinv_.transpose() * rk;
        for (int t = 0; t < yk.size(); ++t) y[free_rows_[t]] = yk[t];
        return y;
    }

    void factor() {
        if (!reduced_) {
            Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m_, m_);
            for (int k = 0; k < m_; ++k) for_column(basis_[k], [&](int i, double a) { basis_matrix(i, k) += a; });
            binv_ = basis_matrix.partialPivLu().inverse();
            return;
        }
        struct_pos_.clear();
        free_rows_.clear();
        row_pos_.assign(m_, -1);
        for (int p = 0; p < m_; ++p) {
            if (basis_[p] < n_) {
                struct_pos_.push_back(p);
            } else {
                row_pos_[basis_[p] - n_] = p;
            }
        }
        std::vector<int> slot(m_, -1);
        for (int i = 0; i < m_; ++i) {
            if (row_pos_[i] < 0) {
                slot[i] = static_cast<int>(free_rows_.size());
                free_rows_.push_back(i);
            }
        }
        const int k = static_cast<int>(struct_pos_.size());
        Eigen::MatrixXd kmat = Eigen::MatrixXd::Zero(k, k);
        for (int t = 0; t < k; ++t) {
            for (const auto& [i, a] : cols_[basis_[struct_pos_[t]]]) {
                if (slot[i] >= 0) kmat(slot[i], t) += a;
            }
        }
        if (k == 0) {
            kinv_.resize(0, 0);
            rcond_ = 1.0;
            return;
        }
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kmat);
        rcond_ = lu.rcond();
        kinv_ = lu.inverse();
    }

    void refactor() {
        pivots_since_refactor_ = 0;
        if (m_ == 0) return;
        factor();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
        for (int j = 0; j < total(); ++j) {
            if (state_[j] == VarState::Basic || value_[j] == 0.0) continue;
            for_column(j, [&](int i, double a) { rhs[i] -= a * value_[j]; });
        }
        Eigen::VectorXd xb = solve(rhs);
        // one round of iterative refinement
        Eigen::VectorXd resid = rhs;
        for (int p = 0; p < m_; ++p) for_column(basis_[p], [&](int i, double a) { resid[i] -= a * xb[p]; });
        xb += solve(resid);
        double drift = 0.0;
        for (int i = 0; i < m_; ++i) {
            drift = std::max(drift, std::abs(value_[basis_[i]] - xb[i]) / (1.0 + std::abs(xb[i])));
            value_[basis_[i]] = xb[i];
        }
        // tighten after an unstable pivot
        if (started_ && drift > 1e-6) pivot_tol_ = std::min(10.0 * pivot_tol_, 1e-5);
    }

    // -1 below lower, +1 above upper, 0 within bounds
    int infeasibility(int pos) const {
        const int b = basis_[pos];
        if (value_[b] < lower_[b] - opt_.feas_tol) return -1;
        if (value_[b] > upper_[b] + opt_.feas_tol) return 1;
        return 0;
    }

    bool basis_feasible() const {
        for (int i = 0; i < m_; ++i) {
            if (infeasibility(i) != 0) return false;
        }
        return true;
    }

    Eigen::VectorXd duals(bool phase1) const {
        Eigen::VectorXd cb(m_);
        for (int i = 0; i < m_; ++i) cb[i] = phase1 ? infeasibility(i) : cost_[basis_[i]];
        return btran(cb);
    }

    double reduced_cost(int j, const Eigen::VectorXd& y, bool phase1) const {
        double d = phase1 ? 0.0 : cost_[j];
        for_column(j, [&](int i, double a) { d -= y[i] * a; });
        return d;
    }

    struct Entering {
        int var = -1;
        // +1 increases the variable, -1 decreases it
        double dir = 0.0;
    };

    Entering price(const Eigen::VectorXd& y, bool phase1) const {
        Entering best;
        double best_score = 0.0;
        for (int j = 0; j < total(); ++j) {
            const VarState s = state_[j];
            if (s == VarState::Basic || lower_[j] == upper_[j] || rejected_[j]) continue;
            const double d = reduced_cost(j, y, phase1);
            double dir = 0.0;
            if (s == VarState::AtLower && d < -opt_.opt_tol) {
                dir = 1.0;
            } else if (s == VarState::AtUpper && d > opt_.opt_tol) {
                dir = -1.0;
            } else if (s == VarState::Free && std::abs(d) > opt_.opt_tol) {
                dir = d < 0.0 ? 1.0 : -1.0;
            }
            if (dir == 0.0) continue;
            if (bland_) return {j, dir};
            if (std::abs(d) > best_score) {
                best_score = std::abs(d);
                best = {j, dir};
            }
        }
        return best;
    }

    Status iterate(LpSolution& sol) {
        int degenerate_run = 0;
        started_ = true;
        bland_ = false;
        while (true) {
            const bool phase1 = !basis_feasible();
            const Eigen::VectorXd y = duals(phase1);
            const Entering enter = price(y, phase1);
            if (enter.var < 0) {
                if (rejections_ > 0) {
                    // nothing else improves: take the unstable pivot after all
                    std::fill(rejected_.begin(), rejected_.end(), 0);
                    rejections_ = 0;
                    allow_unstable_ = true;
                    continue;
                }
                if (pivots_since_refactor_ > 0) {
                    refactor();
                    continue;
                }
                return phase1 ? Status::Infeasible : Status::Optimal;
            }
            if (sol.iterations >= opt_.max_iters) return Status::IterLimit;
            ++sol.iterations;

            const int q = enter.var;
            const Eigen::VectorXd alpha = ftran(q);
            // rate of change of each basic variable per unit step
            const Eigen::VectorXd delta = -enter.dir * alpha;

            // An infeasible basic blocks only on reaching its violated bound.
            // `dist` may be negative for a basic that is within tolerance but past its bound.
            auto blocking = [&](int i, double& dist, bool& at_upper) {
                const int b = basis_[i];
                const int inf = phase1 ? infeasibility(i) : 0;
                if (inf < 0) {
                    if (delta[i] <= pivot_tol_) return false;
                    dist = lower_[b] - value_[b];
                    at_upper = false;
                    return true;
                }
                if (inf > 0) {
                    if (delta[i] >= -pivot_tol_) return false;
                    dist = value_[b] - upper_[b];
                    at_upper = true;
                    return true;
                }
                if (delta[i] < -pivot_tol_ && std::isfinite(lower_[b])) {
                    dist = value_[b] - lower_[b];
                    at_upper = false;
                    return true;
                }
                if (delta[i] > pivot_tol_ && std::isfinite(upper_[b])) {
                    dist = upper_[b] - value_[b];
                    at_upper = true;
                    return true;
                }
                return false;
            };

            // Harris pass 1: step bound with every blocking bound relaxed by half
            // the feasibility tolerance, so overshoot never reads as infeasible
            const double harris_tol = 0.5 * opt_.feas_tol;
            double theta_max = kInf;
            for (int i = 0; i < m_; ++i) {
                double dist;
                bool up;
                if (blocking(i, dist, up)) {
                    theta_max = std::min(theta_max, std::max(0.0, dist + harris_tol) / std::abs(delta[i]));
                }
            }
            // pass 2: largest pivot within theta_max; Bland takes the smallest ratio, lowest index
            int leave_pos = -1;
            bool leave_upper = false;
            double step = kInf;
            double best_pivot = 0.0;
            for (int i = 0; i < m_; ++i) {
                double dist;
                bool up;
                if (!blocking(i, dist, up)) continue;
                const double ratio = std::max(0.0, dist) / std::abs(delta[i]);
                const bool take = bland_ ? (leave_pos < 0 || ratio < step ||
                                            (ratio == step && basis_[i] < basis_[leave_pos]))
                                         : (ratio <= theta_max && std::abs(delta[i]) > best_pivot);
                if (take) {
                    best_pivot = std::abs(delta[i]);
                    step = ratio;
                    leave_pos = i;
                    leave_upper = up;
                }
            }

            const double range = upper_[q] - lower_[q];
            const bool flip = std::isfinite(range) && range <= step;
            // a pivot into a nearly singular basis is refused and its column set aside
            if (reduced_ && !allow_unstable_ && !flip && leave_pos >= 0) {
                const int leaving = basis_[leave_pos];
                basis_[leave_pos] = q;
                factor();
                basis_[leave_pos] = leaving;
                if (rcond_ < kMinRcond) {
                    factor();
                    rejected_[q] = 1;
                    ++rejections_;
                    --sol.iterations;
                    continue;
                }
            }
            if (!flip && leave_pos < 0) {
                if (pivots_since_refactor_ > 0) {
                    --sol.iterations;
                    refactor();
                    continue;
                }
                // phase 1 is bounded below by zero, so a ray there is a numerical breakdown
                return phase1 ? Status::IterLimit : Status::Unbounded;
            }
            if (flip) step = range;

            if (step <= 1e-12) {
                if (++degenerate_run >= opt_.stall_limit) bland_ = true;
            } else {
                degenerate_run = 0;
                bland_ = false;
            }

            value_[q] += enter.dir * step;
            for (int i = 0; i < m_; ++i) value_[basis_[i]] += step * delta[i];

            if (flip) {
                state_[q] = enter.dir > 0 ? VarState::AtUpper : VarState::AtLower;
                value_[q] = enter.dir > 0 ? upper_[q] : lower_[q];
                if (opt_.record_pivots) sol.pivots.emplace_back(q, -1);
                continue;
            }

            const int leaving = basis_[leave_pos];
            allow_unstable_ = false;
            if (rejections_ > 0) {
                std::fill(rejected_.begin(), rejected_.end(), 0);
                rejections_ = 0;
            }
            state_[leaving] = leave_upper ? VarState::AtUpper : VarState::AtLower;
            value_[leaving] = leave_upper ? upper_[leaving] : lower_[leaving];
            basis_[leave_pos] = q;
            state_[q] = VarState::Basic;
            if (opt_.record_pivots) sol.pivots.emplace_back(q, leaving);

            if (++pivots_since_refactor_ >= opt_.refactor_every) {
                refactor();
            } else if (!reduced_) {
                // B^-1 <- B^-1 - (alpha - e_r) (row_r of B^-1) / pivot
                const Eigen::RowVectorXd pivot_row = binv_.row(leave_pos) / alpha[leave_pos];
                Eigen::VectorXd eta = alpha;
                eta[leave_pos] -= 1.0;
                binv_.noalias() -= eta * pivot_row;
            }
        }
    }

    const StandardLp& lp_;
    LpOptions opt_;
    int m_;
    int n_;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> lower_, upper_, cost_, value_;
    std::vector<VarState> state_;
    std::vector<int> basis_;
    bool reduced_ = false;
    Eigen::MatrixXd binv_, kinv_;
    std::vector<int> struct_pos_, free_rows_, row_pos_;
    int pivots_since_refactor_ = 0;
    double pivot_tol_ = 1e-7;
    double rcond_ = 1.0;
    std::vector<char> rejected_;
    int rejections_ = 0;
    bool allow_unstable_ = false;
    bool started_ = false;
    bool bland_ = false;
};

}  // namespace detail

/// Solves an LP with the embedded bounded revised simplex.
inline LpSolution solve_lp(const StandardLp& lp, const LpOptions& options = {}) {
    detail::BoundedSimplex simplex(lp, options);
    return simplex.run();
}

}  // namespace robustkit::lp
