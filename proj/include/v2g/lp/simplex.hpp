#ifndef V2G_LP_SIMPLEX_HPP
#define V2G_LP_SIMPLEX_HPP

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "v2g/lp/linear_program.hpp"

namespace v2g::lp {

/// Revised primal simplex for bounded variables.
///
/// Every row gets a logical column fixed at zero, so the all-logical basis is always
/// available; a triangular crash swaps in structural columns before the first
/// iteration. Phase 1 minimizes the sum of bound infeasibilities of the basic
/// variables, phase 2 the objective. The basis is held as a sparse LU of the last
/// refactorized basis plus a product-form eta file. Harris' two-pass ratio test
/// picks large pivots; after a run of degenerate pivots the solver falls back to
/// Bland's rule until the objective moves again.
template <typename Scalar>
class BoundedSimplex {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using ColMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;

    BoundedSimplex(const LinearProgram<Scalar>& lp, const SolverOptions& options);

    Solution<Scalar> solve();

private:
    enum class State : unsigned char { Basic, AtLower, AtUpper, Free };

    struct Eta {
        Eigen::Index pos;
        Scalar pivot;
        std::vector<Eigen::Index> index;
        std::vector<Scalar> value;
    };

    struct Leaving {
        Eigen::Index pos = -1;
        Scalar theta = std::numeric_limits<Scalar>::infinity();
        Scalar bound = 0;
        State state = State::AtLower;
        bool flip = false;
    };

    Scalar primal_tol() const { return ptol_; }
    bool is_fixed(Eigen::Index j) const { return lo_[j] == up_[j]; }

    void crash();
    bool refactor();
    void reset_to_logical_basis();
    void compute_primal();
    void ftran(Vector& v) const;
    void btran(Vector& w) const;
    bool load_costs(Vector& cb) const;
    Eigen::Index price(const Vector& y, bool phase1, bool bland, Scalar& dq) const;
    Leaving ratio_test(Eigen::Index q, int dir, const Vector& alpha, bool bland) const;
    Scalar nonbasic_value(Eigen::Index j) const;

    const LinearProgram<Scalar>& lp_;
    SolverOptions options_;
    Eigen::Index m_ = 0, n_ = 0;
    ColMatrix a_;
    Vector cost_, lo_, up_, x_;
    std::vector<State> state_;
    std::vector<Eigen::Index> head_;
    std::vector<Eigen::Index> where_;
    mutable Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
    Scalar ptol_ = Scalar(1e-9);
    Scalar dtol_ = Scalar(1e-9);
    Scalar pivot_tol_ = Scalar(1e-9);
    int resets_ = 0;
};

template <typename Scalar>
BoundedSimplex<Scalar>::BoundedSimplex(const LinearProgram<Scalar>& lp, const SolverOptions& options)
    : lp_(lp), options_(options) {
    lp.validate();
    m_ = lp.num_constraints();
    n_ = lp.num_variables();
    a_ = lp.eq_matrix;
    a_.makeCompressed();
    const Eigen::Index total = n_ + m_;
    cost_ = Vector::Zero(total);
    cost_.head(n_) = lp.objective;
    lo_ = Vector::Zero(total);
    up_ = Vector::Zero(total);
    lo_.head(n_) = lp.lower;
    up_.head(n_) = lp.upper;
    x_ = Vector::Zero(total);
    state_.assign(static_cast<std::size_t>(total), State::AtLower);
    head_.resize(static_cast<std::size_t>(m_));
    where_.assign(static_cast<std::size_t>(total), -1);
    const Scalar c_scale = std::max<Scalar>(Scalar(1), n_ ? lp.objective.cwiseAbs().maxCoeff() : Scalar(0));
    dtol_ = Scalar(1e-3) * Scalar(options.optimality_tol) * c_scale;
    ptol_ = Scalar(1e-2) * Scalar(options.feasibility_tol);
}

template <typename Scalar>
Scalar BoundedSimplex<Scalar>::nonbasic_value(Eigen::Index j) const {
    const Scalar inf = LinearProgram<Scalar>::infinity();
    const bool lo_finite = lo_[j] > -inf, up_finite = up_[j] < inf;
    if (lo_finite && up_finite) return std::abs(up_[j]) < std::abs(lo_[j]) ? up_[j] : lo_[j];
    if (lo_finite) return lo_[j];
    if (up_finite) return up_[j];
    return Scalar(0);
}

template <typename Scalar>
void BoundedSimplex<Scalar>::reset_to_logical_basis() {
    for (Eigen::Index j = 0; j < n_; ++j) {
        where_[static_cast<std::size_t>(j)] = -1;
        const Scalar v = nonbasic_value(j);
        x_[j] = v;
        const Scalar inf = LinearProgram<Scalar>::infinity();
        if (lo_[j] == -inf && up_[j] == inf) state_[static_cast<std::size_t>(j)] = State::Free;
        else state_[static_cast<std::size_t>(j)] = (v == lo_[j]) ? State::AtLower : State::AtUpper;
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
        head_[static_cast<std::size_t>(i)] = n_ + i;
        where_[static_cast<std::size_t>(n_ + i)] = i;
        state_[static_cast<std::size_t>(n_ + i)] = State::Basic;
    }
}

// Greedy lower-triangular crash: repeatedly pick a non-fixed column with a single
// nonzero among the rows still covered by logicals.
template <typename Scalar>
void BoundedSimplex<Scalar>::crash() {
    reset_to_logical_basis();
    const Scalar inf = LinearProgram<Scalar>::infinity();
    const auto& rows = lp_.eq_matrix;  // row-major
    std::vector<int> count(static_cast<std::size_t>(n_), 0);
    std::vector<char> row_open(static_cast<std::size_t>(m_), 1);
    std::vector<Scalar> col_max(static_cast<std::size_t>(n_), Scalar(0));
    for (Eigen::Index j = 0; j < n_; ++j)
        for (typename ColMatrix::InnerIterator it(a_, j); it; ++it)
            if (it.value() != 0) {
                ++count[static_cast<std::size_t>(j)];
                col_max[static_cast<std::size_t>(j)] = std::max(col_max[static_cast<std::size_t>(j)], std::abs(it.value()));
            }
    const auto priority = [&](Eigen::Index j) -> Scalar {
        if (lo_[j] == -inf && up_[j] == inf) return Scalar(3);
        if (lo_[j] == -inf || up_[j] == inf) return Scalar(2);
        return Scalar(1) - Scalar(1) / (Scalar(1) + (up_[j] - lo_[j]));
    };

    std::vector<Eigen::Index> candidates;
    for (Eigen::Index j = 0; j < n_; ++j)
        if (count[static_cast<std::size_t>(j)] == 1 && !is_fixed(j)) candidates.push_back(j);
    while (!candidates.empty()) {
        std::stable_sort(candidates.begin(), candidates.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return priority(a) > priority(b); });
        std::vector<Eigen::Index> next;
        for (Eigen::Index j : candidates) {
            if (count[static_cast<std::size_t>(j)] != 1 || where_[static_cast<std::size_t>(j)] >= 0) continue;
            Eigen::Index r = -1;
            Scalar v = 0;
            for (typename ColMatrix::InnerIterator it(a_, j); it; ++it)
                if (it.value() != 0 && row_open[static_cast<std::size_t>(it.row())]) {
                    r = it.row();
                    v = it.value();
                }
            if (r < 0 || std::abs(v) < Scalar(0.1) * col_max[static_cast<std::size_t>(j)]) continue;
            const Eigen::Index logical = n_ + r;
            where_[static_cast<std::size_t>(logical)] = -1;
            state_[static_cast<std::size_t>(logical)] = State::AtLower;
            x_[logical] = 0;
            head_[static_cast<std::size_t>(r)] = j;
            where_[static_cast<std::size_t>(j)] = r;
            state_[static_cast<std::size_t>(j)] = State::Basic;
            row_open[static_cast<std::size_t>(r)] = 0;
            for (typename LinearProgram<Scalar>::SparseMatrix::InnerIterator it(rows, r); it; ++it) {
                const auto k = static_cast<std::size_t>(it.col());
                if (it.value() == 0) continue;
                if (--count[k] == 1 && where_[k] < 0 && !is_fixed(it.col())) next.push_back(it.col());
            }
        }
        candidates.swap(next);
    }
}

template <typename Scalar>
bool BoundedSimplex<Scalar>::refactor() {
    etas_.clear();
    if (m_ == 0) return true;
    std::vector<Eigen::Triplet<Scalar>> triplets;
    triplets.reserve(static_cast<std::size_t>(3 * m_));
    for (Eigen::Index i = 0; i < m_; ++i) {
        const Eigen::Index k = head_[static_cast<std::size_t>(i)];
        if (k >= n_) {
            triplets.emplace_back(k - n_, i, Scalar(1));
        } else {
            for (typename ColMatrix::InnerIterator it(a_, k); it; ++it) triplets.emplace_back(it.row(), i, it.value());
        }
    }
    ColMatrix basis(m_, m_);
    basis.setFromTriplets(triplets.begin(), triplets.end());
    basis.makeCompressed();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    return lu_.info() == Eigen::Success;
}

template <typename Scalar>
void BoundedSimplex<Scalar>::ftran(Vector& v) const {
    if (m_ == 0) return;
    v = lu_.solve(v).eval();
    for (const Eta& e : etas_) {
        const Scalar vr = v[e.pos] / e.pivot;
        v[e.pos] = vr;
        if (vr == 0) continue;
        for (std::size_t k = 0; k < e.index.size(); ++k) v[e.index[k]] -= e.value[k] * vr;
    }
}

template <typename Scalar>
void BoundedSimplex<Scalar>::btran(Vector& w) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        Scalar s = w[it->pos];
        for (std::size_t k = 0; k < it->index.size(); ++k) s -= it->value[k] * w[it->index[k]];
        w[it->pos] = s / it->pivot;
    }
    w = lu_.transpose().solve(w).eval();
}

template <typename Scalar>
void BoundedSimplex<Scalar>::compute_primal() {
    if (m_ == 0) return;
    Vector rhs = lp_.eq_rhs;
    for (Eigen::Index j = 0; j < n_; ++j) {
        if (where_[static_cast<std::size_t>(j)] >= 0 || x_[j] == 0) continue;
        for (typename ColMatrix::InnerIterator it(a_, j); it; ++it) rhs[it.row()] -= it.value() * x_[j];
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
        const Eigen::Index logical = n_ + i;
        if (where_[static_cast<std::size_t>(logical)] < 0) rhs[i] -= x_[logical];
    }
    ftran(rhs);
    for (Eigen::Index i = 0; i < m_; ++i) x_[head_[static_cast<std::size_t>(i)]] = rhs[i];
}

// Fills basic costs; returns true when phase-1 costs were needed.
template <typename Scalar>
bool BoundedSimplex<Scalar>::load_costs(Vector& cb) const {
    cb.resize(m_);
    bool infeasible = false;
    for (Eigen::Index i = 0; i < m_; ++i) {
        const Eigen::Index k = head_[static_cast<std::size_t>(i)];
        if (x_[k] < lo_[k] - ptol_) {
            cb[i] = Scalar(-1);
            infeasible = true;
        } else if (x_[k] > up_[k] + ptol_) {
            cb[i] = Scalar(1);
            infeasible = true;
        } else {
            cb[i] = 0;
        }
    }
    if (!infeasible)
        for (Eigen::Index i = 0; i < m_; ++i) cb[i] = cost_[head_[static_cast<std::size_t>(i)]];
    return infeasible;
}

template <typename Scalar>
Eigen::Index BoundedSimplex<Scalar>::price(const Vector& y, bool phase1, bool bland, Scalar& dq) const {
    const Scalar tol = phase1 ? Scalar(1e-9) : dtol_;
    Eigen::Index best = -1;
    Scalar best_score = 0;
    for (Eigen::Index j = 0; j < n_; ++j) {
        const State s = state_[static_cast<std::size_t>(j)];
        if (s == State::Basic || is_fixed(j)) continue;
        Scalar d = phase1 ? Scalar(0) : cost_[j];
        for (typename ColMatrix::InnerIterator it(a_, j); it; ++it) d -= it.value() * y[it.row()];
        const bool improving = (s == State::AtLower && d < -tol) || (s == State::AtUpper && d > tol) ||
                               (s == State::Free && std::abs(d) > tol);
        if (!improving) continue;
        if (bland) {
            dq = d;
            return j;
        }
        if (std::abs(d) > best_score) {
            best_score = std::abs(d);
            best = j;
            dq = d;
        }
    }
    return best;
}

template <typename Scalar>
typename BoundedSimplex<Scalar>::Leaving BoundedSimplex<Scalar>::ratio_test(Eigen::Index q, int dir, const Vector& alpha,
                                                                          bool bland) const {
    struct Candidate {
        Eigen::Index pos;
        Scalar exact;
        Scalar bound;
        State state;
    };
    const Scalar inf = LinearProgram<Scalar>::infinity();
    std::vector<Candidate> cands;
    Scalar relaxed_min = inf;
    for (Eigen::Index i = 0; i < m_; ++i) {
        const Scalar a = alpha[i];
        if (std::abs(a) <= pivot_tol_) continue;
        const Eigen::Index k = head_[static_cast<std::size_t>(i)];
        const Scalar rate = -Scalar(dir) * a;
        const Scalar xk = x_[k];
        Scalar bound;
        State st;
        if (rate < 0) {
            if (xk < lo_[k] - ptol_) continue;
            if (xk > up_[k] + ptol_) {
                bound = up_[k];
                st = State::AtUpper;
            } else {
                if (lo_[k] == -inf) continue;
                bound = lo_[k];
                st = State::AtLower;
            }
        } else {
            if (xk > up_[k] + ptol_) continue;
            if (xk < lo_[k] - ptol_) {
                bound = lo_[k];
                st = State::AtLower;
            } else {
                if (up_[k] == inf) continue;
                bound = up_[k];
                st = State::AtUpper;
            }
        }
        const Scalar dist = std::abs(xk - bound);
        const bool toward_inside = (rate < 0) ? xk >= bound : xk <= bound;
        const Scalar exact = toward_inside ? dist / std::abs(rate) : Scalar(0);
        const Scalar relaxed = (toward_inside ? dist + ptol_ : ptol_) / std::abs(rate);
        relaxed_min = std::min(relaxed_min, bland ? exact : relaxed);
        cands.push_back({i, exact, bound, st});
    }

    Leaving out;
    if (!cands.empty()) {
        Scalar best_pivot = -1;
        for (const Candidate& c : cands) {
            if (bland) {
                const Eigen::Index var = head_[static_cast<std::size_t>(c.pos)];
                if (out.pos < 0 || c.exact < out.theta - Scalar(1e-12) ||
                    (c.exact <= out.theta + Scalar(1e-12) && var < head_[static_cast<std::size_t>(out.pos)])) {
                    out.pos = c.pos;
                    out.theta = c.exact;
                    out.bound = c.bound;
                    out.state = c.state;
                }
            } else if (c.exact <= relaxed_min) {
                const Scalar piv = std::abs(alpha[c.pos]);
                if (piv > best_pivot) {
                    best_pivot = piv;
                    out.pos = c.pos;
                    out.theta = c.exact;
                    out.bound = c.bound;
                    out.state = c.state;
                }
            }
        }
    }
    const Scalar range = up_[q] - lo_[q];
    if (std::isfinite(range) && range <= out.theta) {
        out.flip = true;
        out.theta = range;
        out.pos = -1;
    }
    return out;
}

template <typename Scalar>
Solution<Scalar> BoundedSimplex<Scalar>::solve() {
    Solution<Scalar> sol;
    const long max_iter = options_.max_iterations > 0 ? options_.max_iterations : 50L * static_cast<long>(n_ + m_) + 1000;

    crash();
    if (!refactor()) {
        reset_to_logical_basis();
        if (!refactor()) throw std::runtime_error("simplex: logical basis failed to factorize");
    }
    compute_primal();

    Vector cb, y, alpha;
    long iter = 0;
    int degenerate_run = 0;
    bool fresh = true;
    bool bland = options_.always_bland;
    while (true) {
        if (iter >= max_iter) {
            sol.status = Status::IterationLimit;
            break;
        }
        const bool phase1 = load_costs(cb);
        y = cb;
        btran(y);
        Scalar dq = 0;
        const Eigen::Index q = price(y, phase1, bland, dq);
        if (q < 0) {
            if (!fresh) {
                if (!refactor()) throw std::runtime_error("simplex: basis refactorization failed");
                compute_primal();
                fresh = true;
                continue;
            }
            sol.status = phase1 ? Status::Infeasible : Status::Optimal;
            break;
        }

        alpha = Vector::Zero(m_);
        for (typename ColMatrix::InnerIterator it(a_, q); it; ++it) alpha[it.row()] = it.value();
        ftran(alpha);
        const State sq = state_[static_cast<std::size_t>(q)];
        const int dir = (sq == State::AtUpper || (sq == State::Free && dq > 0)) ? -1 : +1;
        const Leaving leave = ratio_test(q, dir, alpha, bland);

        if (leave.pos < 0 && !leave.flip) {
            if (!fresh) {
                if (!refactor()) throw std::runtime_error("simplex: basis refactorization failed");
                compute_primal();
                fresh = true;
                continue;
            }
            if (phase1) throw std::runtime_error("simplex: unbounded phase-1 ray");
            sol.status = Status::Unbounded;
            break;
        }

        const Scalar theta = leave.theta;
        if (theta != 0) {
            x_[q] += Scalar(dir) * theta;
            for (Eigen::Index i = 0; i < m_; ++i)
                if (alpha[i] != 0) x_[head_[static_cast<std::size_t>(i)]] -= Scalar(dir) * alpha[i] * theta;
        }
        if (theta <= Scalar(1e-12)) {
            if (++degenerate_run >= options_.degenerate_switch) bland = true;
        } else {
            degenerate_run = 0;
            bland = options_.always_bland;
        }

        if (leave.flip) {
            const bool to_upper = dir > 0;
            state_[static_cast<std::size_t>(q)] = to_upper ? State::AtUpper : State::AtLower;
            x_[q] = to_upper ? up_[q] : lo_[q];
        } else {
            const Eigen::Index r = leave.pos;
            const Eigen::Index k = head_[static_cast<std::size_t>(r)];
            x_[k] = leave.bound;
            state_[static_cast<std::size_t>(k)] = is_fixed(k) ? State::AtLower : leave.state;
            where_[static_cast<std::size_t>(k)] = -1;
            head_[static_cast<std::size_t>(r)] = q;
            where_[static_cast<std::size_t>(q)] = r;
            state_[static_cast<std::size_t>(q)] = State::Basic;

            Eta eta;
            eta.pos = r;
            eta.pivot = alpha[r];
            for (Eigen::Index i = 0; i < m_; ++i)
                if (i != r && alpha[i] != 0) {
                    eta.index.push_back(i);
                    eta.value.push_back(alpha[i]);
                }
            etas_.push_back(std::move(eta));
            if (static_cast<int>(etas_.size()) >= options_.refactor_interval) {
                if (!refactor()) {
                    if (++resets_ > 5) throw std::runtime_error("simplex: repeated singular bases");
                    reset_to_logical_basis();
                    refactor();
                }
                compute_primal();
                fresh = true;
                ++iter;
                continue;
            }
        }
        fresh = false;
        ++iter;
    }

    sol.iterations = iter;
    sol.x = x_.head(n_);
    sol.objective_value = lp_.objective.dot(sol.x);
    if (sol.status == Status::Optimal) {
        sol.duals = y;
        sol.reduced_costs = lp_.objective - lp_.eq_matrix.transpose() * y;
    } else {
        sol.duals = Vector::Zero(m_);
        sol.reduced_costs = Vector::Zero(n_);
    }
    return sol;
}

template <typename Scalar>
Solution<Scalar> solve(const LinearProgram<Scalar>& lp, const SolverOptions& options = {}) {
    lp.validate();
    if (lp.num_constraints() == 0) {
        // Separable: each variable sits at its cheapest bound.
        Solution<Scalar> sol;
        const Eigen::Index n = lp.num_variables();
        sol.x = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
        sol.status = Status::Optimal;
        for (Eigen::Index j = 0; j < n; ++j) {
            const Scalar c = lp.objective[j];
            Scalar v;
            if (c > 0) v = lp.lower[j];
            else if (c < 0) v = lp.upper[j];
            else v = std::isfinite(lp.lower[j]) ? lp.lower[j] : (std::isfinite(lp.upper[j]) ? lp.upper[j] : Scalar(0));
            if (!std::isfinite(v)) {
                sol.status = Status::Unbounded;
                v = 0;
            }
            sol.x[j] = v;
        }
        sol.objective_value = lp.objective.dot(sol.x);
        sol.duals.resize(0);
        sol.reduced_costs = lp.objective;
        return sol;
    }
    BoundedSimplex<Scalar> solver(lp, options);
    return solver.solve();
}

extern template class BoundedSimplex<double>;
extern template Solution<double> solve<double>(const LinearProgram<double>&, const SolverOptions&);

}  // namespace v2g::lp

#endif  // V2G_LP_SIMPLEX_HPP
