#ifndef V2G_LP_LINEAR_PROGRAM_HPP
#define V2G_LP_LINEAR_PROGRAM_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2g::lp {

/// minimize c'x  subject to  A x = b,  lower <= x <= upper.
/// Infinite bounds are expressed with +/- infinity().
template <typename Scalar>
struct LinearProgram {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

    Vector objective;
    SparseMatrix eq_matrix;
    Vector eq_rhs;
    Vector lower;
    Vector upper;
    /// Optional, used only for text dumps.
    std::vector<std::string> variable_names;
    std::vector<std::string> constraint_names;

    Eigen::Index num_variables() const { return objective.size(); }
    Eigen::Index num_constraints() const { return eq_rhs.size(); }

    static constexpr Scalar infinity() { return std::numeric_limits<Scalar>::infinity(); }

    /// Throws std::invalid_argument on inconsistent dimensions, crossed bounds or
    /// non-finite coefficients.
    void validate() const {
        const Eigen::Index n = num_variables();
        const Eigen::Index m = num_constraints();
        if (eq_matrix.rows() != m || eq_matrix.cols() != n || lower.size() != n || upper.size() != n)
            throw std::invalid_argument("linear program: dimension mismatch");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!std::isfinite(objective[j])) throw std::invalid_argument("linear program: non-finite objective coefficient");
            if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == infinity() ||
                upper[j] == -infinity())
                throw std::invalid_argument("linear program: invalid bounds on variable " + std::to_string(j));
        }
        for (Eigen::Index i = 0; i < m; ++i)
            if (!std::isfinite(eq_rhs[i])) throw std::invalid_argument("linear program: non-finite right-hand side");
        for (Eigen::Index k = 0; k < eq_matrix.outerSize(); ++k)
            for (typename SparseMatrix::InnerIterator it(eq_matrix, k); it; ++it)
                if (!std::isfinite(it.value())) throw std::invalid_argument("linear program: non-finite matrix entry");
    }

    Scalar evaluate(const Vector& x) const { return objective.dot(x); }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(Status status);

template <typename Scalar>
struct Solution {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Status status = Status::IterationLimit;
    Vector x;
    Scalar objective_value = 0;
    /// Row multipliers y with reduced costs d = c - A'y.
    Vector duals;
    Vector reduced_costs;
    long iterations = 0;
};

struct SolverOptions {
    /// 0 selects 50 * (variables + constraints).
    long max_iterations = 0;
    double feasibility_tol = 1e-7;
    double optimality_tol = 1e-6;
    /// Basis updates between fresh factorizations.
    int refactor_interval = 100;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    int degenerate_switch = 50;
    /// Use Bland's rule from the first iteration.
    bool always_bland = false;
};

/// Quality report for a candidate solution.
template <typename Scalar>
struct Certificate {
    Scalar primal_residual = 0;   // max |A x - b|
    Scalar bound_violation = 0;   // max distance outside [lower, upper]
    Scalar objective = 0;         // c'x
    Scalar dual_bound = 0;        // Lagrangian lower bound from the solution's duals
    Scalar gap = 0;               // objective - dual_bound (>= 0 for feasible x)
    bool primal_feasible = false;

    bool optimal(Scalar rel_tol) const {
        using std::abs;
        using std::max;
        return primal_feasible && gap <= rel_tol * max(Scalar(1), abs(objective));
    }
};

template <typename Scalar>
Certificate<Scalar> verify_optimality(const LinearProgram<Scalar>& lp, const Solution<Scalar>& solution,
                                      const SolverOptions& options = {}) {
    using std::abs;
    using std::max;
    Certificate<Scalar> cert;
    const auto& x = solution.x;
    const auto residual = (lp.eq_matrix * x - lp.eq_rhs).eval();
    cert.primal_residual = residual.size() ? residual.cwiseAbs().maxCoeff() : Scalar(0);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        cert.bound_violation = max(cert.bound_violation, lp.lower[j] - x[j]);
        cert.bound_violation = max(cert.bound_violation, x[j] - lp.upper[j]);
    }
    const Scalar b_scale = Scalar(1) + (lp.eq_rhs.size() ? lp.eq_rhs.cwiseAbs().maxCoeff() : Scalar(0));
    cert.primal_feasible = cert.primal_residual <= Scalar(options.feasibility_tol) * b_scale &&
                           cert.bound_violation <= Scalar(options.feasibility_tol) * b_scale;
    cert.objective = lp.objective.dot(x);

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y = solution.duals;
    if (y.size() != lp.num_constraints()) y.setZero(lp.num_constraints());
    const auto d = (lp.objective - lp.eq_matrix.transpose() * y).eval();
    // L(y) = b'y + sum_j min_{l_j <= x_j <= u_j} d_j x_j
    // Round-off sized multipliers on infinite bounds would make the bound -inf.
    const Scalar c_scale = max(Scalar(1), lp.objective.size() ? lp.objective.cwiseAbs().maxCoeff() : Scalar(0));
    const Scalar d_tiny = Scalar(1e-9) * c_scale;
    Scalar bound = lp.eq_rhs.dot(y);
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        const Scalar side = d[j] > 0 ? lp.lower[j] : lp.upper[j];
        if (d[j] == 0 || (!std::isfinite(side) && abs(d[j]) <= d_tiny)) continue;
        bound += d[j] * side;
    }
    cert.dual_bound = std::isnan(bound) ? -LinearProgram<Scalar>::infinity() : bound;
    cert.gap = cert.objective - cert.dual_bound;
    return cert;
}

/// Incremental assembly of a LinearProgram from triplets.
template <typename Scalar>
class LpBuilder {
public:
    using Vector = typename LinearProgram<Scalar>::Vector;

    int add_variable(Scalar lower, Scalar upper, Scalar cost, std::string name = {}) {
        lower_.push_back(lower);
        upper_.push_back(upper);
        cost_.push_back(cost);
        names_.push_back(std::move(name));
        return static_cast<int>(cost_.size()) - 1;
    }

    int add_row(Scalar rhs, std::string name = {}) {
        rhs_.push_back(rhs);
        row_names_.push_back(std::move(name));
        return static_cast<int>(rhs_.size()) - 1;
    }

    void add_coefficient(int row, int column, Scalar value) { triplets_.emplace_back(row, column, value); }
    void add_rhs(int row, Scalar delta) { rhs_[static_cast<std::size_t>(row)] += delta; }

    Scalar lower(int j) const { return lower_[static_cast<std::size_t>(j)]; }
    Scalar upper(int j) const { return upper_[static_cast<std::size_t>(j)]; }
    int num_variables() const { return static_cast<int>(cost_.size()); }
    int num_rows() const { return static_cast<int>(rhs_.size()); }

    LinearProgram<Scalar> build() const {
        LinearProgram<Scalar> lp;
        const auto n = static_cast<Eigen::Index>(cost_.size());
        const auto m = static_cast<Eigen::Index>(rhs_.size());
        lp.objective = Eigen::Map<const Vector>(cost_.data(), n);
        lp.lower = Eigen::Map<const Vector>(lower_.data(), n);
        lp.upper = Eigen::Map<const Vector>(upper_.data(), n);
        lp.eq_rhs = Eigen::Map<const Vector>(rhs_.data(), m);
        lp.eq_matrix.resize(m, n);
        lp.eq_matrix.setFromTriplets(triplets_.begin(), triplets_.end());
        lp.eq_matrix.makeCompressed();
        lp.variable_names = names_;
        lp.constraint_names = row_names_;
        return lp;
    }

private:
    std::vector<Scalar> lower_, upper_, cost_, rhs_;
    std::vector<std::string> names_, row_names_;
    std::vector<Eigen::Triplet<Scalar>> triplets_;
};

/// Free-format MPS text for cross-checking with external solvers.
template <typename Scalar>
void write_mps(const LinearProgram<Scalar>& lp, std::ostream& out, const std::string& name = "V2GLP") {
    const auto var = [&](Eigen::Index j) {
        const auto k = static_cast<std::size_t>(j);
        return k < lp.variable_names.size() && !lp.variable_names[k].empty() ? lp.variable_names[k] : "X" + std::to_string(j);
    };
    const auto row = [&](Eigen::Index i) {
        const auto k = static_cast<std::size_t>(i);
        return k < lp.constraint_names.size() && !lp.constraint_names[k].empty() ? lp.constraint_names[k] : "R" + std::to_string(i);
    };
    const Eigen::SparseMatrix<Scalar, Eigen::ColMajor> cols = lp.eq_matrix;
    out.precision(17);
    out << "NAME " << name << "\nROWS\n N COST\n";
    for (Eigen::Index i = 0; i < lp.num_constraints(); ++i) out << " E " << row(i) << '\n';
    out << "COLUMNS\n";
    for (Eigen::Index j = 0; j < lp.num_variables(); ++j) {
        if (lp.objective[j] != 0) out << ' ' << var(j) << " COST " << lp.objective[j] << '\n';
        for (typename Eigen::SparseMatrix<Scalar, Eigen::ColMajor>::InnerIterator it(cols, j); it; ++it)
            out << ' ' << var(j) << ' ' << row(it.row()) << ' ' << it.value() << '\n';
    }
    out << "RHS\n";
    for (Eigen::Index i = 0; i < lp.num_constraints(); ++i)
        if (lp.eq_rhs[i] != 0) out << " RHS " << row(i) << ' ' << lp.eq_rhs[i] << '\n';
    out << "BOUNDS\n";
    const Scalar inf = LinearProgram<Scalar>::infinity();
    for (Eigen::Index j = 0; j < lp.num_variables(); ++j) {
        const Scalar lo = lp.lower[j], up = lp.upper[j];
        if (lo == up) {
            out << " FX BND " << var(j) << ' ' << lo << '\n';
        } else if (lo == -inf && up == inf) {
            out << " FR BND " << var(j) << '\n';
        } else {
            if (lo == -inf) out << " MI BND " << var(j) << '\n';
            else if (lo != 0) out << " LO BND " << var(j) << ' ' << lo << '\n';
            if (up != inf) out << " UP BND " << var(j) << ' ' << up << '\n';
        }
    }
    out << "ENDATA\n";
}

}  // namespace v2g::lp

#endif  // V2G_LP_LINEAR_PROGRAM_HPP
