#ifndef V2G_BO_OPTIMIZER_HPP
#define V2G_BO_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "v2g/bo/gaussian_process.hpp"
#include "v2g/bo/search_space.hpp"

namespace v2g::bo {

/// EI scaled by the probability of feasibility.
inline double constrained_acquisition(double expected_improvement, double probability_feasible) {
    return expected_improvement * probability_feasible;
}

/// Unstandardized 0/1 labels: signal variance at most that of a label, and length
/// scales floored so single infeasible points do not become isolated spikes.
GpOptions default_feasibility_options();

/// Objective model over feasible observations plus a feasibility model over all of them.
/// The feasibility model regresses 0/1 infeasibility labels around their smoothed mean;
/// P(feasible) is the posterior probability that the latent label stays below one half.
class Surrogates {
public:
    Surrogates(const SearchSpace& space, const GpOptions& objective = {},
               const GpOptions& feasibility = default_feasibility_options());

    /// `encoded` rows are encoded points; `values` are ignored where `feasible` is false.
    void fit(const Eigen::MatrixXd& encoded, const Eigen::VectorXd& values, const std::vector<bool>& feasible);
    /// Objective model only; every point then counts as feasible.
    void fit_unconstrained(const Eigen::MatrixXd& encoded, const Eigen::VectorXd& values);

    bool has_objective() const { return has_objective_; }
    bool has_feasibility() const { return has_feasibility_; }
    /// Best feasible value seen, +inf before the first feasible observation.
    double incumbent() const { return incumbent_; }

    GpPrediction<double> objective(const Eigen::VectorXd& z) const { return objective_.predict(z); }
    double probability_feasible(const Eigen::VectorXd& z) const;
    /// Standard deviation of the feasibility model.
    double feasibility_stddev(const Eigen::VectorXd& z) const;

    /// Unit continuous coordinates of the best few feasible observations.
    const std::vector<Eigen::VectorXd>& best_points() const { return best_points_; }

    const GaussianProcess<double>& objective_model() const { return objective_; }
    const GaussianProcess<double>& feasibility_model() const { return feasibility_; }

private:
    GaussianProcess<double> objective_, feasibility_;
    bool has_objective_ = false, has_feasibility_ = false;
    double label_mean_ = 0.5;
    int continuous_dim_ = 0;
    std::vector<Eigen::VectorXd> best_points_;
    static constexpr std::size_t kIncumbentStarts = 3;
    double incumbent_ = std::numeric_limits<double>::infinity();
};

struct AcquisitionOptions {
    int starts_per_combination = 16;
    double initial_step = 0.25;
    double tolerance = 1e-3;  // final pattern step in unit coordinates
};

enum class AcquisitionMode {
    ConstrainedEi,        // EI x P(feasible)
    Feasibility,          // P(feasible), used before any feasible observation
    UncertaintyFeasible,  // sigma x P(feasible), used when EI vanishes everywhere
};

double acquisition_value(const Surrogates& s, const Eigen::VectorXd& z, AcquisitionMode mode);

struct Proposal {
    Candidate candidate;
    double acquisition = 0.0;
    AcquisitionMode mode = AcquisitionMode::ConstrainedEi;
};

/// Maximizes the acquisition over every categorical combination by multi-start
/// coordinate pattern search in the unit cube. Ties go to the lowest combination index,
/// then to the lexicographically smallest continuous coordinates.
Proposal propose_next(const Surrogates& s, const SearchSpace& space, std::mt19937_64& rng, const AcquisitionOptions& options = {});

struct Evaluation {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool feasible = false;
};

using Evaluator = std::function<Evaluation(const Candidate&)>;

struct BoOptions {
    int budget = 100;
    int n_init = 6;
    std::uint64_t seed = 1;
    GpOptions gp;
    GpOptions feasibility_gp = default_feasibility_options();
    AcquisitionOptions acquisition;
    /// Multiples of the objective scale added to the estimated minimum per unit of
    /// feasibility risk below one half.
    double risk_weight = 2.0;
};

struct BoRecord {
    int iteration = 0;
    Candidate candidate;
    double value = std::numeric_limits<double>::quiet_NaN();  // NaN when infeasible
    bool feasible = false;
    double incumbent = std::numeric_limits<double>::quiet_NaN();
    double estimated_min = std::numeric_limits<double>::quiet_NaN();
    std::string error;  // evaluator failure message, if any
};

struct BoHistory {
    std::vector<BoRecord> records;

    /// Best feasible record, or nullptr.
    const BoRecord* best() const;
};

/// Random initial designs (the optional start first), then model-guided proposals.
/// Evaluator exceptions count as infeasible observations.
BoHistory run_bo(const SearchSpace& space, const Evaluator& evaluate, const BoOptions& options,
                 const std::optional<Candidate>& start = std::nullopt,
                 const std::function<void(const BoRecord&)>& on_record = {});

}  // namespace v2g::bo

#endif  // V2G_BO_OPTIMIZER_HPP
