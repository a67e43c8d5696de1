#include "v2g/bo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace v2g::bo {

template class GaussianProcess<double>;

namespace {

bool lexicographic_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

Candidate random_candidate(const SearchSpace& space, std::mt19937_64& rng) {
    Candidate c;
    c.continuous.resize(space.continuous_dim());
    for (int d = 0; d < space.continuous_dim(); ++d)
        c.continuous[d] = std::uniform_real_distribution<double>(space.lower[d], space.upper[d])(rng);
    for (int n : space.categories) c.categorical.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
    return c;
}

}  // namespace

GpOptions default_feasibility_options() {
    GpOptions o;
    o.standardize = false;
    o.length_scale_min = 0.3;
    o.signal_variance_max = 0.25;
    return o;
}

Surrogates::Surrogates(const SearchSpace& space, const GpOptions& objective, const GpOptions& feasibility)
    : objective_(space.length_scale_groups(), objective),
      feasibility_(space.length_scale_groups(), feasibility),
      continuous_dim_(space.continuous_dim()) {}

void Surrogates::fit(const Eigen::MatrixXd& encoded, const Eigen::VectorXd& values, const std::vector<bool>& feasible) {
    const Eigen::Index n = encoded.rows();
    has_feasibility_ = n > 0;
    has_objective_ = false;
    best_points_.clear();
    incumbent_ = std::numeric_limits<double>::infinity();
    if (n == 0) return;
    Eigen::VectorXd labels(n);
    std::vector<Eigen::Index> ok;
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool f = feasible[static_cast<std::size_t>(i)];
        labels[i] = f ? 0.0 : 1.0;
        if (f) {
            ok.push_back(i);
            incumbent_ = std::min(incumbent_, values[i]);
        }
    }
    // Prior mean is the infeasible rate shrunk toward one half, so unexplored regions
    // neither look certain nor default to a coin flip.
    label_mean_ = (labels.sum() + 0.5) / (static_cast<double>(n) + 1.0);
    feasibility_.fit(encoded, (labels.array() - label_mean_).matrix());
    if (ok.empty()) return;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(ok.size()), encoded.cols());
    Eigen::VectorXd y(static_cast<Eigen::Index>(ok.size()));
    for (std::size_t k = 0; k < ok.size(); ++k) {
        X.row(static_cast<Eigen::Index>(k)) = encoded.row(ok[k]);
        y[static_cast<Eigen::Index>(k)] = values[ok[k]];
    }
    objective_.fit(X, y);
    has_objective_ = true;
    std::stable_sort(ok.begin(), ok.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
    for (std::size_t k = 0; k < ok.size() && k < kIncumbentStarts; ++k)
        best_points_.push_back(encoded.row(ok[k]).head(continuous_dim_).transpose());
}

void Surrogates::fit_unconstrained(const Eigen::MatrixXd& encoded, const Eigen::VectorXd& values) {
    fit(encoded, values, std::vector<bool>(static_cast<std::size_t>(encoded.rows()), true));
    has_feasibility_ = false;
}

double Surrogates::probability_feasible(const Eigen::VectorXd& z) const {
    if (!has_feasibility_) return 1.0;
    const auto p = feasibility_.predict(z);
    const double margin = 0.5 - (label_mean_ + p.mean);
    const double sd = p.stddev();
    if (!(sd > 1e-12)) return margin > 0 ? 1.0 : (margin < 0 ? 0.0 : 0.5);
    return normal_cdf(margin / sd);
}

double Surrogates::feasibility_stddev(const Eigen::VectorXd& z) const {
    return has_feasibility_ ? feasibility_.predict(z).stddev() : 1.0;
}

double acquisition_value(const Surrogates& s, const Eigen::VectorXd& z, AcquisitionMode mode) {
    switch (mode) {
        case AcquisitionMode::ConstrainedEi: {
            const auto p = s.objective(z);
            return constrained_acquisition(expected_improvement(p.mean, p.stddev(), s.incumbent()), s.probability_feasible(z));
        }
        case AcquisitionMode::Feasibility:
            return s.probability_feasible(z);
        case AcquisitionMode::UncertaintyFeasible: {
            const double sigma = s.has_objective() ? s.objective(z).stddev() : s.feasibility_stddev(z);
            return sigma * s.probability_feasible(z);
        }
    }
    return 0.0;
}

Proposal propose_next(const Surrogates& s, const SearchSpace& space, std::mt19937_64& rng, const AcquisitionOptions& opt) {
    const int dim = space.continuous_dim();
    const int combos = space.combination_count();
    const int starts = dim > 0 ? std::max(1, opt.starts_per_combination) : 1;
    // Draw every start up front so the fallback pass sees the same ones.
    std::vector<Eigen::VectorXd> start_points(static_cast<std::size_t>(combos) * static_cast<std::size_t>(starts));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& p : start_points) {
        p.resize(dim);
        for (int d = 0; d < dim; ++d) p[d] = unit(rng);
    }
    // Best observed points seed extra starts; the acquisition peak next to the incumbent is narrow.
    const std::vector<Eigen::VectorXd> seeded = dim > 0 ? s.best_points() : std::vector<Eigen::VectorXd>{};

    const auto climb = [&](const auto& f, Eigen::VectorXd& x, double& fx) {
        for (double step = opt.initial_step; dim > 0 && step >= opt.tolerance;) {
            bool moved = false;
            for (int d = 0; d < dim; ++d)
                for (double sign : {1.0, -1.0}) {
                    Eigen::VectorXd y = x;
                    y[d] = std::clamp(x[d] + sign * step, 0.0, 1.0);
                    if (y[d] == x[d]) continue;
                    const double fy = f(y);
                    if (fy > fx) {
                        x = std::move(y);
                        fx = fy;
                        moved = true;
                    }
                }
            if (!moved) step *= 0.5;
        }
    };

    const auto search = [&](AcquisitionMode mode) {
        Proposal best;
        best.mode = mode;
        best.acquisition = -std::numeric_limits<double>::infinity();
        int best_combo = -1;
        Eigen::VectorXd best_x;
        for (int c = 0; c < combos; ++c) {
            const std::vector<int> cat = space.combination(c);
            const auto f = [&](const Eigen::VectorXd& u) { return acquisition_value(s, space.encode_unit(u, cat), mode); };
            const auto run = [&](Eigen::VectorXd x) {
                double fx = f(x);
                climb(f, x, fx);
                const bool better = fx > best.acquisition ||
                                    (fx == best.acquisition && c == best_combo && lexicographic_less(x, best_x));
                if (better) {
                    best.acquisition = fx;
                    best_combo = c;
                    best_x = std::move(x);
                }
            };
            for (int k = 0; k < starts; ++k)
                run(start_points[static_cast<std::size_t>(c) * static_cast<std::size_t>(starts) + static_cast<std::size_t>(k)]);
            for (const auto& x : seeded) run(x);
        }
        Candidate cand;
        cand.continuous = space.lower + (space.upper - space.lower).cwiseProduct(best_x);
        cand.categorical = space.combination(best_combo);
        best.candidate = std::move(cand);
        return best;
    };

    const AcquisitionMode primary = s.has_objective() ? AcquisitionMode::ConstrainedEi : AcquisitionMode::Feasibility;
    Proposal p = search(primary);
    if (!(p.acquisition > 0.0)) p = search(AcquisitionMode::UncertaintyFeasible);
    return p;
}

const BoRecord* BoHistory::best() const {
    const BoRecord* out = nullptr;
    for (const auto& r : records)
        if (r.feasible && (!out || r.value < out->value)) out = &r;
    return out;
}

BoHistory run_bo(const SearchSpace& space, const Evaluator& evaluate, const BoOptions& opt, const std::optional<Candidate>& start,
                 const std::function<void(const BoRecord&)>& on_record) {
    space.validate();
    if (opt.budget < 1 || opt.n_init < 1 || opt.budget < opt.n_init)
        throw ConfigurationError("optimizer needs 1 <= n_init <= budget");
    std::mt19937_64 rng(opt.seed);
    Surrogates models(space, opt.gp, opt.feasibility_gp);
    BoHistory history;
    Eigen::MatrixXd encoded(0, space.encoded_dim());
    Eigen::VectorXd values(0);
    std::vector<bool> feasible;
    double incumbent = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= opt.budget; ++it) {
        BoRecord rec;
        rec.iteration = it;
        if (it == 1 && start) {
            rec.candidate = *start;
        } else if (it <= opt.n_init) {
            rec.candidate = random_candidate(space, rng);
        } else {
            rec.candidate = propose_next(models, space, rng, opt.acquisition).candidate;
        }
        const Eigen::VectorXd z = space.encode(rec.candidate);
        try {
            const Evaluation e = evaluate(rec.candidate);
            rec.feasible = e.feasible && std::isfinite(e.value);
            rec.value = e.value;
        } catch (const std::exception& ex) {
            rec.feasible = false;
            rec.error = ex.what();
        }
        if (rec.feasible) incumbent = std::min(incumbent, rec.value);
        rec.incumbent = std::isfinite(incumbent) ? incumbent : std::numeric_limits<double>::quiet_NaN();

        encoded.conservativeResize(encoded.rows() + 1, Eigen::NoChange);
        encoded.row(encoded.rows() - 1) = z.transpose();
        values.conservativeResize(values.size() + 1);
        values[values.size() - 1] = rec.feasible ? rec.value : 0.0;
        feasible.push_back(rec.feasible);
        models.fit(encoded, values, feasible);

        if (models.has_objective()) {
            const double scale = models.objective_model().target_scale();
            double est = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < encoded.rows(); ++i) {
                const Eigen::VectorXd zi = encoded.row(i).transpose();
                const double risk = std::max(0.0, 0.5 - models.probability_feasible(zi));
                est = std::min(est, models.objective(zi).mean + opt.risk_weight * risk * scale);
            }
            rec.estimated_min = est;
        }
        history.records.push_back(rec);
        if (on_record) on_record(history.records.back());
    }
    return history;
}

}  // namespace v2g::bo
