#ifndef V2G_APP_STUDY_HPP
#define V2G_APP_STUDY_HPP

#include <functional>
#include <vector>

#include "v2g/app/config.hpp"
#include "v2g/bo/optimizer.hpp"
#include "v2g/cost_model.hpp"
#include "v2g/dispatch.hpp"

namespace v2g::app {

/// Configuration plus the schedule and exogenous series it refers to.
struct Study {
    RunConfig config;
    TimeGrid grid;
    FleetSchedule fleet;
    ExogenousProfiles profiles;

    int weeks() const { return profiles.weeks; }
    std::vector<int> vehicles_per_use_case() const;
};

/// Loads or synthesizes the series. `weeks` > 0 truncates the horizon.
Study prepare_study(const RunConfig& config, int weeks = 0);

struct Assessment {
    DesignPoint design;
    YearResult year;
    CostBreakdown cost;
    bool feasible = false;
    bool baseline = false;
};

/// Simulates a design (optimized dispatch, or the uncontrolled reference) and prices it.
Assessment assess(const Study& study, const DesignPoint& design, bool baseline = false);

/// Objective of the sizing problem: total cost, feasible when the grid limit holds.
bo::Evaluator design_evaluator(const Study& study);

bo::BoOptions bo_options(const OptimizerConfig& config);

/// Runs the optimizer from the configured start design.
bo::BoHistory optimize_design(const Study& study, const std::function<void(const bo::BoRecord&)>& on_record = {});

}  // namespace v2g::app

#endif  // V2G_APP_STUDY_HPP
