#ifndef V2G_DISPATCH_HPP
#define V2G_DISPATCH_HPP

#include <Eigen/Core>

#include <string>
#include <vector>

#include "v2g/design.hpp"
#include "v2g/fleet_schedule.hpp"
#include "v2g/lp/linear_program.hpp"
#include "v2g/profiles.hpp"

namespace v2g {

struct Charger {
    double power_kw = 11.0;
    bool bidirectional = false;
};

/// Physical plant seen by the dispatcher: one charger per vehicle of the fleet.
struct Plant {
    double pv_peak_kwp = 0.0;
    double e_bess_kwh = 0.0;
    double p_grid_max_kw = 0.0;
    std::vector<Charger> chargers;
};

/// Maps use-case charger choices onto the vehicles of the fleet.
Plant make_plant(const DesignPoint& design, const FleetSchedule& fleet);

struct DispatchSettings {
    double bess_soc_min = 0.05;
    double bess_soc_max = 0.95;
    double bess_c_rate = 0.5;
    double bess_initial_soc = 0.05;
    double vehicle_soc_min = 0.05;
    double vehicle_soc_max = 1.0;
    /// SoC of vehicles already at the depot at Monday 00:00 of the first week.
    double vehicle_initial_soc = 1.0;
    /// EUR/kWh added to energy exchanged beyond the grid limit.
    double slack_penalty = 1000.0;
    /// kW; a run is feasible when no step exceeds the limit by more than this.
    double slack_tolerance = 1e-6;
    /// Merge vehicles with identical schedule, battery, charger and state into one
    /// scaled LP block. Exact for this lossless model; results are split evenly.
    bool aggregate_identical = true;
    /// Attach variable and row names (only useful for MPS dumps).
    bool name_lp = false;
    lp::SolverOptions solver;
};

/// Stored energy at the start of a week. Vehicle entries are NaN for vehicles away
/// from the depot at step 0.
struct InitialState {
    double bess_kwh = 0.0;
    Eigen::VectorXd vehicle_kwh;
};

InitialState first_week_state(const Plant& plant, const FleetSchedule& fleet, const DispatchSettings& settings = {});

/// A week of exogenous inputs already scaled to the plant.
struct WeekInputs {
    TimeGrid grid;
    CivilTime start;
    Eigen::VectorXd buy;
    Eigen::VectorXd feed;
    Eigen::VectorXd pv_kw;
    Eigen::VectorXd house_kw;

    int steps() const { return static_cast<int>(buy.size()); }
};

WeekInputs week_inputs(const ExogenousProfiles& profiles, int week, double pv_peak_kwp);

/// Weekly LP together with the column layout needed to read a solution back.
struct WeeklyLp {
    lp::LinearProgram<double> lp;
    struct Block {
        std::vector<int> members;       // vehicle indices sharing this block
        std::vector<int> power;         // per step, -1 when away
        std::vector<int> energy;        // per instant 0..T, -1 when away
    };
    std::vector<int> grid_p, grid_n, slack_p, slack_n, bess;  // per step; bess -1 without storage
    std::vector<int> bess_energy;                               // per instant 0..T
    std::vector<Block> blocks;
    double bess_initial_kwh = 0.0;
};

/// Throws ConfigurationError when a departure target is out of reach at full charger
/// power, naming the vehicle and step.
WeeklyLp build_weekly_lp(const Plant& plant, const FleetSchedule& fleet, const WeekInputs& inputs,
                         const InitialState& initial, const DispatchSettings& settings = {});

struct WeekResult {
    int week_index = 0;
    WeekInputs inputs;
    Eigen::VectorXd grid_p, grid_n, slack_p, slack_n, bess_kw;  // per step
    Eigen::MatrixXd evse_kw;                                     // vehicle x step
    Eigen::VectorXd soc_bess;                                    // per instant; 0 without storage
    Eigen::MatrixXd soc_vehicle;                                 // vehicle x instant, NaN when away
    double electricity_cost = 0.0;
    double penalty_cost = 0.0;
    double max_slack = 0.0;
    long lp_iterations = 0;

    /// Net import including slack, kW.
    Eigen::VectorXd grid_net() const { return grid_p + grid_n + slack_p - slack_n; }
    /// Largest absolute deviation from the power balance at the grid connection.
    double balance_residual() const;
    InitialState final_state(const Plant& plant, const FleetSchedule& fleet) const;
};

/// Electricity cost of a dispatch: imports at the buy tariff, exports at the feed-in
/// tariff, slack energy included, penalty excluded.
double electricity_cost(const WeekInputs& in, const Eigen::VectorXd& import_kw, const Eigen::VectorXd& export_kw);

/// Solves one week. Throws std::runtime_error when the LP does not reach optimality.
WeekResult optimize_week(const Plant& plant, const FleetSchedule& fleet, const WeekInputs& inputs,
                         const InitialState& initial, const DispatchSettings& settings = {});

struct YearResult {
    std::vector<WeekResult> weeks;
    double total_electricity_cost = 0.0;
    double max_slack = 0.0;
    bool feasible = false;
    long lp_iterations = 0;
};

/// Chains weekly optimizations, carrying stored energy from week to week.
/// `weeks` <= 0 simulates every week the profiles cover.
YearResult simulate_year(const DesignPoint& design, const FleetSchedule& fleet, const ExogenousProfiles& profiles,
                         const DispatchSettings& settings = {}, int weeks = 0);

/// Uncontrolled reference: every vehicle charges at full power from the start of its
/// stay until full, the storage stays idle and PV surplus is exported.
WeekResult baseline_week(const Plant& plant, const FleetSchedule& fleet, const WeekInputs& inputs,
                         const InitialState& initial, const DispatchSettings& settings = {});

YearResult simulate_baseline(const DesignPoint& design, const FleetSchedule& fleet, const ExogenousProfiles& profiles,
                             const DispatchSettings& settings = {}, int weeks = 0);

}  // namespace v2g

#endif  // V2G_DISPATCH_HPP
