#ifndef V2G_TESTS_MINI_DEPOT_HPP
#define V2G_TESTS_MINI_DEPOT_HPP

#include <random>

#include "oracles/dispatch_dp_oracle.hpp"
#include "v2g/dispatch.hpp"

namespace testing {

inline oracle::MiniDepot random_mini_depot(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> price(0.02, 0.40), load(-15.0, 15.0);
    oracle::MiniDepot d;
    d.vehicle_steps = 7;
    for (int t = 0; t < 8; ++t) {
        d.buy.push_back(price(rng));
        d.feed.push_back(0.9 * d.buy.back());
        d.net_load.push_back(load(rng));
    }
    return d;
}

// The same depot expressed through the dispatch model.
struct MiniModel {
    v2g::Plant plant;
    v2g::FleetSchedule fleet;
    v2g::WeekInputs inputs;
    v2g::InitialState initial;
};

inline MiniModel to_model(const oracle::MiniDepot& d) {
    const int T = static_cast<int>(d.buy.size());
    MiniModel m;
    m.plant.e_bess_kwh = 2.0 * d.bess_power;  // C-rate 0.5
    m.plant.p_grid_max_kw = 1000.0;
    m.plant.chargers = {{d.ev_power, true}};
    m.fleet.grid = v2g::TimeGrid{d.dt, T, 0};
    m.fleet.use_case_ids = {"UC"};
    v2g::Vehicle v;
    v.id = "mini_1";
    v.battery_capacity_kwh = d.ev_max;
    v.present.assign(static_cast<std::size_t>(T), false);
    for (int t = 0; t < d.vehicle_steps; ++t) v.present[static_cast<std::size_t>(t)] = true;
    v.departures = {{d.vehicle_steps, d.ev_target / d.ev_max}};
    m.fleet.vehicles = {v};
    m.inputs.grid = m.fleet.grid;
    m.inputs.buy = Eigen::Map<const Eigen::VectorXd>(d.buy.data(), T);
    m.inputs.feed = Eigen::Map<const Eigen::VectorXd>(d.feed.data(), T);
    m.inputs.house_kw = Eigen::Map<const Eigen::VectorXd>(d.net_load.data(), T).cwiseMax(0.0);
    m.inputs.pv_kw = (-Eigen::Map<const Eigen::VectorXd>(d.net_load.data(), T)).cwiseMax(0.0);
    m.initial.bess_kwh = d.bess_start;
    m.initial.vehicle_kwh = Eigen::VectorXd::Constant(1, d.ev_start);
    return m;
}

}  // namespace testing

#endif  // V2G_TESTS_MINI_DEPOT_HPP
