#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "mini_depot.hpp"
#include "v2g/dispatch.hpp"
#include "v2g/lp/simplex.hpp"

using namespace v2g;

namespace {

struct Depot {
    TimeGrid grid = build_time_grid(0.25);
    FleetSchedule fleet = expand_schedule(default_use_cases(), grid, 100.0);
    ExogenousProfiles profiles = synthetic_profiles(grid, 3);
};

const Depot& depot() {
    static const Depot d;
    return d;
}

DesignPoint bidi_design() { return {133.9, 99.0, 69.4, {1, 1, 1}}; }

// One-step or few-step week without vehicles.
WeekInputs flat_inputs(int steps, double buy, double feed, double house, double pv) {
    WeekInputs in;
    in.grid = TimeGrid{0.25, steps, 0};
    in.buy = Eigen::VectorXd::Constant(steps, buy);
    in.feed = Eigen::VectorXd::Constant(steps, feed);
    in.house_kw = Eigen::VectorXd::Constant(steps, house);
    in.pv_kw = Eigen::VectorXd::Constant(steps, pv);
    return in;
}

void check_contracts(const WeekResult& r, const Plant& plant, const FleetSchedule& fleet) {
    CHECK(r.balance_residual() <= 1e-6);
    CHECK(r.grid_p.minCoeff() >= -1e-9);
    CHECK(r.grid_n.maxCoeff() <= 1e-9);
    CHECK(r.grid_p.maxCoeff() <= plant.p_grid_max_kw + 1e-9);
    CHECK(r.slack_p.minCoeff() >= -1e-9);
    CHECK(r.slack_n.minCoeff() >= -1e-9);
    if (plant.e_bess_kwh > 0) {
        CHECK(r.soc_bess.minCoeff() >= 0.05 - 1e-9);
        CHECK(r.soc_bess.maxCoeff() <= 0.95 + 1e-9);
        CHECK(r.bess_kw.cwiseAbs().maxCoeff() <= 0.5 * plant.e_bess_kwh + 1e-9);
    } else {
        CHECK(r.bess_kw.cwiseAbs().maxCoeff() == 0.0);
    }
    for (std::size_t i = 0; i < fleet.vehicles.size(); ++i) {
        const auto& v = fleet.vehicles[i];
        const auto row = static_cast<Eigen::Index>(i);
        for (int t = 0; t < r.inputs.steps(); ++t) {
            if (!v.is_present(t)) CHECK(r.evse_kw(row, t) == 0.0);
            if (!plant.chargers[i].bidirectional) CHECK(r.evse_kw(row, t) >= -1e-9);
            CHECK(std::abs(r.evse_kw(row, t)) <= plant.chargers[i].power_kw + 1e-9);
        }
        for (const auto& d : v.departures) CHECK(r.soc_vehicle(row, d.step) == doctest::Approx(1.0).epsilon(1e-6));
        for (const auto& a : v.arrivals) CHECK(r.soc_vehicle(row, a.step) == doctest::Approx(0.05).epsilon(1e-9));
    }
}

}  // namespace

TEST_CASE("a lone house step buys its load") {
    FleetSchedule empty;
    empty.grid = TimeGrid{0.25, 1, 0};
    Plant plant{0.0, 0.0, 69.4, {}};
    const auto in = flat_inputs(1, 0.2, 0.18, 5.0, 0.0);
    InitialState st;
    const auto r = optimize_week(plant, empty, in, st);
    CHECK(r.electricity_cost == doctest::Approx(0.25));
    CHECK(r.grid_p[0] == doctest::Approx(5.0));
    CHECK(r.max_slack == 0.0);
}

TEST_CASE("weak grid without storage cannot charge the fleet") {
    const auto& d = depot();
    const DesignPoint weak{0.0, 0.0, 20.0, {0, 0, 0}};
    const auto y = simulate_year(weak, d.fleet, d.profiles, {}, 1);
    CHECK_FALSE(y.feasible);
    CHECK(y.max_slack > 1.0);
    // The hard departure targets still hold; only the grid limit gives way.
    check_contracts(y.weeks[0], make_plant(weak, d.fleet), d.fleet);
}

TEST_CASE("flat tariff makes cost equal to energy demand") {
    const auto& d = depot();
    const DesignPoint design{0.0, 40.0, 300.0, {1, 1, 1}};
    const Plant plant = make_plant(design, d.fleet);
    WeekInputs in = week_inputs(d.profiles, 0, 0.0);
    const double price = 0.17;
    in.buy.setConstant(price);
    in.feed.setConstant(0.9 * price);
    const auto st = first_week_state(plant, d.fleet);
    const auto r = optimize_week(plant, d.fleet, in, st);
    // Energy the vehicles must take on: every stay ends full, arrivals are at 5 %.
    double vehicle_kwh = 0.0;
    for (const auto& v : d.fleet.vehicles) {
        const double E = v.battery_capacity_kwh;
        for (int k = 0; k < in.steps(); ++k) {
            const bool starts = v.is_present(k) && (k == 0 || !v.is_present(k - 1));
            if (!starts) continue;
            const bool carried = k == 0 && std::none_of(v.arrivals.begin(), v.arrivals.end(), [](const ArrivalEvent& a) { return a.step == 0; });
            vehicle_kwh += E - (carried ? 1.0 : 0.05) * E;
        }
    }
    const double house_kwh = in.house_kw.sum() * 0.25;
    CHECK(r.electricity_cost == doctest::Approx(price * (house_kwh + vehicle_kwh)).epsilon(1e-9));
}

TEST_CASE("import and export never coincide at positive prices") {
    const auto& d = depot();
    const auto y = simulate_year(bidi_design(), d.fleet, d.profiles, {}, 3);
    for (const auto& w : y.weeks) {
        REQUIRE(w.inputs.buy.minCoeff() > 0.0);
        CHECK(w.grid_p.cwiseMin(-w.grid_n).maxCoeff() <= 1e-6);
    }
}

TEST_CASE("free electricity costs nothing") {
    const auto& d = depot();
    const Plant plant = make_plant(bidi_design(), d.fleet);
    WeekInputs in = week_inputs(d.profiles, 1, 0.0);
    in.buy.setZero();
    in.feed.setZero();
    const auto r = optimize_week(plant, d.fleet, in, first_week_state(plant, d.fleet));
    CHECK(r.electricity_cost == 0.0);
}

TEST_CASE("two-step arbitrage matches enumeration") {
    // One idle bidirectional vehicle at its SoC floor; trades only if selling beats buying.
    const auto enumerate = [](double p1, double p2, double f1, double f2) {
        double best = 1e300;
        for (int a = -55; a <= 55; ++a)      // kWh moved in step 1, 0.1 kWh resolution
            for (int b = -55; b <= 55; ++b) {  // step 2
                const double e1 = 5.0 + 0.1 * a, e2 = e1 + 0.1 * b;
                if (e1 < 5.0 - 1e-9 || e1 > 100.0 || e2 < 5.0 - 1e-9 || e2 > 100.0) continue;
                const double c1 = a > 0 ? 0.1 * a * p1 : 0.1 * a * f1;
                const double c2 = b > 0 ? 0.1 * b * p2 : 0.1 * b * f2;
                best = std::min(best, c1 + c2);
            }
        return best;
    };
    for (double second : {0.4, 0.105}) {
        FleetSchedule fleet;
        fleet.grid = TimeGrid{0.25, 2, 0};
        fleet.use_case_ids = {"UC"};
        Vehicle v;
        v.id = "toy_1";
        v.present = {true, true};
        fleet.vehicles = {v};
        Plant plant{0.0, 0.0, 500.0, {{22.0, true}}};
        WeekInputs in = flat_inputs(2, 0.1, 0.09, 0.0, 0.0);
        in.buy[1] = second;
        in.feed[1] = 0.9 * second;
        InitialState st{0.0, Eigen::VectorXd::Constant(1, 5.0)};
        const auto r = optimize_week(plant, fleet, in, st);
        CAPTURE(second);
        CHECK(r.electricity_cost == doctest::Approx(enumerate(0.1, second, 0.09, 0.9 * second)).epsilon(1e-9));
        if (0.9 * second > 0.1) {
            CHECK(r.evse_kw(0, 0) == doctest::Approx(22.0));
            CHECK(r.evse_kw(0, 1) == doctest::Approx(-22.0));
        } else {
            CHECK(r.evse_kw.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("mini depots agree with the dynamic programme") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = testing::random_mini_depot(rng);
        const auto dp = oracle::dp_search(d);
        REQUIRE(std::isfinite(dp.best));
        const auto m = testing::to_model(d);
        const auto r = optimize_week(m.plant, m.fleet, m.inputs, m.initial);
        CAPTURE(trial);
        CHECK(r.electricity_cost <= dp.best + 1e-9);
        CHECK(r.electricity_cost >= dp.best - dp.discretization_bound - 1e-9);
        CHECK(r.soc_vehicle(0, 7) == doctest::Approx(1.0));
    }
}

TEST_CASE("scaling every price scales the cost and keeps the dispatch optimal") {
    const auto& d = depot();
    const Plant plant = make_plant(bidi_design(), d.fleet);
    const auto in = week_inputs(d.profiles, 0, plant.pv_peak_kwp);
    auto doubled = in;
    doubled.buy *= 2.0;
    doubled.feed *= 2.0;
    const auto st = first_week_state(plant, d.fleet);
    const auto a = optimize_week(plant, d.fleet, in, st);
    const auto b = optimize_week(plant, d.fleet, doubled, st);
    CHECK(b.electricity_cost == doctest::Approx(2.0 * a.electricity_cost).epsilon(1e-9));
    CHECK(electricity_cost(doubled, a.grid_p + a.slack_p, a.slack_n - a.grid_n) == doctest::Approx(b.electricity_cost).epsilon(1e-9));
}

TEST_CASE("removing storage never lowers the cost") {
    const auto& d = depot();
    auto with = bidi_design();
    auto without = with;
    without.e_bess_kwh = 0.0;
    without.p_grid_max_kw = 300.0;
    with.p_grid_max_kw = 300.0;
    const auto a = simulate_year(with, d.fleet, d.profiles, {}, 2);
    const auto b = simulate_year(without, d.fleet, d.profiles, {}, 2);
    CHECK(a.total_electricity_cost <= b.total_electricity_cost + 1e-9);
}

TEST_CASE("aggregating identical vehicles is exact") {
    const auto& d = depot();
    DispatchSettings split;
    split.aggregate_identical = false;
    const auto a = simulate_year(bidi_design(), d.fleet, d.profiles, {}, 2);
    const auto b = simulate_year(bidi_design(), d.fleet, d.profiles, split, 2);
    CHECK(a.total_electricity_cost == doctest::Approx(b.total_electricity_cost).epsilon(1e-9));
    CHECK(a.feasible == b.feasible);
    check_contracts(b.weeks[1], make_plant(bidi_design(), d.fleet), d.fleet);
}

TEST_CASE("weekly contracts over a chained run") {
    const auto& d = depot();
    for (const auto& design : {bidi_design(), DesignPoint{20.0, 0.0, 120.0, {0, 2, 5}}}) {
        const auto y = simulate_year(design, d.fleet, d.profiles, {}, 3);
        CHECK(y.feasible);
        CHECK(y.max_slack == 0.0);
        const Plant plant = make_plant(design, d.fleet);
        for (const auto& w : y.weeks) check_contracts(w, plant, d.fleet);
        // Week boundaries carry stored energy over unchanged.
        for (std::size_t k = 1; k < y.weeks.size(); ++k) {
            CHECK(y.weeks[k].soc_bess[0] == doctest::Approx(y.weeks[k - 1].soc_bess[672]));
            for (Eigen::Index i = 0; i < 10; ++i) {
                const double prev = y.weeks[k - 1].soc_vehicle(i, 672), now = y.weeks[k].soc_vehicle(i, 0);
                if (!std::isnan(prev) && !std::isnan(now)) CHECK(now == doctest::Approx(prev));
            }
        }
    }
}

TEST_CASE("controlled charging beats the uncontrolled baseline") {
    const auto& d = depot();
    const auto opt = simulate_year(bidi_design(), d.fleet, d.profiles, {}, 2);
    const auto base = simulate_baseline(bidi_design(), d.fleet, d.profiles, {}, 2);
    CHECK(opt.total_electricity_cost < base.total_electricity_cost);
    for (const auto& w : base.weeks) {
        CHECK(w.balance_residual() <= 1e-9);
        for (std::size_t i = 0; i < d.fleet.vehicles.size(); ++i)
            for (const auto& dep : d.fleet.vehicles[i].departures)
                CHECK(w.soc_vehicle(static_cast<Eigen::Index>(i), dep.step) == doctest::Approx(1.0));
        CHECK(w.evse_kw.minCoeff() >= 0.0);
    }
}

TEST_CASE("unreachable departure names the vehicle and step") {
    const auto& d = depot();
    Plant plant = make_plant(bidi_design(), d.fleet);
    plant.chargers[6].power_kw = 1.0;  // first UC2 vehicle: 11 h stays, 95 kWh to refill
    const auto in = week_inputs(d.profiles, 0, plant.pv_peak_kwp);
    DispatchSettings no_merge;
    no_merge.aggregate_identical = false;
    try {
        optimize_week(plant, d.fleet, in, first_week_state(plant, d.fleet), no_merge);
        FAIL("expected a configuration error");
    } catch (const ConfigurationError& e) {
        const std::string what = e.what();
        CHECK(what.find("uc2_1") != std::string::npos);
        CHECK(what.find("step 128") != std::string::npos);
    }
    CHECK_THROWS_AS(make_plant(DesignPoint{0, 0, 50, {0, 0}}, d.fleet), ConfigurationError);
}

TEST_CASE("weekly LP dumps as MPS") {
    const auto m = testing::to_model(testing::random_mini_depot(*std::make_unique<std::mt19937_64>(1)));
    DispatchSettings named;
    named.name_lp = true;
    const auto model = build_weekly_lp(m.plant, m.fleet, m.inputs, m.initial, named);
    std::ostringstream out;
    lp::write_mps(model.lp, out);
    CHECK(out.str().find("grid_p_0") != std::string::npos);
    CHECK(out.str().find("mini_1_e_7") != std::string::npos);
    CHECK(model.lp.num_constraints() == 8 + 8 + 7);
}
