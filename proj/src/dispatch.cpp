#include "v2g/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "v2g/lp/simplex.hpp"

namespace v2g {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// A contiguous run of steps [begin, end) at the depot.
struct Stay {
    int begin = 0;
    int end = 0;
    bool carried = false;     // starts with last week's energy
    double start_soc = 0.05;  // when not carried
    bool departs = false;     // ends with a departure inside the week
    double target_soc = 1.0;
};

std::vector<Stay> stays_of(const Vehicle& v, int steps, const DispatchSettings& s) {
    std::vector<Stay> out;
    const auto present = [&](int k) { return v.present[static_cast<std::size_t>(k)]; };
    for (int k = 0; k < steps; ++k) {
        if (!present(k) || (k > 0 && present(k - 1))) continue;
        Stay stay;
        stay.begin = k;
        const auto arrival = std::find_if(v.arrivals.begin(), v.arrivals.end(), [&](const ArrivalEvent& a) { return a.step == k; });
        stay.carried = k == 0 && arrival == v.arrivals.end();
        stay.start_soc = arrival != v.arrivals.end() ? arrival->soc : s.vehicle_soc_min;
        int e = k;
        while (e < steps && present(e)) ++e;
        stay.end = e;
        stay.departs = e < steps;
        if (stay.departs) {
            const auto dep = std::find_if(v.departures.begin(), v.departures.end(), [&](const DepartureEvent& d) { return d.step == e; });
            stay.target_soc = dep != v.departures.end() ? dep->soc : s.vehicle_soc_max;
        } else if (!v.departures.empty()) {
            stay.target_soc = v.departures.front().soc;
        }
        out.push_back(stay);
    }
    return out;
}

bool same_state(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool identical(const Vehicle& a, const Vehicle& b, const Charger& ca, const Charger& cb, double ea, double eb) {
    if (a.present != b.present || a.battery_capacity_kwh != b.battery_capacity_kwh) return false;
    if (ca.power_kw != cb.power_kw || ca.bidirectional != cb.bidirectional || !same_state(ea, eb)) return false;
    if (a.arrivals.size() != b.arrivals.size() || a.departures.size() != b.departures.size()) return false;
    for (std::size_t i = 0; i < a.arrivals.size(); ++i)
        if (a.arrivals[i].step != b.arrivals[i].step || a.arrivals[i].soc != b.arrivals[i].soc) return false;
    for (std::size_t i = 0; i < a.departures.size(); ++i)
        if (a.departures[i].step != b.departures[i].step || a.departures[i].soc != b.departures[i].soc) return false;
    return true;
}

std::string when(const WeekInputs& in, int step) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "step %d (%s %02d:%02d)", step, weekday_name(in.grid.weekday_of(step)),
                  static_cast<int>(in.grid.hour_of_day(step)),
                  static_cast<int>(std::lround(in.grid.hour_of_day(step) * 60.0)) % 60);
    return buf;
}

void check_fleet(const Plant& plant, const FleetSchedule& fleet, const WeekInputs& in) {
    if (plant.chargers.size() != fleet.vehicles.size())
        throw ConfigurationError("plant has " + std::to_string(plant.chargers.size()) + " chargers for " +
                                 std::to_string(fleet.vehicles.size()) + " vehicles");
    const int T = in.steps();
    if (in.feed.size() != T || in.pv_kw.size() != T || in.house_kw.size() != T)
        throw std::invalid_argument("week inputs have inconsistent lengths");
    for (const auto& v : fleet.vehicles)
        if (static_cast<int>(v.present.size()) != T)
            throw std::invalid_argument("vehicle " + v.id + ": presence mask does not match the week length");
    if (!(plant.e_bess_kwh >= 0.0) || !(plant.p_grid_max_kw >= 0.0)) throw ConfigurationError("negative plant size");
}

}  // namespace

Plant make_plant(const DesignPoint& design, const FleetSchedule& fleet) {
    if (design.evse_choice.size() != fleet.use_case_ids.size())
        throw ConfigurationError("design lists " + std::to_string(design.evse_choice.size()) + " EVSE choices for " +
                                 std::to_string(fleet.use_case_ids.size()) + " use cases");
    Plant p;
    p.pv_peak_kwp = design.p_pv_peak_kwp;
    p.e_bess_kwh = design.e_bess_kwh;
    p.p_grid_max_kw = design.p_grid_max_kw;
    for (const auto& v : fleet.vehicles) {
        const int choice = design.evse_choice.at(static_cast<std::size_t>(v.use_case));
        evse_option_name(choice);
        const auto& o = evse_options()[static_cast<std::size_t>(choice)];
        p.chargers.push_back({o.power_kw, o.bidirectional});
    }
    return p;
}

InitialState first_week_state(const Plant& plant, const FleetSchedule& fleet, const DispatchSettings& s) {
    InitialState st;
    st.bess_kwh = s.bess_initial_soc * plant.e_bess_kwh;
    st.vehicle_kwh = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fleet.vehicles.size()), kNaN);
    for (std::size_t i = 0; i < fleet.vehicles.size(); ++i) {
        const auto& v = fleet.vehicles[i];
        if (v.present.empty() || !v.present[0]) continue;
        const bool arrives = std::any_of(v.arrivals.begin(), v.arrivals.end(), [](const ArrivalEvent& a) { return a.step == 0; });
        if (!arrives) st.vehicle_kwh[static_cast<Eigen::Index>(i)] = s.vehicle_initial_soc * v.battery_capacity_kwh;
    }
    return st;
}

WeekInputs week_inputs(const ExogenousProfiles& profiles, int week, double pv_peak_kwp) {
    const ExogenousProfiles w = profiles.week(week);
    WeekInputs in;
    in.grid = w.grid;
    in.start = w.start;
    in.buy = w.buy;
    in.feed = w.feed;
    in.pv_kw = scaled_pv(NormalizedPvProfile{w.pv_per_kwp}, pv_peak_kwp);
    in.house_kw = w.house;
    return in;
}

WeeklyLp build_weekly_lp(const Plant& plant, const FleetSchedule& fleet, const WeekInputs& in, const InitialState& initial,
                         const DispatchSettings& s) {
    check_fleet(plant, fleet, in);
    const int T = in.steps();
    const double dt = in.grid.dt_hours;
    const double cap = plant.p_grid_max_kw;
    const double M = s.slack_penalty;
    const auto nv = fleet.vehicles.size();
    if (initial.vehicle_kwh.size() != static_cast<Eigen::Index>(nv))
        throw std::invalid_argument("initial state lists " + std::to_string(initial.vehicle_kwh.size()) + " vehicles, fleet has " +
                                    std::to_string(nv));

    lp::LpBuilder<double> b;
    WeeklyLp out;
    const auto name = [&](const std::string& base, int k) { return s.name_lp ? base + "_" + std::to_string(k) : std::string(); };

    out.grid_p.resize(static_cast<std::size_t>(T));
    out.grid_n = out.slack_p = out.slack_n = out.grid_p;
    out.bess.assign(static_cast<std::size_t>(T), -1);
    out.bess_energy.assign(static_cast<std::size_t>(T) + 1, -1);
    std::vector<int> balance(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        const auto k = static_cast<std::size_t>(t);
        balance[k] = b.add_row(in.house_kw[t] - in.pv_kw[t], name("balance", t));
        out.grid_p[k] = b.add_variable(0.0, cap, in.buy[t] * dt, name("grid_p", t));
        out.grid_n[k] = b.add_variable(-cap, 0.0, in.feed[t] * dt, name("grid_n", t));
        out.slack_p[k] = b.add_variable(0.0, kInf, (in.buy[t] + M) * dt, name("slack_p", t));
        out.slack_n[k] = b.add_variable(0.0, kInf, (M - in.feed[t]) * dt, name("slack_n", t));
        b.add_coefficient(balance[k], out.grid_p[k], 1.0);
        b.add_coefficient(balance[k], out.grid_n[k], 1.0);
        b.add_coefficient(balance[k], out.slack_p[k], 1.0);
        b.add_coefficient(balance[k], out.slack_n[k], -1.0);
    }

    const double E = plant.e_bess_kwh;
    if (E > 0.0) {
        const double lo = s.bess_soc_min * E, hi = s.bess_soc_max * E, pmax = s.bess_c_rate * E;
        const double e0 = std::clamp(initial.bess_kwh, lo, hi);
        if (std::abs(e0 - initial.bess_kwh) > 1e-6 * E)
            throw std::invalid_argument("initial storage energy outside its SoC window");
        out.bess_initial_kwh = e0;
        out.bess_energy[0] = b.add_variable(e0, e0, 0.0, name("bess_e", 0));
        for (int t = 0; t < T; ++t) {
            const auto k = static_cast<std::size_t>(t);
            out.bess[k] = b.add_variable(-pmax, pmax, 0.0, name("bess_p", t));
            out.bess_energy[k + 1] = b.add_variable(lo, hi, 0.0, name("bess_e", t + 1));
            b.add_coefficient(balance[k], out.bess[k], -1.0);
            const int row = b.add_row(0.0, name("bess_soc", t));
            b.add_coefficient(row, out.bess_energy[k + 1], 1.0);
            b.add_coefficient(row, out.bess_energy[k], -1.0);
            b.add_coefficient(row, out.bess[k], -dt);
        }
    }

    // Group vehicles into blocks.
    std::vector<bool> assigned(nv, false);
    for (std::size_t i = 0; i < nv; ++i) {
        if (assigned[i]) continue;
        WeeklyLp::Block block;
        block.members.push_back(static_cast<int>(i));
        assigned[i] = true;
        if (s.aggregate_identical)
            for (std::size_t j = i + 1; j < nv; ++j)
                if (!assigned[j] && identical(fleet.vehicles[i], fleet.vehicles[j], plant.chargers[i], plant.chargers[j],
                                              initial.vehicle_kwh[static_cast<Eigen::Index>(i)],
                                              initial.vehicle_kwh[static_cast<Eigen::Index>(j)])) {
                    block.members.push_back(static_cast<int>(j));
                    assigned[j] = true;
                }
        out.blocks.push_back(std::move(block));
    }

    for (auto& block : out.blocks) {
        const auto lead = static_cast<std::size_t>(block.members.front());
        const Vehicle& v = fleet.vehicles[lead];
        const Charger& ch = plant.chargers[lead];
        const double k = static_cast<double>(block.members.size());
        const double cap_e = k * v.battery_capacity_kwh;
        const double p = k * ch.power_kw;
        const double lo = s.vehicle_soc_min * cap_e, hi = s.vehicle_soc_max * cap_e;
        block.power.assign(static_cast<std::size_t>(T), -1);
        block.energy.assign(static_cast<std::size_t>(T) + 1, -1);
        const std::string tag = s.name_lp ? v.id + (block.members.size() > 1 ? "x" + std::to_string(block.members.size()) : "") : "";

        for (const Stay& stay : stays_of(v, T, s)) {
            double e0 = stay.start_soc * cap_e;
            if (stay.carried) {
                double sum = 0.0;
                for (int m : block.members) sum += initial.vehicle_kwh[m];
                if (std::isnan(sum))
                    throw std::invalid_argument("vehicle " + v.id + " is at the depot at week start without a stored energy");
                e0 = std::clamp(sum, lo, hi);
            }
            const double reachable = e0 + p * (stay.end - stay.begin) * dt;
            const double target = stay.target_soc * cap_e;
            if (stay.departs && reachable < target - 1e-9 * cap_e) {
                char buf[200];
                std::snprintf(buf, sizeof buf, "vehicle %s cannot reach SoC %.2f by its departure at %s: %.1f kWh reachable at %.0f kW",
                              v.id.c_str(), stay.target_soc, when(in, stay.end).c_str(), reachable / k, ch.power_kw);
                throw ConfigurationError(buf);
            }
            block.energy[static_cast<std::size_t>(stay.begin)] = b.add_variable(e0, e0, 0.0, name(tag + "_e", stay.begin));
            for (int t = stay.begin; t < stay.end; ++t) {
                const auto kt = static_cast<std::size_t>(t);
                double elo = lo, ehi = hi;
                if (t + 1 == stay.end) {
                    if (stay.departs) {
                        elo = ehi = target;
                    } else if (!v.departures.empty()) {
                        // Leave the week as full as possible so next week's departures stay reachable.
                        elo = std::min(target, reachable);
                    }
                }
                block.power[kt] = b.add_variable(ch.bidirectional ? -p : 0.0, p, 0.0, name(tag + "_p", t));
                block.energy[kt + 1] = b.add_variable(elo, ehi, 0.0, name(tag + "_e", t + 1));
                b.add_coefficient(balance[kt], block.power[kt], -1.0);
                const int row = b.add_row(0.0, name(tag + "_soc", t));
                b.add_coefficient(row, block.energy[kt + 1], 1.0);
                b.add_coefficient(row, block.energy[kt], -1.0);
                b.add_coefficient(row, block.power[kt], -dt);
            }
        }
    }
    out.lp = b.build();
    return out;
}

double WeekResult::balance_residual() const {
    Eigen::VectorXd demand = -inputs.pv_kw + bess_kw + inputs.house_kw;
    if (evse_kw.rows() > 0) demand += evse_kw.colwise().sum().transpose();
    return (grid_net() - demand).cwiseAbs().maxCoeff();
}

InitialState WeekResult::final_state(const Plant& plant, const FleetSchedule& fleet) const {
    InitialState st;
    const Eigen::Index T = soc_bess.size() - 1;
    st.bess_kwh = soc_bess[T] * plant.e_bess_kwh;
    st.vehicle_kwh.resize(soc_vehicle.rows());
    for (Eigen::Index i = 0; i < soc_vehicle.rows(); ++i)
        st.vehicle_kwh[i] = soc_vehicle(i, T) * fleet.vehicles[static_cast<std::size_t>(i)].battery_capacity_kwh;
    return st;
}

double electricity_cost(const WeekInputs& in, const Eigen::VectorXd& import_kw, const Eigen::VectorXd& export_kw) {
    return (import_kw.cwiseProduct(in.buy) - export_kw.cwiseProduct(in.feed)).sum() * in.grid.dt_hours;
}

WeekResult optimize_week(const Plant& plant, const FleetSchedule& fleet, const WeekInputs& in, const InitialState& initial,
                         const DispatchSettings& s) {
    const WeeklyLp model = build_weekly_lp(plant, fleet, in, initial, s);
    const auto sol = lp::solve(model.lp, s.solver);
    if (sol.status != lp::Status::Optimal) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "dispatch LP for the week starting %s ended %s after %ld iterations (%ld rows, %ld columns)",
                      in.start.iso().c_str(), lp::to_string(sol.status), sol.iterations,
                      static_cast<long>(model.lp.num_constraints()), static_cast<long>(model.lp.num_variables()));
        throw std::runtime_error(buf);
    }
    const int T = in.steps();
    const auto& x = sol.x;
    WeekResult r;
    r.week_index = in.grid.week_index;
    r.inputs = in;
    r.lp_iterations = sol.iterations;
    const auto pick = [&](const std::vector<int>& idx) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(T);
        for (int t = 0; t < T; ++t)
            if (idx[static_cast<std::size_t>(t)] >= 0) v[t] = x[idx[static_cast<std::size_t>(t)]];
        return v;
    };
    r.grid_p = pick(model.grid_p);
    r.grid_n = pick(model.grid_n);
    r.slack_p = pick(model.slack_p);
    r.slack_n = pick(model.slack_n);
    r.bess_kw = pick(model.bess);
    r.soc_bess = Eigen::VectorXd::Zero(T + 1);
    if (plant.e_bess_kwh > 0.0)
        for (int k = 0; k <= T; ++k) r.soc_bess[k] = x[model.bess_energy[static_cast<std::size_t>(k)]] / plant.e_bess_kwh;

    const auto nv = static_cast<Eigen::Index>(fleet.vehicles.size());
    r.evse_kw = Eigen::MatrixXd::Zero(nv, T);
    r.soc_vehicle = Eigen::MatrixXd::Constant(nv, T + 1, kNaN);
    for (const auto& block : model.blocks) {
        const double k = static_cast<double>(block.members.size());
        for (int m : block.members) {
            const double cap_e = fleet.vehicles[static_cast<std::size_t>(m)].battery_capacity_kwh;
            for (int t = 0; t < T; ++t)
                if (block.power[static_cast<std::size_t>(t)] >= 0) r.evse_kw(m, t) = x[block.power[static_cast<std::size_t>(t)]] / k;
            for (int t = 0; t <= T; ++t)
                if (block.energy[static_cast<std::size_t>(t)] >= 0)
                    r.soc_vehicle(m, t) = x[block.energy[static_cast<std::size_t>(t)]] / (k * cap_e);
        }
    }
    r.electricity_cost = electricity_cost(in, r.grid_p + r.slack_p, r.slack_n - r.grid_n);
    r.penalty_cost = s.slack_penalty * (r.slack_p + r.slack_n).sum() * in.grid.dt_hours;
    r.max_slack = std::max(r.slack_p.maxCoeff(), r.slack_n.maxCoeff());
    return r;
}

WeekResult baseline_week(const Plant& plant, const FleetSchedule& fleet, const WeekInputs& in, const InitialState& initial,
                         const DispatchSettings& s) {
    check_fleet(plant, fleet, in);
    const int T = in.steps();
    const double dt = in.grid.dt_hours;
    const auto nv = static_cast<Eigen::Index>(fleet.vehicles.size());
    WeekResult r;
    r.week_index = in.grid.week_index;
    r.inputs = in;
    r.evse_kw = Eigen::MatrixXd::Zero(nv, T);
    r.soc_vehicle = Eigen::MatrixXd::Constant(nv, T + 1, kNaN);
    for (Eigen::Index i = 0; i < nv; ++i) {
        const Vehicle& v = fleet.vehicles[static_cast<std::size_t>(i)];
        const double E = v.battery_capacity_kwh, P = plant.chargers[static_cast<std::size_t>(i)].power_kw;
        const double full = s.vehicle_soc_max * E;
        for (const Stay& stay : stays_of(v, T, s)) {
            double e = stay.carried ? initial.vehicle_kwh[i] : stay.start_soc * E;
            if (std::isnan(e)) throw std::invalid_argument("vehicle " + v.id + " is at the depot at week start without a stored energy");
            r.soc_vehicle(i, stay.begin) = e / E;
            for (int t = stay.begin; t < stay.end; ++t) {
                const double p = std::clamp((full - e) / dt, 0.0, P);
                r.evse_kw(i, t) = p;
                e = std::min(full, e + p * dt);
                r.soc_vehicle(i, t + 1) = e / E;
            }
            if (stay.departs && e < stay.target_soc * E - 1e-9 * E) {
                char buf[200];
                std::snprintf(buf, sizeof buf, "vehicle %s cannot reach SoC %.2f by its departure at %s at %.0f kW", v.id.c_str(),
                              stay.target_soc, when(in, stay.end).c_str(), P);
                throw ConfigurationError(buf);
            }
        }
    }
    r.bess_kw = Eigen::VectorXd::Zero(T);
    r.soc_bess = Eigen::VectorXd::Constant(T + 1, plant.e_bess_kwh > 0.0 ? initial.bess_kwh / plant.e_bess_kwh : 0.0);
    Eigen::VectorXd net = in.house_kw - in.pv_kw;
    if (nv > 0) net += r.evse_kw.colwise().sum().transpose();
    const double cap = plant.p_grid_max_kw;
    const Eigen::VectorXd imp = net.cwiseMax(0.0), exp = (-net).cwiseMax(0.0);
    r.slack_p = (imp.array() - cap).max(0.0).matrix();
    r.slack_n = (exp.array() - cap).max(0.0).matrix();
    r.grid_p = imp - r.slack_p;
    r.grid_n = -(exp - r.slack_n);
    r.electricity_cost = electricity_cost(in, imp, exp);
    r.penalty_cost = s.slack_penalty * (r.slack_p + r.slack_n).sum() * dt;
    r.max_slack = std::max(r.slack_p.maxCoeff(), r.slack_n.maxCoeff());
    return r;
}

namespace {

template <typename WeekFn>
YearResult chain_weeks(const DesignPoint& design, const FleetSchedule& fleet, const ExogenousProfiles& profiles,
                       const DispatchSettings& s, int weeks, WeekFn&& run_week) {
    const Plant plant = make_plant(design, fleet);
    if (weeks <= 0) weeks = profiles.weeks;
    if (weeks > profiles.weeks)
        throw ConfigurationError("requested " + std::to_string(weeks) + " weeks, profiles cover " + std::to_string(profiles.weeks));
    YearResult year;
    InitialState state = first_week_state(plant, fleet, s);
    for (int w = 0; w < weeks; ++w) {
        const WeekInputs in = week_inputs(profiles, w, plant.pv_peak_kwp);
        try {
            year.weeks.push_back(run_week(plant, in, state));
        } catch (const ConfigurationError& e) {
            throw ConfigurationError("week " + std::to_string(w + 1) + ": " + e.what());
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("week " + std::to_string(w + 1) + ": " + e.what());
        }
        const WeekResult& r = year.weeks.back();
        state = r.final_state(plant, fleet);
        year.total_electricity_cost += r.electricity_cost;
        year.max_slack = std::max(year.max_slack, r.max_slack);
        year.lp_iterations += r.lp_iterations;
    }
    year.feasible = year.max_slack <= s.slack_tolerance;
    return year;
}

}  // namespace

YearResult simulate_year(const DesignPoint& design, const FleetSchedule& fleet, const ExogenousProfiles& profiles,
                         const DispatchSettings& s, int weeks) {
    return chain_weeks(design, fleet, profiles, s, weeks, [&](const Plant& plant, const WeekInputs& in, const InitialState& st) {
        return optimize_week(plant, fleet, in, st, s);
    });
}

YearResult simulate_baseline(const DesignPoint& design, const FleetSchedule& fleet, const ExogenousProfiles& profiles,
                             const DispatchSettings& s, int weeks) {
    return chain_weeks(design, fleet, profiles, s, weeks, [&](const Plant& plant, const WeekInputs& in, const InitialState& st) {
        return baseline_week(plant, fleet, in, st, s);
    });
}

}  // namespace v2g
