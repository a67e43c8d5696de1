#include "v2g/app/study.hpp"

#include <stdexcept>

namespace v2g::app {

std::vector<int> Study::vehicles_per_use_case() const {
    std::vector<int> n;
    for (std::size_t u = 0; u < fleet.use_case_ids.size(); ++u) n.push_back(fleet.vehicle_count(static_cast<int>(u)));
    return n;
}

Study prepare_study(const RunConfig& config, int weeks) {
    config.validate();
    Study s;
    s.config = config;
    if (weeks > 0) s.config.weeks = std::min(weeks, config.weeks);
    const int w = s.config.weeks;
    try {
        s.grid = build_time_grid(config.dt_hours);
        s.fleet = expand_schedule(config.fleet.use_cases, s.grid, config.fleet.battery_capacity_kwh, config.fleet.schedule);

        auto& p = s.profiles;
        p.grid = s.grid;
        p.weeks = w;
        p.start = CivilTime{2023, 1, 2, 0, 0};
        if (config.data.prices == kSynthetic) {
            p.buy = synth_price_series(s.grid, w, p.start).values;
        } else {
            p.buy = load_price_csv(config.resolve(config.data.prices), s.grid, w, &p.start).values;
        }
        p.feed = feed_in_prices(p.buy, config.data.feed_in);
        p.pv_per_kwp = config.data.pv == kSynthetic ? synth_pv_profile(s.grid, w, p.start).values
                                                    : load_pv_csv(config.resolve(config.data.pv), s.grid, w).values;
        const HouseLoadProfile day = config.data.house == kSynthetic
                                         ? synth_house_profile(s.grid, config.data.house_mean_kw, config.data.house_peak_kw)
                                         : load_house_csv(config.resolve(config.data.house), s.grid);
        p.house = tile_daily(day, s.grid, w);
    } catch (const ConfigurationError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigurationError(e.what());
    }
    return s;
}

Assessment assess(const Study& study, const DesignPoint& design, bool baseline) {
    validate(design, study.config.bounds, study.fleet.use_case_ids.size());
    Assessment a;
    a.design = design;
    a.baseline = baseline;
    a.year = baseline ? simulate_baseline(design, study.fleet, study.profiles, study.config.dispatch)
                      : simulate_year(design, study.fleet, study.profiles, study.config.dispatch);
    a.feasible = a.year.feasible;
    a.cost = cost_breakdown(design, study.config.catalog, study.weeks(), study.vehicles_per_use_case(), a.year.total_electricity_cost,
                            study.fleet.use_case_ids);
    return a;
}

bo::Evaluator design_evaluator(const Study& study) {
    return [&study](const bo::Candidate& c) {
        const Assessment a = assess(study, bo::to_design(c));
        return bo::Evaluation{a.cost.c_tot, a.feasible};
    };
}

bo::BoOptions bo_options(const OptimizerConfig& config) {
    bo::BoOptions o;
    o.budget = config.budget;
    o.n_init = config.n_init;
    o.seed = config.seed;
    o.acquisition.starts_per_combination = config.starts_per_combination;
    return o;
}

bo::BoHistory optimize_design(const Study& study, const std::function<void(const bo::BoRecord&)>& on_record) {
    const bo::SearchSpace space = bo::design_search_space(study.config.bounds, static_cast<int>(study.fleet.use_case_ids.size()));
    return bo::run_bo(space, design_evaluator(study), bo_options(study.config.optimizer), bo::to_candidate(study.config.design), on_record);
}

}  // namespace v2g::app
