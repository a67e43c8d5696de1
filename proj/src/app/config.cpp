#include "v2g/app/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace v2g::app {

using json = nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigurationError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
        if (!known) throw ConfigurationError(where + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigurationError(where + "." + key + ": unexpected type " + std::string(it->type_name()));
    }
}

void read_range(const json& obj, const char* key, double& lo, double& hi, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
        throw ConfigurationError(where + "." + key + ": expected [min, max]");
    lo = (*it)[0].get<double>();
    hi = (*it)[1].get<double>();
}

void read_component(const json& obj, const std::string& where, PricedComponent& c) {
    check_keys(obj, where, {"price_eur", "lifetime_years"});
    read(obj, "price_eur", c.price_eur, where);
    read(obj, "lifetime_years", c.lifetime_years, where);
}

std::vector<int> parse_evse_list(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ConfigurationError(where + ": expected a list of charger names");
    std::vector<int> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw ConfigurationError(where + ": charger names must be strings");
        out.push_back(parse_evse_option(v.get<std::string>()));
    }
    return out;
}

UseCaseSpec parse_use_case(const json& obj, const std::string& where) {
    check_keys(obj, where, {"id", "vehicles", "rentals"});
    UseCaseSpec spec;
    read(obj, "id", spec.id, where);
    read(obj, "vehicles", spec.vehicle_count, where);
    if (spec.id.empty()) throw ConfigurationError(where + ": use case needs an id");
    const auto it = obj.find("rentals");
    if (it != obj.end()) {
        if (!it->is_array()) throw ConfigurationError(where + ".rentals: expected a list");
        for (const auto& r : *it) {
            if (!r.is_string()) throw ConfigurationError(where + ".rentals: entries look like \"Fri,19:00,Mon,08:00\"");
            try {
                spec.rental_intervals.push_back(parse_rental_interval(r.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                throw ConfigurationError(where + ".rentals: " + e.what());
            }
        }
    }
    return spec;
}

json component_json(const PricedComponent& c) { return {{"price_eur", c.price_eur}, {"lifetime_years", c.lifetime_years}}; }

json evse_json(const std::vector<int>& choice) {
    json arr = json::array();
    for (int c : choice) arr.push_back(evse_option_name(c));
    return arr;
}

}  // namespace

std::string RunConfig::resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

void RunConfig::validate() const {
    try {
        build_time_grid(dt_hours);
    } catch (const std::invalid_argument& e) {
        throw ConfigurationError(std::string("dt_hours: ") + e.what());
    }
    if (weeks < 1 || weeks > 52) throw ConfigurationError("weeks must be within 1..52");
    if (!(fleet.battery_capacity_kwh > 0.0)) throw ConfigurationError("fleet.battery_capacity_kwh must be positive");
    if (fleet.use_cases.empty()) throw ConfigurationError("fleet.use_cases is empty");
    for (const auto& uc : fleet.use_cases) {
        try {
            v2g::validate(uc);
        } catch (const std::invalid_argument& e) {
            throw ConfigurationError(std::string("fleet.use_cases: ") + e.what());
        }
    }
    const auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
    const auto& d = dispatch;
    if (!(fraction(d.bess_soc_min) && fraction(d.bess_soc_max) && d.bess_soc_min < d.bess_soc_max))
        throw ConfigurationError("dispatch: need 0 <= bess_soc_min < bess_soc_max <= 1");
    if (!(fraction(d.vehicle_soc_min) && fraction(d.vehicle_soc_max) && d.vehicle_soc_min < d.vehicle_soc_max))
        throw ConfigurationError("dispatch: need 0 <= vehicle_soc_min < vehicle_soc_max <= 1");
    if (!fraction(d.bess_initial_soc) || !fraction(d.vehicle_initial_soc))
        throw ConfigurationError("dispatch: initial SoC must be within [0, 1]");
    if (!(d.bess_c_rate > 0.0)) throw ConfigurationError("dispatch.bess_c_rate must be positive");
    if (!(d.slack_penalty > 0.0)) throw ConfigurationError("dispatch.slack_penalty must be positive");
    if (!(d.slack_tolerance >= 0.0)) throw ConfigurationError("dispatch.slack_tolerance must be non-negative");
    if (!fraction(fleet.schedule.arrival_soc) || !fraction(fleet.schedule.departure_soc))
        throw ConfigurationError("fleet: arrival and departure SoC must be within [0, 1]");
    if (!(data.feed_in.factor > 0.0 && data.feed_in.factor < 1.0)) throw ConfigurationError("data.feed_in_factor must be within (0, 1)");
    if (!(data.feed_in.negative_margin > 0.0)) throw ConfigurationError("data.negative_price_margin must be positive");
    if (!(data.house_mean_kw > 0.0 && data.house_peak_kw > data.house_mean_kw))
        throw ConfigurationError("data: need 0 < house_mean_kw < house_peak_kw");
    catalog.validate();
    if (!(bounds.pv_min >= 0.0 && bounds.pv_min < bounds.pv_max)) throw ConfigurationError("bounds.pv_kwp must be ordered and non-negative");
    if (!(bounds.bess_min >= 0.0 && bounds.bess_min < bounds.bess_max)) throw ConfigurationError("bounds.bess_kwh must be ordered and non-negative");
    if (!(bounds.grid_min >= 0.0 && bounds.grid_min < bounds.grid_max)) throw ConfigurationError("bounds.grid_kw must be ordered and non-negative");
    v2g::validate(design, bounds, fleet.use_cases.size());
    if (optimizer.n_init < 1 || optimizer.budget < optimizer.n_init)
        throw ConfigurationError("optimizer: need 1 <= n_init <= budget");
    if (optimizer.starts_per_combination < 1) throw ConfigurationError("optimizer.starts_per_combination must be positive");
    for (const std::string* p : {&data.prices, &data.pv, &data.house})
        if (*p != kSynthetic && !std::filesystem::is_regular_file(resolve(*p)))
            throw ConfigurationError("data file not found: " + resolve(*p));
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(text.empty() ? std::string("{}") : text);
    } catch (const json::parse_error& e) {
        throw ConfigurationError(std::string("configuration is not valid JSON: ") + e.what());
    }
    RunConfig c;
    c.base_dir = base_dir;
    check_keys(root, "config", {"data", "dt_hours", "weeks", "fleet", "dispatch", "catalog", "bounds", "design", "optimizer", "output_dir"});
    read(root, "dt_hours", c.dt_hours, "config");
    read(root, "weeks", c.weeks, "config");
    read(root, "output_dir", c.output_dir, "config");

    if (const auto it = root.find("data"); it != root.end()) {
        const std::string w = "data";
        check_keys(*it, w, {"prices", "pv", "house", "house_mean_kw", "house_peak_kw", "feed_in_factor", "negative_price_margin"});
        read(*it, "prices", c.data.prices, w);
        read(*it, "pv", c.data.pv, w);
        read(*it, "house", c.data.house, w);
        read(*it, "house_mean_kw", c.data.house_mean_kw, w);
        read(*it, "house_peak_kw", c.data.house_peak_kw, w);
        read(*it, "feed_in_factor", c.data.feed_in.factor, w);
        read(*it, "negative_price_margin", c.data.feed_in.negative_margin, w);
    }
    if (const auto it = root.find("fleet"); it != root.end()) {
        const std::string w = "fleet";
        check_keys(*it, w, {"battery_capacity_kwh", "arrival_soc", "departure_soc", "use_cases"});
        read(*it, "battery_capacity_kwh", c.fleet.battery_capacity_kwh, w);
        read(*it, "arrival_soc", c.fleet.schedule.arrival_soc, w);
        read(*it, "departure_soc", c.fleet.schedule.departure_soc, w);
        if (const auto uc = it->find("use_cases"); uc != it->end()) {
            if (!uc->is_array()) throw ConfigurationError("fleet.use_cases: expected a list");
            c.fleet.use_cases.clear();
            for (std::size_t i = 0; i < uc->size(); ++i)
                c.fleet.use_cases.push_back(parse_use_case((*uc)[i], "fleet.use_cases[" + std::to_string(i) + "]"));
            // Charger choices follow the use-case count unless given explicitly.
            c.design.evse_choice.assign(c.fleet.use_cases.size(), 0);
        }
    }
    if (const auto it = root.find("dispatch"); it != root.end()) {
        const std::string w = "dispatch";
        auto& d = c.dispatch;
        check_keys(*it, w, {"bess_soc_min", "bess_soc_max", "bess_c_rate", "bess_initial_soc", "vehicle_soc_min", "vehicle_soc_max",
                            "vehicle_initial_soc", "slack_penalty", "slack_tolerance", "aggregate_identical"});
        read(*it, "bess_soc_min", d.bess_soc_min, w);
        read(*it, "bess_soc_max", d.bess_soc_max, w);
        read(*it, "bess_c_rate", d.bess_c_rate, w);
        read(*it, "bess_initial_soc", d.bess_initial_soc, w);
        read(*it, "vehicle_soc_min", d.vehicle_soc_min, w);
        read(*it, "vehicle_soc_max", d.vehicle_soc_max, w);
        read(*it, "vehicle_initial_soc", d.vehicle_initial_soc, w);
        read(*it, "slack_penalty", d.slack_penalty, w);
        read(*it, "slack_tolerance", d.slack_tolerance, w);
        read(*it, "aggregate_identical", d.aggregate_identical, w);
    }
    if (const auto it = root.find("catalog"); it != root.end()) {
        const std::string w = "catalog";
        check_keys(*it, w, {"pv", "bess", "grid", "evse"});
        if (const auto p = it->find("pv"); p != it->end()) read_component(*p, w + ".pv", c.catalog.pv);
        if (const auto p = it->find("bess"); p != it->end()) read_component(*p, w + ".bess", c.catalog.bess);
        if (const auto p = it->find("grid"); p != it->end()) read_component(*p, w + ".grid", c.catalog.grid);
        if (const auto e = it->find("evse"); e != it->end()) {
            if (!e->is_object()) throw ConfigurationError("catalog.evse: expected an object keyed by charger name");
            for (auto k = e->begin(); k != e->end(); ++k)
                read_component(k.value(), "catalog.evse." + k.key(), c.catalog.evse[static_cast<std::size_t>(parse_evse_option(k.key()))]);
        }
    }
    if (const auto it = root.find("bounds"); it != root.end()) {
        const std::string w = "bounds";
        check_keys(*it, w, {"pv_kwp", "bess_kwh", "grid_kw"});
        read_range(*it, "pv_kwp", c.bounds.pv_min, c.bounds.pv_max, w);
        read_range(*it, "bess_kwh", c.bounds.bess_min, c.bounds.bess_max, w);
        read_range(*it, "grid_kw", c.bounds.grid_min, c.bounds.grid_max, w);
    }
    if (const auto it = root.find("design"); it != root.end()) {
        const std::string w = "design";
        check_keys(*it, w, {"pv_kwp", "bess_kwh", "grid_kw", "evse"});
        read(*it, "pv_kwp", c.design.p_pv_peak_kwp, w);
        read(*it, "bess_kwh", c.design.e_bess_kwh, w);
        read(*it, "grid_kw", c.design.p_grid_max_kw, w);
        if (const auto e = it->find("evse"); e != it->end()) c.design.evse_choice = parse_evse_list(*e, "design.evse");
    }
    if (const auto it = root.find("optimizer"); it != root.end()) {
        const std::string w = "optimizer";
        check_keys(*it, w, {"budget", "n_init", "seed", "starts_per_combination"});
        read(*it, "budget", c.optimizer.budget, w);
        read(*it, "n_init", c.optimizer.n_init, w);
        read(*it, "seed", c.optimizer.seed, w);
        read(*it, "starts_per_combination", c.optimizer.starts_per_combination, w);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open configuration " + path);
    std::ostringstream text;
    text << in.rdbuf();
    const auto parent = std::filesystem::path(path).parent_path();
    return parse_config(text.str(), parent.empty() ? "." : parent.string());
}

std::string config_to_json(const RunConfig& c) {
    json uc = json::array();
    for (const auto& u : c.fleet.use_cases) {
        json rentals = json::array();
        for (const auto& r : u.rental_intervals) rentals.push_back(r.to_string());
        uc.push_back({{"id", u.id}, {"vehicles", u.vehicle_count}, {"rentals", rentals}});
    }
    json evse = json::object();
    for (int i = 0; i < kEvseOptionCount; ++i) evse[evse_option_name(i)] = component_json(c.catalog.evse[static_cast<std::size_t>(i)]);
    const auto& d = c.dispatch;
    const json root = {
        {"data",
         {{"prices", c.data.prices},
          {"pv", c.data.pv},
          {"house", c.data.house},
          {"house_mean_kw", c.data.house_mean_kw},
          {"house_peak_kw", c.data.house_peak_kw},
          {"feed_in_factor", c.data.feed_in.factor},
          {"negative_price_margin", c.data.feed_in.negative_margin}}},
        {"dt_hours", c.dt_hours},
        {"weeks", c.weeks},
        {"fleet",
         {{"battery_capacity_kwh", c.fleet.battery_capacity_kwh},
          {"arrival_soc", c.fleet.schedule.arrival_soc},
          {"departure_soc", c.fleet.schedule.departure_soc},
          {"use_cases", uc}}},
        {"dispatch",
         {{"bess_soc_min", d.bess_soc_min},
          {"bess_soc_max", d.bess_soc_max},
          {"bess_c_rate", d.bess_c_rate},
          {"bess_initial_soc", d.bess_initial_soc},
          {"vehicle_soc_min", d.vehicle_soc_min},
          {"vehicle_soc_max", d.vehicle_soc_max},
          {"vehicle_initial_soc", d.vehicle_initial_soc},
          {"slack_penalty", d.slack_penalty},
          {"slack_tolerance", d.slack_tolerance},
          {"aggregate_identical", d.aggregate_identical}}},
        {"catalog",
         {{"pv", component_json(c.catalog.pv)}, {"bess", component_json(c.catalog.bess)}, {"grid", component_json(c.catalog.grid)}, {"evse", evse}}},
        {"bounds",
         {{"pv_kwp", {c.bounds.pv_min, c.bounds.pv_max}},
          {"bess_kwh", {c.bounds.bess_min, c.bounds.bess_max}},
          {"grid_kw", {c.bounds.grid_min, c.bounds.grid_max}}}},
        {"design",
         {{"pv_kwp", c.design.p_pv_peak_kwp},
          {"bess_kwh", c.design.e_bess_kwh},
          {"grid_kw", c.design.p_grid_max_kw},
          {"evse", evse_json(c.design.evse_choice)}}},
        {"optimizer",
         {{"budget", c.optimizer.budget},
          {"n_init", c.optimizer.n_init},
          {"seed", c.optimizer.seed},
          {"starts_per_combination", c.optimizer.starts_per_combination}}},
        {"output_dir", c.output_dir},
    };
    return root.dump(2) + "\n";
}

}  // namespace v2g::app
