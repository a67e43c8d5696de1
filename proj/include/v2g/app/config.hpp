#ifndef V2G_APP_CONFIG_HPP
#define V2G_APP_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "v2g/cost_model.hpp"
#include "v2g/design.hpp"
#include "v2g/dispatch.hpp"
#include "v2g/fleet_schedule.hpp"
#include "v2g/profiles.hpp"

namespace v2g::app {

inline constexpr const char* kSynthetic = "synthetic";

struct DataConfig {
    std::string prices = kSynthetic;  // hourly price CSV or "synthetic"
    std::string pv = kSynthetic;      // normalized PV CSV or "synthetic"
    std::string house = kSynthetic;   // one-day load CSV or "synthetic"
    double house_mean_kw = 1.0;       // synthetic building load
    double house_peak_kw = 5.0;
    FeedInRule feed_in;
};

struct FleetConfig {
    double battery_capacity_kwh = 100.0;
    ScheduleOptions schedule;
    std::vector<UseCaseSpec> use_cases = default_use_cases();
};

struct OptimizerConfig {
    int budget = 100;
    int n_init = 6;
    std::uint64_t seed = 1;
    int starts_per_combination = 16;
};

/// Everything a run needs. Defaults reproduce the reference depot, so an empty
/// document is a valid configuration.
struct RunConfig {
    DataConfig data;
    double dt_hours = 0.25;
    int weeks = 51;
    FleetConfig fleet;
    DispatchSettings dispatch;
    ComponentCatalog catalog;
    DesignBounds bounds;
    DesignPoint design;  // used by simulate/baseline and as the optimizer's first point
    OptimizerConfig optimizer;
    std::string output_dir = "results";
    /// Directory relative data paths are resolved against.
    std::string base_dir = ".";

    /// Throws ConfigurationError for inconsistent values or missing data files.
    void validate() const;
    std::string resolve(const std::string& path) const;
};

/// Parses a JSON document. Unknown keys are errors so typos do not pass silently.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
/// Effective configuration as JSON text, loadable by parse_config.
std::string config_to_json(const RunConfig& config);

}  // namespace v2g::app

#endif  // V2G_APP_CONFIG_HPP
