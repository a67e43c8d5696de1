#ifndef V2G_COST_MODEL_HPP
#define V2G_COST_MODEL_HPP

#include <array>
#include <string>
#include <vector>

#include "v2g/design.hpp"

namespace v2g {

struct PricedComponent {
    double price_eur = 0.0;  // per unit of size, or per piece for chargers
    double lifetime_years = 1.0;
};

struct ComponentCatalog {
    PricedComponent pv{240.0, 20.0};     // EUR/kWp
    PricedComponent bess{200.0, 10.0};   // EUR/kWh
    PricedComponent grid{106.0, 1.0};    // EUR/kW
    std::array<PricedComponent, kEvseOptionCount> evse{{
        {3594.0, 15.0}, {4000.0, 15.0}, {6388.0, 15.0}, {7200.0, 15.0},
        {13500.0, 15.0}, {15345.0, 15.0}, {38900.0, 15.0}, {44436.0, 15.0},
    }};

    /// Throws ConfigurationError unless prices and lifetimes are positive and every
    /// bidirectional charger costs more than its unidirectional sibling.
    void validate() const;
};

struct CostLine {
    std::string component;      // pv, bess, grid, evse_<use case>
    std::string configuration;  // e.g. "133.9 kWp", "EVSE 11Bidi x6"
    double cost_eur = 0.0;
};

struct CostBreakdown {
    std::vector<CostLine> lines;
    double c_comp = 0.0;
    double c_elec = 0.0;
    double c_tot = 0.0;
};

/// Straight-line depreciation prorated to the simulated weeks of a 52-week year.
/// `vehicles_per_use_case` multiplies each charger line.
std::vector<CostLine> component_cost(const DesignPoint& design, const ComponentCatalog& catalog, int simulated_weeks,
                                     const std::vector<int>& vehicles_per_use_case,
                                     const std::vector<std::string>& use_case_ids = {});

double total_cost(const std::vector<CostLine>& lines, double electricity_cost);

CostBreakdown cost_breakdown(const DesignPoint& design, const ComponentCatalog& catalog, int simulated_weeks,
                             const std::vector<int>& vehicles_per_use_case, double electricity_cost,
                             const std::vector<std::string>& use_case_ids = {});

}  // namespace v2g

#endif  // V2G_COST_MODEL_HPP
