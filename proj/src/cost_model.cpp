#include "v2g/cost_model.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace v2g {

namespace {

double annualized(const PricedComponent& c, double size, int weeks) {
    return c.price_eur * size / c.lifetime_years * (static_cast<double>(weeks) / 52.0);
}

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

void ComponentCatalog::validate() const {
    const auto check = [](const PricedComponent& c, const std::string& what) {
        if (!(c.price_eur > 0.0) || !(c.lifetime_years > 0.0))
            throw ConfigurationError("catalog entry " + what + " needs a positive price and lifetime");
    };
    check(pv, "pv");
    check(bess, "bess");
    check(grid, "grid");
    for (int i = 0; i < kEvseOptionCount; ++i) check(evse[static_cast<std::size_t>(i)], evse_option_name(i));
    for (int i = 0; i < kEvseOptionCount; i += 2)
        if (!(evse[static_cast<std::size_t>(i) + 1].price_eur > evse[static_cast<std::size_t>(i)].price_eur))
            throw ConfigurationError("catalog: " + evse_option_name(i + 1) + " must cost more than " + evse_option_name(i));
}

std::vector<CostLine> component_cost(const DesignPoint& design, const ComponentCatalog& catalog, int simulated_weeks,
                                     const std::vector<int>& vehicles_per_use_case, const std::vector<std::string>& use_case_ids) {
    if (design.evse_choice.size() != vehicles_per_use_case.size())
        throw ConfigurationError("design lists " + std::to_string(design.evse_choice.size()) + " EVSE choices for " +
                                 std::to_string(vehicles_per_use_case.size()) + " use cases");
    if (simulated_weeks < 0) throw ConfigurationError("negative number of simulated weeks");
    std::vector<CostLine> lines;
    lines.push_back({"pv", format("%.1f kWp", design.p_pv_peak_kwp), annualized(catalog.pv, design.p_pv_peak_kwp, simulated_weeks)});
    lines.push_back({"bess", format("%.1f kWh", design.e_bess_kwh), annualized(catalog.bess, design.e_bess_kwh, simulated_weeks)});
    lines.push_back({"grid", format("%.1f kW", design.p_grid_max_kw), annualized(catalog.grid, design.p_grid_max_kw, simulated_weeks)});
    for (std::size_t u = 0; u < design.evse_choice.size(); ++u) {
        const int option = design.evse_choice[u];
        const std::string name = evse_option_name(option);
        std::string id = u < use_case_ids.size() ? use_case_ids[u] : "UC" + std::to_string(u + 1);
        std::transform(id.begin(), id.end(), id.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        const int count = vehicles_per_use_case[u];
        lines.push_back({"evse_" + id, "EVSE " + name + " x" + std::to_string(count),
                         annualized(catalog.evse[static_cast<std::size_t>(option)], count, simulated_weeks)});
    }
    return lines;
}

double total_cost(const std::vector<CostLine>& lines, double electricity_cost) {
    double sum = 0.0;
    for (const auto& l : lines) sum += l.cost_eur;
    return sum + electricity_cost;
}

CostBreakdown cost_breakdown(const DesignPoint& design, const ComponentCatalog& catalog, int simulated_weeks,
                             const std::vector<int>& vehicles_per_use_case, double electricity_cost,
                             const std::vector<std::string>& use_case_ids) {
    CostBreakdown b;
    b.lines = component_cost(design, catalog, simulated_weeks, vehicles_per_use_case, use_case_ids);
    b.c_comp = total_cost(b.lines, 0.0);
    b.c_elec = electricity_cost;
    b.c_tot = b.c_comp + b.c_elec;
    return b;
}

}  // namespace v2g
