#include "v2g/design.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace v2g {

const std::array<EvseOption, kEvseOptionCount>& evse_options() {
    static const std::array<EvseOption, kEvseOptionCount> options{{
        {11.0, false}, {11.0, true}, {22.0, false}, {22.0, true},
        {50.0, false}, {50.0, true}, {150.0, false}, {150.0, true},
    }};
    return options;
}

std::string evse_option_name(int index) {
    if (index < 0 || index >= kEvseOptionCount) throw ConfigurationError("EVSE option index out of range: " + std::to_string(index));
    const auto& o = evse_options()[static_cast<std::size_t>(index)];
    return std::to_string(static_cast<int>(o.power_kw)) + (o.bidirectional ? "Bidi" : "Uni");
}

int parse_evse_option(const std::string& name) {
    std::string key;
    for (char c : name)
        if (std::isalnum(static_cast<unsigned char>(c))) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (int i = 0; i < kEvseOptionCount; ++i) {
        std::string candidate = evse_option_name(i);
        std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (candidate == key) return i;
    }
    throw ConfigurationError("unknown EVSE option '" + name + "' (expected e.g. 11Uni, 22Bidi)");
}

int evse_counterpart(int index) {
    if (index < 0 || index >= kEvseOptionCount) throw ConfigurationError("EVSE option index out of range: " + std::to_string(index));
    return index ^ 1;
}

void validate(const DesignPoint& d, const DesignBounds& b, std::size_t use_case_count) {
    const auto check = [](double v, double lo, double hi, const char* what) {
        if (!std::isfinite(v) || v < lo || v > hi) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s = %g outside [%g, %g]", what, v, lo, hi);
            throw ConfigurationError(buf);
        }
    };
    check(d.p_pv_peak_kwp, b.pv_min, b.pv_max, "p_pv_peak");
    check(d.e_bess_kwh, b.bess_min, b.bess_max, "e_bess");
    check(d.p_grid_max_kw, b.grid_min, b.grid_max, "p_grid_max");
    if (d.evse_choice.size() != use_case_count)
        throw ConfigurationError("design lists " + std::to_string(d.evse_choice.size()) + " EVSE choices for " +
                                 std::to_string(use_case_count) + " use cases");
    for (int c : d.evse_choice) evse_option_name(c);
}

std::string describe(const DesignPoint& d) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "pv %.1f kWp, bess %.1f kWh, grid %.1f kW, evse", d.p_pv_peak_kwp, d.e_bess_kwh, d.p_grid_max_kw);
    std::string out = buf;
    for (int c : d.evse_choice) out += " " + evse_option_name(c);
    return out;
}

}  // namespace v2g
