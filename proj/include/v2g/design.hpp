#ifndef V2G_DESIGN_HPP
#define V2G_DESIGN_HPP

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace v2g {

/// Raised for user-fixable problems: bad sizes, unreachable charging targets,
/// malformed configuration documents.
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EvseOption {
    double power_kw = 11.0;
    bool bidirectional = false;
};

inline constexpr int kEvseOptionCount = 8;

/// 11Uni, 11Bidi, 22Uni, 22Bidi, 50Uni, 50Bidi, 150Uni, 150Bidi.
const std::array<EvseOption, kEvseOptionCount>& evse_options();
std::string evse_option_name(int index);
/// Accepts names like `11Bidi`, `11 bidi`, `22_uni`; throws ConfigurationError otherwise.
int parse_evse_option(const std::string& name);
/// Index of the option with the same power and the other direction capability.
int evse_counterpart(int index);

/// One candidate sizing of the depot.
struct DesignPoint {
    double p_pv_peak_kwp = 50.0;
    double e_bess_kwh = 50.0;
    double p_grid_max_kw = 150.0;
    std::vector<int> evse_choice{0, 0, 0};  // one option index per use case
};

struct DesignBounds {
    double pv_min = 0.0, pv_max = 200.0;
    double bess_min = 0.0, bess_max = 100.0;
    double grid_min = 20.0, grid_max = 300.0;
};

/// Throws ConfigurationError when a size is out of bounds or the charger list does not
/// match the use-case count.
void validate(const DesignPoint& design, const DesignBounds& bounds, std::size_t use_case_count);

std::string describe(const DesignPoint& design);

}  // namespace v2g

#endif  // V2G_DESIGN_HPP
