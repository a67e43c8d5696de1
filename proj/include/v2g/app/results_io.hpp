#ifndef V2G_APP_RESULTS_IO_HPP
#define V2G_APP_RESULTS_IO_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "v2g/app/study.hpp"
#include "v2g/bo/optimizer.hpp"

namespace v2g::app {

/// One row per step. SoC columns hold the state at the end of the step and are empty
/// while a vehicle is away. `slack` is the grid-limit violation in kW.
void write_year_csv(const YearResult& year, const FleetSchedule& fleet, std::ostream& out);

/// Costs, component lines, feasibility and the vehicle roster, as JSON text.
std::string summary_json(const Study& study, const Assessment& a);

/// Columns: iteration, p_pv_peak, e_bess, p_grid_max, evse_<use case>..., c_tot, feasible,
/// incumbent, estimated_min. Infeasible rows leave c_tot empty.
void write_history_csv(const bo::BoHistory& history, const std::vector<std::string>& use_case_ids, std::ostream& out);

/// Header-indexed numeric table; empty cells read as NaN.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> datetime;  // the datetime column, kept as text
    std::vector<std::vector<double>> rows;

    int index(const std::string& column) const;  // -1 when absent
    double at(std::size_t row, const std::string& column) const;
};

Table read_year_csv(const std::string& path);

struct WindowSummary {
    double bought_eur = 0.0;
    double sold_eur = 0.0;
    double net_eur = 0.0;
    double charged_kwh = 0.0;
    double average_price = 0.0;  // NaN when nothing was charged
    double mean_buy_price = 0.0;
};

struct ReportWindow {
    std::string csv;
    WindowSummary summary;
};

/// Extracts `days` days starting at `day` (0 = Monday) of `week` (0-based): per-step
/// building, PV, storage, per-use-case charger power, net grid power, storage SoC,
/// mean SoC per use case and buy price.
ReportWindow report_window(const Table& year, const std::map<std::string, std::string>& vehicle_use_case, double dt_hours,
                           int week, int day, int days);

std::string format_summary(const WindowSummary& s);

}  // namespace v2g::app

#endif  // V2G_APP_RESULTS_IO_HPP
