#include "v2g/app/results_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace v2g::app {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    if (!std::isfinite(v)) return "";
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void write_year_csv(const YearResult& year, const FleetSchedule& fleet, std::ostream& out) {
    out << "step,datetime,grid_p,grid_n,bess_kw,soc_bess";
    for (const auto& v : fleet.vehicles) out << ",evse_" << v.id;
    out << ",slack,week,pv_kw,house_kw,price_buy,price_feed,slack_import,slack_export";
    for (const auto& v : fleet.vehicles) out << ",soc_" << v.id;
    out << '\n';
    for (const auto& w : year.weeks) {
        const auto& in = w.inputs;
        const int T = in.steps();
        const std::int64_t t0 = in.start.epoch_minutes();
        for (int t = 0; t < T; ++t) {
            const long step = static_cast<long>(w.week_index) * in.grid.steps_per_week + t;
            const auto when = CivilTime::from_epoch_minutes(t0 + std::llround(t * in.grid.dt_hours * 60.0));
            out << step << ',' << when.iso() << ',' << num(w.grid_p[t]) << ',' << num(w.grid_n[t]) << ',' << num(w.bess_kw[t]) << ','
                << num(w.soc_bess[t + 1]);
            for (Eigen::Index v = 0; v < w.evse_kw.rows(); ++v) out << ',' << num(w.evse_kw(v, t));
            out << ',' << num(w.slack_p[t] + w.slack_n[t]) << ',' << w.week_index << ',' << num(in.pv_kw[t]) << ',' << num(in.house_kw[t])
                << ',' << num(in.buy[t]) << ',' << num(in.feed[t]) << ',' << num(w.slack_p[t]) << ',' << num(w.slack_n[t]);
            for (Eigen::Index v = 0; v < w.soc_vehicle.rows(); ++v) out << ',' << num(w.soc_vehicle(v, t + 1));
            out << '\n';
        }
    }
}

std::string summary_json(const Study& study, const Assessment& a) {
    using nlohmann::json;
    json lines = json::array();
    for (const auto& l : a.cost.lines) lines.push_back({{"component", l.component}, {"configuration", l.configuration}, {"cost_eur", l.cost_eur}});
    json evse = json::array();
    for (int c : a.design.evse_choice) evse.push_back(evse_option_name(c));
    json vehicles = json::array();
    for (const auto& v : study.fleet.vehicles)
        vehicles.push_back({{"id", v.id}, {"use_case", study.fleet.use_case_ids[static_cast<std::size_t>(v.use_case)]}});
    long over = 0;
    double slack_energy = 0.0;
    for (const auto& w : a.year.weeks)
        for (int t = 0; t < w.inputs.steps(); ++t) {
            const double s = w.slack_p[t] + w.slack_n[t];
            if (s > study.config.dispatch.slack_tolerance) ++over;
            slack_energy += s * w.inputs.grid.dt_hours;
        }
    const json root = {
        {"mode", a.baseline ? "baseline" : "optimized"},
        {"weeks", static_cast<int>(a.year.weeks.size())},
        {"dt_hours", study.grid.dt_hours},
        {"design",
         {{"pv_kwp", a.design.p_pv_peak_kwp}, {"bess_kwh", a.design.e_bess_kwh}, {"grid_kw", a.design.p_grid_max_kw}, {"evse", evse}}},
        {"feasible", a.feasible},
        {"c_elec", a.cost.c_elec},
        {"c_comp", a.cost.c_comp},
        {"c_tot", a.cost.c_tot},
        {"components", lines},
        {"violation", {{"max_slack_kw", a.year.max_slack}, {"steps_over_limit", over}, {"slack_energy_kwh", slack_energy}}},
        {"lp_iterations", a.year.lp_iterations},
        {"use_cases", study.fleet.use_case_ids},
        {"vehicles", vehicles},
    };
    return root.dump(2) + "\n";
}

void write_history_csv(const bo::BoHistory& history, const std::vector<std::string>& use_case_ids, std::ostream& out) {
    out << "iteration,p_pv_peak,e_bess,p_grid_max";
    for (const auto& id : use_case_ids) out << ",evse_" << lower(id);
    out << ",c_tot,feasible,incumbent,estimated_min\n";
    for (const auto& r : history.records) {
        out << r.iteration;
        for (Eigen::Index d = 0; d < r.candidate.continuous.size(); ++d) out << ',' << num(r.candidate.continuous[d]);
        for (int c : r.candidate.categorical) out << ',' << evse_option_name(c);
        out << ',' << (r.feasible ? num(r.value) : "") << ',' << (r.feasible ? 1 : 0) << ',' << num(r.incumbent) << ','
            << num(r.estimated_min) << '\n';
    }
}

int Table::index(const std::string& column) const {
    const auto it = std::find(columns.begin(), columns.end(), column);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

double Table::at(std::size_t row, const std::string& column) const {
    const int i = index(column);
    if (i < 0) throw ConfigurationError("results have no column " + column);
    return rows[row][static_cast<std::size_t>(i)];
}

Table read_year_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open " + path);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigurationError(path + " is empty");
    t.columns = split(line);
    const int when = t.index("datetime");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.columns.size()) throw ConfigurationError(path + ": row with " + std::to_string(cells.size()) + " cells");
        std::vector<double> row(cells.size(), kNaN);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (static_cast<int>(c) == when) {
                t.datetime.push_back(cells[c]);
                continue;
            }
            if (!cells[c].empty()) row[c] = std::stod(cells[c]);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

ReportWindow report_window(const Table& year, const std::map<std::string, std::string>& vehicle_use_case, double dt_hours, int week,
                           int day, int days) {
    if (day < 0 || day > 6 || days < 1) throw ConfigurationError("report window needs day in 0..6 and days >= 1");
    const long per_day = std::lround(24.0 / dt_hours);
    const long per_week = 7 * per_day;
    std::vector<std::string> use_cases;
    for (const auto& [id, uc] : vehicle_use_case)
        if (std::find(use_cases.begin(), use_cases.end(), uc) == use_cases.end()) use_cases.push_back(uc);
    std::sort(use_cases.begin(), use_cases.end());

    std::ostringstream csv;
    csv << "datetime,house_kw,pv_kw,bess_kw";
    for (const auto& uc : use_cases) csv << ",evse_" << lower(uc);
    csv << ",grid_kw,soc_bess";
    for (const auto& uc : use_cases) csv << ",soc_" << lower(uc);
    csv << ",price_buy\n";

    WindowSummary s;
    long count = 0;
    const long first = week * per_week + day * per_day, last = first + days * per_day;
    for (std::size_t r = 0; r < year.rows.size(); ++r) {
        const long step = std::lround(year.at(r, "step"));
        if (step < first || step >= last) continue;
        ++count;
        const double import_kw = year.at(r, "grid_p") + year.at(r, "slack_import");
        const double export_kw = -year.at(r, "grid_n") + year.at(r, "slack_export");
        const double buy = year.at(r, "price_buy");
        s.bought_eur += import_kw * buy * dt_hours;
        s.sold_eur += export_kw * year.at(r, "price_feed") * dt_hours;
        s.mean_buy_price += buy;
        std::map<std::string, double> power, soc_sum;
        std::map<std::string, int> soc_n;
        for (const auto& [id, uc] : vehicle_use_case) {
            const double p = year.at(r, "evse_" + id);
            power[uc] += p;
            s.charged_kwh += std::max(p, 0.0) * dt_hours;
            const double soc = year.at(r, "soc_" + id);
            if (std::isfinite(soc)) {
                soc_sum[uc] += soc;
                ++soc_n[uc];
            }
        }
        csv << year.datetime[r] << ',' << num(year.at(r, "house_kw")) << ',' << num(year.at(r, "pv_kw")) << ',' << num(year.at(r, "bess_kw"));
        for (const auto& uc : use_cases) csv << ',' << num(power[uc]);
        csv << ',' << num(import_kw - export_kw) << ',' << num(year.at(r, "soc_bess"));
        for (const auto& uc : use_cases) csv << ',' << (soc_n[uc] > 0 ? num(soc_sum[uc] / soc_n[uc]) : "");
        csv << ',' << num(buy) << '\n';
    }
    if (count == 0) throw ConfigurationError("week " + std::to_string(week) + " day " + std::to_string(day) + " is not in the results");
    s.net_eur = s.bought_eur - s.sold_eur;
    s.average_price = s.charged_kwh > 0.0 ? s.net_eur / s.charged_kwh : kNaN;
    s.mean_buy_price /= static_cast<double>(count);
    return {csv.str(), s};
}

std::string format_summary(const WindowSummary& s) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "bought_eur            %10.2f\n"
                  "sold_eur              %10.2f\n"
                  "net_eur               %10.2f\n"
                  "charged_kwh           %10.1f\n"
                  "average_eur_per_kwh   %10s\n"
                  "mean_buy_eur_per_kwh  %10.4f\n",
                  s.bought_eur, s.sold_eur, s.net_eur, s.charged_kwh,
                  std::isfinite(s.average_price) ? num(std::round(s.average_price * 1e4) / 1e4).c_str() : "", s.mean_buy_price);
    return buf;
}

}  // namespace v2g::app
