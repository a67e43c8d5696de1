#include "v2g/profiles.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace v2g {

namespace {

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

int grid_minutes(const TimeGrid& grid) {
    const double m = grid.dt_hours * 60.0;
    if (std::abs(m - std::round(m)) > 1e-9)
        throw std::invalid_argument("time step must be a whole number of minutes for CSV input");
    return static_cast<int>(std::round(m));
}

struct TimedRow {
    std::int64_t minute;
    double value;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n\"");
    auto e = s.find_last_not_of(" \t\r\n\"");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::pair<std::string, std::string> split2(const std::string& line) {
    auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("expected two comma-separated columns: " + line);
    return {trim(line.substr(0, comma)), trim(line.substr(comma + 1))};
}

double parse_number(const std::string& text, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": not a number '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(where + ": not a finite number '" + text + "'");
    return v;
}

std::vector<TimedRow> read_timed_csv(const std::string& path, const std::string& value_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
    const auto header = split2(line);
    if (header.first != "timestamp" || header.second != value_column)
        throw std::invalid_argument(path + ": expected header 'timestamp," + value_column + "'");

    std::vector<TimedRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split2(line);
        const std::string where = path + ":" + std::to_string(line_no);
        TimedRow row{parse_timestamp(cols.first).epoch_minutes(), parse_number(cols.second, where)};
        if (!rows.empty() && row.minute <= rows.back().minute)
            throw std::invalid_argument(where + ": timestamps are not strictly increasing at " + cols.first);
        rows.push_back(row);
    }
    if (rows.size() < 2) throw std::invalid_argument(path + ": need at least two rows");
    const std::int64_t resolution = rows[1].minute - rows[0].minute;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].minute - rows[i - 1].minute != resolution)
            throw std::invalid_argument(path + ": gap in data after " +
                                        CivilTime::from_epoch_minutes(rows[i - 1].minute).iso() + " (next row " +
                                        CivilTime::from_epoch_minutes(rows[i].minute).iso() + ")");
    }
    return rows;
}

// Aligns to the first Monday 00:00 and maps rows onto the grid: coarser data is
// held piecewise constant, finer data is averaged.
Eigen::VectorXd align_to_grid(const std::vector<TimedRow>& rows, const TimeGrid& grid, int weeks,
                              const std::string& path, CivilTime* aligned_start) {
    const std::int64_t resolution = rows[1].minute - rows[0].minute;
    const int dt = grid_minutes(grid);
    std::size_t first = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const CivilTime t = CivilTime::from_epoch_minutes(rows[i].minute);
        if (t.weekday() == 0 && t.hour == 0 && t.minute == 0) {
            first = i;
            break;
        }
    }
    if (first == rows.size()) throw std::invalid_argument(path + ": no Monday 00:00 found");
    if (aligned_start) *aligned_start = CivilTime::from_epoch_minutes(rows[first].minute);

    const std::int64_t needed_minutes = static_cast<std::int64_t>(weeks) * 7 * 24 * 60;
    const std::int64_t available = static_cast<std::int64_t>(rows.size() - first) * resolution;
    if (available < needed_minutes)
        throw std::invalid_argument(path + ": covers " + std::to_string(available / 60) + " h from the first Monday, need " +
                                    std::to_string(needed_minutes / 60) + " h (" + std::to_string(weeks) + " weeks)");

    const Eigen::Index steps = static_cast<Eigen::Index>(weeks) * grid.steps_per_week;
    Eigen::VectorXd out(steps);
    if (resolution >= dt) {
        if (resolution % dt != 0) throw std::invalid_argument(path + ": resolution incompatible with the time step");
        const std::int64_t repeat = resolution / dt;
        for (Eigen::Index k = 0; k < steps; ++k) out[k] = rows[first + static_cast<std::size_t>(k / repeat)].value;
    } else {
        if (dt % resolution != 0) throw std::invalid_argument(path + ": resolution incompatible with the time step");
        const std::int64_t group = dt / resolution;
        for (Eigen::Index k = 0; k < steps; ++k) {
            double sum = 0.0;
            for (std::int64_t j = 0; j < group; ++j) sum += rows[first + static_cast<std::size_t>(k * group + j)].value;
            out[k] = sum / static_cast<double>(group);
        }
    }
    return out;
}

double gauss(double x, double centre, double width) {
    const double z = (x - centre) / width;
    return std::exp(-z * z);
}

}  // namespace

std::int64_t CivilTime::epoch_minutes() const {
    return days_from_civil(year, month, day) * 1440 + hour * 60 + minute;
}

CivilTime CivilTime::from_epoch_minutes(std::int64_t minutes) {
    CivilTime t;
    const std::int64_t days = floor_div(minutes, 1440);
    const std::int64_t rest = minutes - days * 1440;
    civil_from_days(days, t.year, t.month, t.day);
    t.hour = static_cast<int>(rest / 60);
    t.minute = static_cast<int>(rest % 60);
    return t;
}

int CivilTime::weekday() const {
    // 1970-01-01 was a Thursday.
    const std::int64_t days = days_from_civil(year, month, day);
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

int CivilTime::day_of_year() const { return static_cast<int>(days_from_civil(year, month, day) - days_from_civil(year, 1, 1)); }

std::string CivilTime::iso() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", year, month, day, hour, minute);
    return buf;
}

CivilTime parse_timestamp(const std::string& text) {
    CivilTime t;
    t.hour = t.minute = 0;
    int second = 0;
    char sep = 0;
    const int n = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &t.year, &t.month, &t.day, &sep, &t.hour,
                              &t.minute, &second);
    if (n < 3 || (n > 3 && n < 6) || (n >= 4 && sep != 'T' && sep != ' ') || t.month < 1 || t.month > 12 || t.day < 1 ||
        t.day > 31 || t.hour < 0 || t.hour > 23 || t.minute < 0 || t.minute > 59)
        throw std::invalid_argument("bad timestamp '" + text + "'");
    if (n < 6) t.hour = t.minute = 0;
    return t;
}

ExogenousProfiles ExogenousProfiles::week(int w) const {
    if (w < 0 || w >= weeks) throw std::out_of_range("week index out of range");
    const Eigen::Index n = grid.steps_per_week;
    const Eigen::Index offset = static_cast<Eigen::Index>(w) * n;
    ExogenousProfiles out;
    out.grid = grid;
    out.grid.week_index = w;
    out.weeks = 1;
    out.start = time_of(offset);
    out.buy = buy.segment(offset, n);
    out.feed = feed.segment(offset, n);
    out.pv_per_kwp = pv_per_kwp.segment(offset, n);
    out.house = house.segment(offset, n);
    return out;
}

CivilTime ExogenousProfiles::time_of(Eigen::Index step) const {
    const auto minutes = static_cast<std::int64_t>(std::llround(static_cast<double>(step) * grid.dt_hours * 60.0));
    return CivilTime::from_epoch_minutes(start.epoch_minutes() + minutes);
}

double feed_in_price(double buy, const FeedInRule& rule) {
    if (buy > 0.0) return rule.factor * buy;
    return buy - (1.0 - rule.factor) * std::abs(buy) - rule.negative_margin;
}

Eigen::VectorXd feed_in_prices(const Eigen::VectorXd& buy, const FeedInRule& rule) {
    return buy.unaryExpr([&](double b) { return feed_in_price(b, rule); });
}

Eigen::VectorXd scaled_pv(const NormalizedPvProfile& profile, double p_pv_peak_kwp) {
    if (!(p_pv_peak_kwp >= 0.0)) throw std::invalid_argument("PV peak power must be non-negative");
    return profile.values * p_pv_peak_kwp;
}

PriceSeries load_price_csv(const std::string& path, const TimeGrid& grid, int weeks, CivilTime* aligned_start) {
    const auto rows = read_timed_csv(path, "price_eur_per_kwh");
    if (rows[1].minute - rows[0].minute != 60) throw std::invalid_argument(path + ": price rows must be hourly");
    return {align_to_grid(rows, grid, weeks, path, aligned_start)};
}

NormalizedPvProfile load_pv_csv(const std::string& path, const TimeGrid& grid, int weeks) {
    const auto rows = read_timed_csv(path, "kw_per_kwp");
    const std::int64_t res = rows[1].minute - rows[0].minute;
    if (res != 15 && res != 60) throw std::invalid_argument(path + ": PV rows must be 15-min or hourly");
    for (const auto& r : rows)
        if (r.value < 0.0 || r.value > 1.0)
            throw std::invalid_argument(path + ": kw_per_kwp outside [0, 1] at " + CivilTime::from_epoch_minutes(r.minute).iso());
    return {align_to_grid(rows, grid, weeks, path, nullptr)};
}

HouseLoadProfile load_house_csv(const std::string& path, const TimeGrid& grid) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::vector<double> values;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split2(line);
        if (line_no == 1 && !std::isdigit(static_cast<unsigned char>(cols.first[0]))) continue;  // header
        int hh = 0, mm = 0;
        if (std::sscanf(cols.first.c_str(), "%d:%d", &hh, &mm) != 2)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": bad clock '" + cols.first + "'");
        if (hh * 60 + mm != static_cast<int>(values.size()) * (1440 / 96) && values.size() < 96)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": rows must be consecutive 15-min slots");
        const double v = parse_number(cols.second, path + ":" + std::to_string(line_no));
        if (v < 0.0) throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": negative load");
        values.push_back(v);
    }
    if (values.size() != 96) throw std::invalid_argument(path + ": expected 96 rows of 15-min load, got " + std::to_string(values.size()));

    const int dt = grid_minutes(grid);
    const int steps = grid.steps_per_day();
    HouseLoadProfile day{Eigen::VectorXd(steps)};
    if (dt <= 15) {
        if (15 % dt != 0) throw std::invalid_argument("time step incompatible with 15-min load");
        for (int k = 0; k < steps; ++k) day.values[k] = values[static_cast<std::size_t>(k * dt / 15)];
    } else {
        if (dt % 15 != 0) throw std::invalid_argument("time step incompatible with 15-min load");
        const int group = dt / 15;
        for (int k = 0; k < steps; ++k) {
            double sum = 0.0;
            for (int j = 0; j < group; ++j) sum += values[static_cast<std::size_t>(k * group + j)];
            day.values[k] = sum / group;
        }
    }
    return day;
}

NormalizedPvProfile synth_pv_profile(const TimeGrid& grid, int weeks, const CivilTime& start, const PvShapeParams& shape) {
    const Eigen::Index steps = static_cast<Eigen::Index>(weeks) * grid.steps_per_week;
    const std::int64_t start_min = start.epoch_minutes();
    NormalizedPvProfile pv{Eigen::VectorXd::Zero(steps)};
    const double dl_mid = 0.5 * (shape.day_length_max_h + shape.day_length_min_h);
    const double dl_amp = 0.5 * (shape.day_length_max_h - shape.day_length_min_h);
    const double pk_mid = 0.5 * (shape.noon_peak_max + shape.noon_peak_min);
    const double pk_amp = 0.5 * (shape.noon_peak_max - shape.noon_peak_min);
    for (Eigen::Index k = 0; k < steps; ++k) {
        const auto minute = start_min + static_cast<std::int64_t>(std::llround(static_cast<double>(k) * grid.dt_hours * 60.0));
        const CivilTime t = CivilTime::from_epoch_minutes(minute);
        const double season = std::cos(2.0 * std::numbers::pi * (t.day_of_year() - shape.solstice_day_of_year) / 365.25);
        const double day_length = dl_mid + dl_amp * season;
        const double peak = pk_mid + pk_amp * season;
        const double h = t.hour + t.minute / 60.0;
        const double x = (h - (shape.solar_noon_h - 0.5 * day_length)) / day_length;
        if (x > 0.0 && x < 1.0) pv.values[k] = peak * std::pow(std::sin(std::numbers::pi * x), shape.exponent);
    }
    return pv;
}

HouseLoadProfile synth_house_profile(const TimeGrid& grid, double mean_kw, double peak_kw) {
    const int steps = grid.steps_per_day();
    Eigen::VectorXd shape(steps);
    for (int k = 0; k < steps; ++k) {
        const double h = k * grid.dt_hours;
        shape[k] = 0.25 + 0.9 * gauss(h, 7.5, 1.1) + 1.6 * gauss(h, 19.0, 1.4) + 0.15 * gauss(h, 12.5, 2.0);
    }
    // Affine rescale pins mean and peak exactly.
    const double gain = (peak_kw - mean_kw) / (shape.maxCoeff() - shape.mean());
    HouseLoadProfile day{(shape.array() - shape.mean()) * gain + mean_kw};
    if (day.values.minCoeff() < 0.0) throw std::logic_error("house load shape rescales below zero");
    return day;
}

Eigen::VectorXd tile_daily(const HouseLoadProfile& day, const TimeGrid& grid, int weeks) {
    const Eigen::Index per_day = grid.steps_per_day();
    if (day.values.size() != per_day) throw std::invalid_argument("house profile length does not match the grid");
    return day.values.replicate(static_cast<Eigen::Index>(weeks) * 7, 1);
}

PriceSeries synth_price_series(const TimeGrid& grid, int weeks, const CivilTime& start) {
    const int hours = weeks * 168;
    std::mt19937_64 rng(20230102u);
    std::normal_distribution<double> daily_shock(0.0, 0.015);
    std::normal_distribution<double> hourly_noise(0.0, 0.006);
    Eigen::VectorXd hourly(hours);
    double level = 0.0;
    const std::int64_t start_min = start.epoch_minutes();
    for (int hix = 0; hix < hours; ++hix) {
        const CivilTime t = CivilTime::from_epoch_minutes(start_min + static_cast<std::int64_t>(hix) * 60);
        const double h = t.hour;
        if (t.hour == 0) level = 0.7 * level + daily_shock(rng);
        const double season = std::cos(2.0 * std::numbers::pi * (t.day_of_year() - 15) / 365.25);
        const double sun = 0.5 * (1.0 - season);
        double p = 0.105 + 0.035 * season;
        p += 0.040 * gauss(h, 8.0, 1.6) + 0.060 * gauss(h, 19.0, 2.0) - 0.025 * gauss(h, 3.0, 2.5);
        p -= (0.03 + 0.05 * sun) * gauss(h, 13.0, 2.6);
        if (t.weekday() >= 5) p -= 0.02 + 0.02 * sun * gauss(h, 13.0, 3.0);
        p += level + hourly_noise(rng);
        hourly[hix] = std::round(p * 1e5) / 1e5;
    }
    const double per_hour = 1.0 / grid.dt_hours;
    const Eigen::Index steps = static_cast<Eigen::Index>(weeks) * grid.steps_per_week;
    PriceSeries series{Eigen::VectorXd(steps)};
    for (Eigen::Index k = 0; k < steps; ++k)
        series.values[k] = hourly[static_cast<Eigen::Index>(std::floor(static_cast<double>(k) / per_hour + 1e-9))];
    return series;
}

ExogenousProfiles synthetic_profiles(const TimeGrid& grid, int weeks, const FeedInRule& rule) {
    ExogenousProfiles p;
    p.grid = grid;
    p.weeks = weeks;
    p.start = CivilTime{2023, 1, 2, 0, 0};
    p.buy = synth_price_series(grid, weeks, p.start).values;
    p.feed = feed_in_prices(p.buy, rule);
    p.pv_per_kwp = synth_pv_profile(grid, weeks, p.start).values;
    p.house = tile_daily(synth_house_profile(grid), grid, weeks);
    return p;
}

}  // namespace v2g
