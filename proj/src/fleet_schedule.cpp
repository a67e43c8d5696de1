#include "v2g/fleet_schedule.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace v2g {

namespace {

constexpr double kHoursPerWeek = 168.0;
constexpr std::array<const char*, 7> kWeekdays = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

int parse_clock(const std::string& text) {
    int hh = 0, mm = 0;
    char colon = 0;
    std::istringstream in(trim(text));
    if (!(in >> hh >> colon >> mm) || colon != ':' || hh < 0 || hh > 24 || mm < 0 || mm > 59 ||
        (hh == 24 && mm != 0))
        throw std::invalid_argument("bad clock time '" + text + "', expected hh:mm");
    return hh * 60 + mm;
}

}  // namespace

TimeGrid build_time_grid(double dt_hours) {
    if (!(dt_hours > 0.0) || !std::isfinite(dt_hours))
        throw std::invalid_argument("time step must be positive");
    const double steps = kHoursPerWeek / dt_hours;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * steps || static_cast<long>(rounded) % 7 != 0)
        throw std::invalid_argument("time step of " + std::to_string(dt_hours) +
                                    " h does not divide the week evenly");
    // Hourly tariffs must map onto whole steps: the step tiles the hour or the day.
    const double minutes = dt_hours * 60.0;
    const bool whole = std::abs(minutes - std::round(minutes)) < 1e-9;
    const long m = std::lround(minutes);
    if (!whole || (m < 60 && 60 % m != 0) || (m >= 60 && (m % 60 != 0 || 1440 % m != 0)))
        throw std::invalid_argument("time step of " + std::to_string(dt_hours) +
                                    " h does not align with hourly tariff boundaries");
    TimeGrid grid;
    grid.dt_hours = dt_hours;
    grid.steps_per_week = static_cast<int>(rounded);
    return grid;
}

const char* weekday_name(int weekday) { return kWeekdays.at(static_cast<std::size_t>(weekday)); }

int parse_weekday(const std::string& name) {
    std::string key = trim(name);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    for (std::size_t i = 0; i < kWeekdays.size(); ++i) {
        std::string day = kWeekdays[i];
        std::transform(day.begin(), day.end(), day.begin(), [](unsigned char c) { return std::tolower(c); });
        if (key.size() >= 3 && key.compare(0, 3, day) == 0) return static_cast<int>(i);
    }
    throw std::invalid_argument("unknown weekday '" + name + "'");
}

RentalInterval parse_rental_interval(const std::string& text) {
    std::vector<std::string> parts;
    std::string field;
    std::istringstream in(text);
    while (std::getline(in, field, ',')) parts.push_back(field);
    if (parts.size() != 4)
        throw std::invalid_argument("rental interval '" + text +
                                    "' must be weekday,start_hh:mm,end_weekday,end_hh:mm");
    RentalInterval interval;
    interval.start = {parse_weekday(parts[0]), parse_clock(parts[1])};
    interval.end = {parse_weekday(parts[2]), parse_clock(parts[3])};
    return interval;
}

double RentalInterval::duration_hours() const {
    double d = end.hours_from_week_start() - start.hours_from_week_start();
    if (d <= 0.0) d += kHoursPerWeek;
    return d;
}

std::string RentalInterval::to_string() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s,%02d:%02d,%s,%02d:%02d", weekday_name(start.weekday),
                  start.minute_of_day / 60, start.minute_of_day % 60, weekday_name(end.weekday),
                  end.minute_of_day / 60, end.minute_of_day % 60);
    return buf;
}

std::vector<UseCaseSpec> default_use_cases() {
    const auto at = [](int day, int hh) { return WeekTime{day, hh * 60}; };
    UseCaseSpec uc1{"UC1", 6, {{at(0, 8), at(5, 19)}}};
    UseCaseSpec uc2{"UC2", 2, {}};
    for (int day = 0; day < 6; ++day) uc2.rental_intervals.push_back({at(day, 8), at(day, 19)});
    UseCaseSpec uc3{"UC3", 2, {{at(2, 8), at(2, 19)}, {at(4, 19), at(0, 8)}}};
    return {uc1, uc2, uc3};
}

void validate(const UseCaseSpec& spec) {
    if (spec.vehicle_count < 0)
        throw std::invalid_argument("use case " + spec.id + ": negative vehicle count");
    // Minute-resolution occupancy over the week catches overlaps exactly.
    constexpr int kMinutes = 7 * 24 * 60;
    std::vector<int> owner(kMinutes, -1);
    for (std::size_t i = 0; i < spec.rental_intervals.size(); ++i) {
        const auto& r = spec.rental_intervals[i];
        const int s = r.start.weekday * 1440 + r.start.minute_of_day;
        const int e = r.end.weekday * 1440 + r.end.minute_of_day;
        if (s == e)
            throw std::invalid_argument("use case " + spec.id + ": empty interval " + r.to_string());
        for (int m = s; m != e; m = (m + 1) % kMinutes) {
            if (owner[static_cast<std::size_t>(m)] >= 0)
                throw std::invalid_argument("use case " + spec.id + ": interval " + r.to_string() +
                                            " overlaps another rental");
            owner[static_cast<std::size_t>(m)] = static_cast<int>(i);
        }
    }
}

int snap_to_step(double hours, double dt_hours) {
    const double x = hours / dt_hours;
    const double lower = std::floor(x + 1e-9);
    return static_cast<int>(x - lower > 0.5 + 1e-9 ? lower + 1.0 : lower);
}

int FleetSchedule::vehicle_count(int use_case) const {
    return static_cast<int>(std::count_if(vehicles.begin(), vehicles.end(),
                                          [&](const Vehicle& v) { return v.use_case == use_case; }));
}

FleetSchedule expand_schedule(const std::vector<UseCaseSpec>& specs, const TimeGrid& grid,
                              double battery_capacity_kwh, const ScheduleOptions& options) {
    if (!(battery_capacity_kwh > 0.0))
        throw std::invalid_argument("vehicle battery capacity must be positive");
    const int steps = grid.steps_per_week;

    FleetSchedule schedule;
    schedule.grid = grid;
    for (std::size_t u = 0; u < specs.size(); ++u) {
        const UseCaseSpec& spec = specs[u];
        validate(spec);
        schedule.use_case_ids.push_back(spec.id);

        std::vector<bool> present(static_cast<std::size_t>(steps), true);
        for (const auto& r : spec.rental_intervals) {
            const int s = snap_to_step(r.start.hours_from_week_start(), grid.dt_hours) % steps;
            const int e = snap_to_step(r.end.hours_from_week_start(), grid.dt_hours) % steps;
            if (s == e)
                throw std::invalid_argument("use case " + spec.id + ": interval " + r.to_string() +
                                            " is not representable on a " +
                                            std::to_string(grid.dt_hours) + " h grid");
            for (int k = s; k != e; k = (k + 1) % steps) {
                if (!present[static_cast<std::size_t>(k)])
                    throw std::invalid_argument("use case " + spec.id + ": interval " + r.to_string() +
                                                " collides with another rental after snapping");
                present[static_cast<std::size_t>(k)] = false;
            }
        }

        std::vector<ArrivalEvent> arrivals;
        std::vector<DepartureEvent> departures;
        for (int k = 0; k < steps; ++k) {
            const bool now = present[static_cast<std::size_t>(k)];
            const bool before = present[static_cast<std::size_t>((k + steps - 1) % steps)];
            if (now && !before) arrivals.push_back({k, options.arrival_soc});
            if (!now && before) departures.push_back({k, options.departure_soc});
        }

        for (int n = 0; n < spec.vehicle_count; ++n) {
            Vehicle v;
            std::string lower = spec.id;
            std::transform(lower.begin(), lower.end(), lower.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            v.id = lower + "_" + std::to_string(n + 1);
            v.use_case = static_cast<int>(u);
            v.battery_capacity_kwh = battery_capacity_kwh;
            v.present = present;
            v.arrivals = arrivals;
            v.departures = departures;
            schedule.vehicles.push_back(std::move(v));
        }
    }
    return schedule;
}

}  // namespace v2g
