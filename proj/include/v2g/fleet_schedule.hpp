#ifndef V2G_FLEET_SCHEDULE_HPP
#define V2G_FLEET_SCHEDULE_HPP

#include <string>
#include <vector>

namespace v2g {

/// Discrete simulation clock. Step 0 is Monday 00:00 of the week.
struct TimeGrid {
    double dt_hours = 0.25;
    int steps_per_week = 672;
    int week_index = 0;

    int steps_per_day() const { return steps_per_week / 7; }
    int weekday_of(int step) const { return (step % steps_per_week) / steps_per_day(); }
    /// Hours since 00:00 of the step's weekday.
    double hour_of_day(int step) const {
        return static_cast<double>((step % steps_per_week) % steps_per_day()) * dt_hours;
    }
};

/// Throws std::invalid_argument when dt_hours does not divide 168 h.
TimeGrid build_time_grid(double dt_hours);

/// Monday = 0 ... Sunday = 6.
struct WeekTime {
    int weekday = 0;
    int minute_of_day = 0;

    double hours_from_week_start() const { return weekday * 24.0 + minute_of_day / 60.0; }
};

/// A rental interval inside one week. The end may lie before the start, in which
/// case the interval wraps over the week boundary (e.g. Fri 19:00 -> Mon 08:00).
struct RentalInterval {
    WeekTime start;
    WeekTime end;

    double duration_hours() const;
    std::string to_string() const;
};

/// Parses `weekday,start_hh:mm,end_weekday,end_hh:mm`, e.g. `Fri,19:00,Mon,08:00`.
RentalInterval parse_rental_interval(const std::string& text);
int parse_weekday(const std::string& name);
const char* weekday_name(int weekday);

struct UseCaseSpec {
    std::string id;
    int vehicle_count = 0;
    std::vector<RentalInterval> rental_intervals;
};

/// UC1 (6 vehicles, Mon 08:00 -> Sat 19:00), UC2 (2 vehicles, Mon..Sat 08:00 -> 19:00),
/// UC3 (2 vehicles, Wed 08:00 -> 19:00 and Fri 19:00 -> Mon 08:00).
std::vector<UseCaseSpec> default_use_cases();

/// Throws std::invalid_argument on overlapping or degenerate intervals.
void validate(const UseCaseSpec& spec);

struct ArrivalEvent {
    int step = 0;
    double soc = 0.05;
};

struct DepartureEvent {
    int step = 0;
    double soc = 1.0;
};

struct Vehicle {
    std::string id;
    int use_case = 0;  // index into the use-case list the schedule was built from
    double battery_capacity_kwh = 100.0;
    std::vector<bool> present;  // one flag per step of the week
    std::vector<ArrivalEvent> arrivals;
    std::vector<DepartureEvent> departures;

    bool is_present(int step) const { return present[static_cast<std::size_t>(step)]; }
};

struct FleetSchedule {
    TimeGrid grid;
    std::vector<std::string> use_case_ids;
    std::vector<Vehicle> vehicles;

    int vehicle_count(int use_case) const;
};

struct ScheduleOptions {
    double arrival_soc = 0.05;
    double departure_soc = 1.0;
};

/// Expands use cases into per-vehicle presence masks and events on the grid.
/// Interval boundaries snap to the nearest step (ties toward the earlier step);
/// an interval that collapses or collides after snapping is reported.
FleetSchedule expand_schedule(const std::vector<UseCaseSpec>& specs, const TimeGrid& grid,
                              double battery_capacity_kwh, const ScheduleOptions& options = {});

/// Nearest grid step for a time in hours, ties toward the earlier step.
int snap_to_step(double hours, double dt_hours);

}  // namespace v2g

#endif  // V2G_FLEET_SCHEDULE_HPP
