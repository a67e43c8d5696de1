#ifndef V2G_PROFILES_HPP
#define V2G_PROFILES_HPP

#include <Eigen/Core>

#include <cstdint>
#include <string>

#include "v2g/fleet_schedule.hpp"

namespace v2g {

/// Naive local wall-clock time at minute resolution.
struct CivilTime {
    int year = 2023;
    int month = 1;
    int day = 2;
    int hour = 0;
    int minute = 0;

    /// Minutes since 1970-01-01 00:00.
    std::int64_t epoch_minutes() const;
    static CivilTime from_epoch_minutes(std::int64_t minutes);
    /// 0 = Monday.
    int weekday() const;
    /// 0-based day of the year.
    int day_of_year() const;
    std::string iso() const;
};

/// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS]` and the same with a space separator;
/// trailing zone designators (`Z`, `+01:00`) are ignored.
CivilTime parse_timestamp(const std::string& text);

/// Buy prices in EUR/kWh on the simulation grid; negative values are legal.
struct PriceSeries {
    Eigen::VectorXd values;
};

/// PV output in kW per kWp on the simulation grid, within [0, 1].
struct NormalizedPvProfile {
    Eigen::VectorXd values;
};

/// Building load in kW for one day at grid resolution.
struct HouseLoadProfile {
    Eigen::VectorXd values;

    double mean() const { return values.mean(); }
    double peak() const { return values.maxCoeff(); }
};

/// Time-aligned inputs for the whole simulated horizon (weeks x steps_per_week).
struct ExogenousProfiles {
    TimeGrid grid;
    int weeks = 51;
    CivilTime start;
    Eigen::VectorXd buy;
    Eigen::VectorXd feed;
    Eigen::VectorXd pv_per_kwp;
    Eigen::VectorXd house;

    Eigen::Index steps() const { return buy.size(); }
    /// Copy restricted to week `w` (0-based), with grid.week_index set.
    ExogenousProfiles week(int w) const;
    CivilTime time_of(Eigen::Index step) const;
};

struct FeedInRule {
    double factor = 0.9;
    /// Extra margin below the buy price for non-positive prices, EUR/kWh.
    double negative_margin = 1e-4;
};

/// Feed-in price derived from the buy price; always strictly below it.
double feed_in_price(double buy, const FeedInRule& rule = {});
Eigen::VectorXd feed_in_prices(const Eigen::VectorXd& buy, const FeedInRule& rule = {});

/// Elementwise scaling by the installed peak. Throws on a negative peak.
Eigen::VectorXd scaled_pv(const NormalizedPvProfile& profile, double p_pv_peak_kwp);

/// Hourly CSV `timestamp,price_eur_per_kwh`, aligned to the first Monday 00:00 and
/// held piecewise constant on the grid.
PriceSeries load_price_csv(const std::string& path, const TimeGrid& grid, int weeks,
                           CivilTime* aligned_start = nullptr);

/// CSV `timestamp,kw_per_kwp` at 15-min or hourly resolution.
NormalizedPvProfile load_pv_csv(const std::string& path, const TimeGrid& grid, int weeks);

/// CSV `hh:mm,kw` covering one day.
HouseLoadProfile load_house_csv(const std::string& path, const TimeGrid& grid);

struct PvShapeParams {
    int solstice_day_of_year = 171;
    double day_length_min_h = 8.0;
    double day_length_max_h = 16.4;
    double noon_peak_min = 0.20;
    double noon_peak_max = 0.66;
    double solar_noon_h = 12.0;
    double exponent = 1.5;
};

NormalizedPvProfile synth_pv_profile(const TimeGrid& grid, int weeks, const CivilTime& start,
                                     const PvShapeParams& shape = {});

/// Morning and evening peaks, rescaled to the given daily mean and peak.
HouseLoadProfile synth_house_profile(const TimeGrid& grid, double mean_kw = 1.0, double peak_kw = 5.0);

/// Day-ahead-like hourly prices with daily, weekly and seasonal structure; deterministic.
PriceSeries synth_price_series(const TimeGrid& grid, int weeks, const CivilTime& start);

/// Repeats a one-day profile over `weeks` weeks.
Eigen::VectorXd tile_daily(const HouseLoadProfile& day, const TimeGrid& grid, int weeks);

/// Fully synthetic year starting Monday 2023-01-02.
ExogenousProfiles synthetic_profiles(const TimeGrid& grid, int weeks = 51,
                                     const FeedInRule& rule = {});

}  // namespace v2g

#endif  // V2G_PROFILES_HPP
