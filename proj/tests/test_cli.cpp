#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "v2g/app/cli.hpp"
#include "v2g/app/config.hpp"
#include "v2g/app/results_io.hpp"
#include "v2g/app/study.hpp"
#include "v2g/cost_model.hpp"

using namespace v2g;
using namespace v2g::app;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("depot_v2g_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

long line_count(const fs::path& p) {
    std::ifstream in(p);
    long n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("an empty document is the default configuration") {
    const RunConfig c = parse_config("{}");
    CHECK(c.dt_hours == 0.25);
    CHECK(c.weeks == 51);
    CHECK(c.fleet.use_cases.size() == 3);
    CHECK(c.catalog.grid.price_eur == 106.0);
    CHECK(c.optimizer.budget == 100);
    CHECK(c.optimizer.n_init == 6);
    CHECK(c.dispatch.slack_penalty == 1000.0);
    CHECK(c.data.feed_in.factor == 0.9);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("configuration round trip") {
    RunConfig c = parse_config(R"({
        "weeks": 4,
        "fleet": {"battery_capacity_kwh": 80,
                  "use_cases": [{"id": "A", "vehicles": 3, "rentals": ["Tue,07:00,Thu,18:00"]},
                                {"id": "B", "vehicles": 1, "rentals": ["Fri,19:00,Mon,08:00"]}]},
        "catalog": {"evse": {"22Bidi": {"price_eur": 9000, "lifetime_years": 12}}},
        "design": {"pv_kwp": 10, "evse": ["22Bidi", "11Uni"]},
        "optimizer": {"seed": 42}
    })");
    CHECK(c.weeks == 4);
    CHECK(c.fleet.use_cases[0].rental_intervals[0].to_string() == "Tue,07:00,Thu,18:00");
    CHECK(c.catalog.evse[3].price_eur == 9000.0);
    CHECK(c.design.evse_choice == std::vector<int>{3, 0});
    CHECK(c.optimizer.seed == 42);
    const RunConfig back = parse_config(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("configuration errors are reported") {
    CHECK_THROWS_AS(parse_config("{not json"), ConfigurationError);
    CHECK_THROWS_AS(parse_config(R"({"wekes": 3})"), ConfigurationError);
    CHECK_THROWS_AS(parse_config(R"({"dispatch": {"slack_penalty": "high"}})"), ConfigurationError);
    CHECK_THROWS_AS(parse_config(R"({"bounds": {"pv_kwp": [5]}})"), ConfigurationError);
    CHECK_THROWS_AS(parse_config(R"({"design": {"evse": ["11Uni", "12Uni", "11Uni"]}})"), ConfigurationError);
    CHECK_THROWS_AS(parse_config(R"({"dt_hours": 0.3})").validate(), ConfigurationError);
    CHECK_THROWS_AS(parse_config(R"({"bounds": {"grid_kw": [300, 20]}})").validate(), ConfigurationError);
    CHECK_THROWS_AS(parse_config(R"({"data": {"prices": "no_such_prices.csv"}})").validate(), ConfigurationError);
    CHECK_THROWS_AS(parse_config(R"({"catalog": {"evse": {"11Bidi": {"price_eur": 100}}}})").validate(), ConfigurationError);
    CHECK_THROWS_AS(parse_config(R"({"optimizer": {"budget": 3}})").validate(), ConfigurationError);
}

TEST_CASE("one simulated week writes one row per step") {
    const fs::path dir = scratch("week");
    const Run r = cli({"simulate", "--weeks", "1", "--out", dir.string(), "--pv", "133.9", "--bess", "99", "--grid", "69.4", "--evse",
                       "11Bidi,11Bidi,11Bidi"});
    CHECK(r.code == kExitOk);
    CHECK(line_count(dir / "year.csv") == 673);
    const auto summary = read_json(dir / "summary.json");
    CHECK(summary["feasible"].get<bool>());
    CHECK(summary["c_tot"].get<double>() == summary["c_comp"].get<double>() + summary["c_elec"].get<double>());

    const DesignPoint d{133.9, 99.0, 69.4, {1, 1, 1}};
    const auto lines = component_cost(d, {}, 1, {6, 2, 2}, {"UC1", "UC2", "UC3"});
    REQUIRE(summary["components"].size() == 6);
    double sum = 0.0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        CHECK(summary["components"][i]["component"].get<std::string>() == lines[i].component);
        CHECK(summary["components"][i]["cost_eur"].get<double>() == lines[i].cost_eur);
        sum += lines[i].cost_eur;
    }
    CHECK(summary["c_comp"].get<double>() == doctest::Approx(sum).epsilon(1e-12));
    CHECK(fs::exists(dir / "config.json"));
    CHECK(parse_config(slurp(dir / "config.json")).design.e_bess_kwh == 99.0);
}

TEST_CASE("a weak grid without storage exits as infeasible") {
    const fs::path dir = scratch("weak");
    const Run r = cli({"simulate", "--weeks", "1", "--out", dir.string(), "--grid", "20", "--bess", "0"});
    CHECK(r.code == kExitInfeasible);
    const auto summary = read_json(dir / "summary.json");
    CHECK_FALSE(summary["feasible"].get<bool>());
    CHECK(summary["violation"]["max_slack_kw"].get<double>() > 1.0);
    CHECK(summary["violation"]["steps_over_limit"].get<long>() > 0);
}

TEST_CASE("usage and configuration errors exit with one") {
    const fs::path dir = scratch("usage");
    CHECK(cli({}).code == kExitError);
    CHECK(cli({"fly"}).code == kExitError);
    CHECK(cli({"simulate", "--weeks", "0"}).code == kExitError);
    CHECK(cli({"simulate", "--config", (dir / "missing.json").string()}).code == kExitError);
    CHECK(cli({"simulate", "--weeks", "1", "--out", dir.string(), "--evse", "11Uni,99Bidi,11Uni"}).code == kExitError);
    CHECK(cli({"simulate", "--weeks", "1", "--out", dir.string(), "--pv", "500"}).code == kExitError);
    {
        std::ofstream(dir / "bad.json") << R"({"fleet": {"battery_capacity_kwh": -1}})";
    }
    const Run bad = cli({"simulate", "--config", (dir / "bad.json").string()});
    CHECK(bad.code == kExitError);
    CHECK(bad.err.find("battery_capacity_kwh") != std::string::npos);
    CHECK(cli({"report", "--in", (dir / "nothing").string()}).code == kExitError);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("optimization with only the initial design") {
    const fs::path dir = scratch("init");
    const Run r = cli({"optimize", "--weeks", "1", "--budget", "6", "--out", dir.string()});
    CHECK(r.code == kExitOk);
    CHECK(line_count(dir / "history.csv") == 7);
    CHECK(slurp(dir / "history.csv").rfind("iteration,p_pv_peak,e_bess,p_grid_max,evse_uc1,evse_uc2,evse_uc3,c_tot,feasible,incumbent,estimated_min\n", 0) == 0);
    const auto best = read_json(dir / "best_design.json");
    CHECK(best["c_tot"].get<double>() == read_json(dir / "summary.json")["c_tot"].get<double>());
    // The configured start design is evaluated first.
    std::ifstream in(dir / "history.csv");
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(first.rfind("1,50,50,150,11Uni,11Uni,11Uni,", 0) == 0);
}

TEST_CASE("a fixed seed reproduces the history byte for byte") {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    const std::vector<std::string> common{"optimize", "--weeks", "1", "--budget", "8", "--seed", "3"};
    auto args_a = common, args_b = common;
    args_a.insert(args_a.end(), {"--out", a.string()});
    args_b.insert(args_b.end(), {"--out", b.string()});
    REQUIRE(cli(args_a).code == kExitOk);
    REQUIRE(cli(args_b).code == kExitOk);
    CHECK(slurp(a / "history.csv") == slurp(b / "history.csv"));
    CHECK(line_count(a / "history.csv") == 9);
}

TEST_CASE("report arithmetic") {
    Table t;
    t.columns = {"step", "datetime", "grid_p", "grid_n", "bess_kw", "soc_bess", "evse_a_1", "slack", "week", "pv_kw", "house_kw",
                 "price_buy", "price_feed", "slack_import", "slack_export", "soc_a_1"};
    const double nan = std::nan("");
    // Two one-hour steps: buy 10 kW at 0.2, then sell 4 kW at 0.09; no charging.
    t.rows = {{0, nan, 10, 0, 0, 0.5, 0, 0, 0, 0, 10, 0.2, 0.18, 0, 0, nan}, {1, nan, 0, -4, 0, 0.5, 0, 0, 0, 4, 0, 0.1, 0.09, 0, 0, nan}};
    t.datetime = {"2023-01-02T00:00", "2023-01-02T01:00"};
    const ReportWindow w = report_window(t, {{"a_1", "A"}}, 1.0, 0, 0, 1);
    CHECK(w.summary.bought_eur == doctest::Approx(2.0));
    CHECK(w.summary.sold_eur == doctest::Approx(0.36));
    CHECK(w.summary.net_eur == doctest::Approx(w.summary.bought_eur - w.summary.sold_eur));
    CHECK(w.summary.charged_kwh == 0.0);
    CHECK(std::isnan(w.summary.average_price));
    CHECK(format_summary(w.summary).find("average_eur_per_kwh             \n") != std::string::npos);
    CHECK(w.csv.rfind("datetime,house_kw,pv_kw,bess_kw,evse_a,grid_kw,soc_bess,soc_a,price_buy\n", 0) == 0);
    CHECK_THROWS_AS(report_window(t, {{"a_1", "A"}}, 1.0, 3, 0, 1), ConfigurationError);
}

TEST_CASE("bidirectional dispatch charges below the mean price and the baseline") {
    const fs::path dir = scratch("report");
    const std::vector<std::string> design{"--weeks", "1", "--out", dir.string(), "--pv", "133.9", "--bess", "99", "--grid", "69.4",
                                          "--evse", "11Bidi,11Bidi,11Bidi"};
    auto sim = design, base = design;
    sim.insert(sim.begin(), "simulate");
    base.insert(base.begin(), "baseline");
    REQUIRE(cli(sim).code == kExitOk);
    REQUIRE(cli(base).code != kExitError);
    const Run opt_report = cli({"report", "--in", dir.string(), "--week", "1", "--day", "Mon", "--days", "7"});
    const Run base_report = cli({"report", "--in", dir.string(), "--week", "1", "--day", "Mon", "--days", "7", "--baseline"});
    REQUIRE(opt_report.code == kExitOk);
    REQUIRE(base_report.code == kExitOk);
    CHECK(fs::exists(dir / "report_week1_Mon.csv"));
    CHECK(line_count(dir / "report_week1_Mon.csv") == 673);

    const Table opt = read_year_csv((dir / "year.csv").string()), ref = read_year_csv((dir / "baseline_year.csv").string());
    const auto roster = read_json(dir / "summary.json")["vehicles"];
    std::map<std::string, std::string> vehicles;
    for (const auto& v : roster) vehicles[v["id"].get<std::string>()] = v["use_case"].get<std::string>();
    const auto o = report_window(opt, vehicles, 0.25, 0, 0, 7).summary;
    const auto b = report_window(ref, vehicles, 0.25, 0, 0, 7).summary;
    CHECK(o.average_price < o.mean_buy_price);
    CHECK(o.average_price < b.average_price);
    CHECK(o.net_eur < b.net_eur);
}
