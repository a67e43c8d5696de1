#include "v2g/app/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "v2g/app/config.hpp"
#include "v2g/app/results_io.hpp"
#include "v2g/app/study.hpp"
#include "v2g/lp/linear_program.hpp"

namespace v2g::app {

namespace {

namespace fs = std::filesystem;

struct DesignFlags {
    std::optional<double> pv, bess, grid;
    std::string evse;
    std::string mps;
};

void add_design_flags(CLI::App* cmd, DesignFlags& f) {
    cmd->add_option("--pv", f.pv, "PV peak power, kWp");
    cmd->add_option("--bess", f.bess, "storage capacity, kWh");
    cmd->add_option("--grid", f.grid, "grid connection limit, kW");
    cmd->add_option("--evse", f.evse, "charger per use case, e.g. 11Bidi,11Bidi,22Uni");
    cmd->add_option("--mps", f.mps, "also write the first week's LP as MPS to this file");
}

void apply(const DesignFlags& f, DesignPoint& d) {
    if (f.pv) d.p_pv_peak_kwp = *f.pv;
    if (f.bess) d.e_bess_kwh = *f.bess;
    if (f.grid) d.p_grid_max_kw = *f.grid;
    if (!f.evse.empty()) {
        d.evse_choice.clear();
        std::istringstream in(f.evse);
        std::string name;
        while (std::getline(in, name, ',')) d.evse_choice.push_back(parse_evse_option(name));
    }
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigurationError("cannot write " + path.string());
    out << text;
}

std::string money(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%12.2f", v);
    return buf;
}

void print_assessment(const Assessment& a, std::ostream& out) {
    out << describe(a.design) << (a.baseline ? "  [baseline dispatch]" : "") << '\n';
    for (const auto& l : a.cost.lines) out << "  " << l.component << std::string(l.component.size() < 10 ? 10 - l.component.size() : 1, ' ') << money(l.cost_eur) << "  " << l.configuration << '\n';
    out << "  c_comp    " << money(a.cost.c_comp) << '\n';
    out << "  c_elec    " << money(a.cost.c_elec) << '\n';
    out << "  c_tot     " << money(a.cost.c_tot) << '\n';
    out << "  " << (a.feasible ? "feasible" : "INFEASIBLE") << ", max grid-limit violation " << a.year.max_slack << " kW\n";
}

void write_assessment(const Study& study, const Assessment& a, const fs::path& dir, const std::string& prefix) {
    fs::create_directories(dir);
    std::ostringstream csv;
    write_year_csv(a.year, study.fleet, csv);
    write_file(dir / (prefix + "year.csv"), csv.str());
    write_file(dir / (prefix + "summary.json"), summary_json(study, a));
    write_file(dir / "config.json", config_to_json(study.config));
}

void write_mps_file(const Study& study, const DesignPoint& design, const std::string& path) {
    const Plant plant = make_plant(design, study.fleet);
    DispatchSettings settings = study.config.dispatch;
    settings.name_lp = true;
    const WeeklyLp model = build_weekly_lp(plant, study.fleet, week_inputs(study.profiles, 0, design.p_pv_peak_kwp),
                                           first_week_state(plant, study.fleet, settings), settings);
    std::ofstream out(path);
    if (!out) throw ConfigurationError("cannot write " + path);
    lp::write_mps(model.lp, out, "WEEK1");
}

int simulate(const RunConfig& cfg, int weeks, const DesignFlags& flags, bool baseline, std::ostream& out) {
    RunConfig c = cfg;
    apply(flags, c.design);
    const Study study = prepare_study(c, weeks);
    if (!flags.mps.empty()) write_mps_file(study, c.design, flags.mps);
    const Assessment a = assess(study, c.design, baseline);
    write_assessment(study, a, c.output_dir, baseline ? "baseline_" : "");
    print_assessment(a, out);
    out << "results in " << c.output_dir << '\n';
    return a.feasible ? kExitOk : kExitInfeasible;
}

int optimize(const RunConfig& cfg, int weeks, std::ostream& out) {
    const Study study = prepare_study(cfg, weeks);
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const auto progress = [&](const bo::BoRecord& r) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "iter %3d  %-9s c_tot %12.2f  incumbent %12.2f  ", r.iteration, r.feasible ? "feasible" : "violates",
                      r.value, r.incumbent);
        out << buf << describe(bo::to_design(r.candidate)) << (r.error.empty() ? "" : "  error: " + r.error) << '\n';
        out.flush();
    };
    const bo::BoHistory history = optimize_design(study, progress);
    std::ostringstream csv;
    write_history_csv(history, study.fleet.use_case_ids, csv);
    write_file(dir / "history.csv", csv.str());
    const bo::BoRecord* best = history.best();
    if (!best) {
        write_file(dir / "config.json", config_to_json(study.config));
        out << "no feasible design found in " << history.records.size() << " evaluations\n";
        return kExitInfeasible;
    }
    const Assessment a = assess(study, bo::to_design(best->candidate));
    write_assessment(study, a, dir, "");
    nlohmann::json evse = nlohmann::json::array();
    for (int c : a.design.evse_choice) evse.push_back(evse_option_name(c));
    const nlohmann::json best_json = {
        {"iteration", best->iteration},
        {"design", {{"pv_kwp", a.design.p_pv_peak_kwp}, {"bess_kwh", a.design.e_bess_kwh}, {"grid_kw", a.design.p_grid_max_kw}, {"evse", evse}}},
        {"c_tot", a.cost.c_tot},
        {"c_comp", a.cost.c_comp},
        {"c_elec", a.cost.c_elec},
    };
    write_file(dir / "best_design.json", best_json.dump(2) + "\n");
    out << "best at iteration " << best->iteration << ":\n";
    print_assessment(a, out);
    out << "results in " << cfg.output_dir << '\n';
    return kExitOk;
}

int report(const std::string& dir, bool baseline, int week, const std::string& day, int days, std::ostream& out) {
    const fs::path base(dir);
    const std::string prefix = baseline ? "baseline_" : "";
    std::ifstream in(base / (prefix + "summary.json"));
    if (!in) throw ConfigurationError("missing " + (base / (prefix + "summary.json")).string());
    nlohmann::json summary;
    try {
        summary = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(std::string("unreadable summary: ") + e.what());
    }
    std::map<std::string, std::string> vehicles;
    for (const auto& v : summary.at("vehicles")) vehicles[v.at("id").get<std::string>()] = v.at("use_case").get<std::string>();
    const Table table = read_year_csv((base / (prefix + "year.csv")).string());
    int weekday = 0;
    try {
        weekday = parse_weekday(day);
    } catch (const std::invalid_argument& e) {
        throw ConfigurationError(e.what());
    }
    const ReportWindow w = report_window(table, vehicles, summary.at("dt_hours").get<double>(), week - 1, weekday, days);
    const fs::path target = base / (prefix + "report_week" + std::to_string(week) + "_" + weekday_name(weekday) + ".csv");
    write_file(target, w.csv);
    out << "week " << week << ", " << days << " day(s) from " << weekday_name(weekday) << " -> " << target.string() << '\n';
    out << format_summary(w.summary);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Depot V2G simulator and component sizing optimizer", "depot-v2g"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int weeks = 0;
    std::string out_dir;
    app.add_option("--config", config_path, "JSON configuration; built-in defaults when omitted");
    app.add_option("--seed", seed, "optimizer seed");
    app.add_option("--weeks", weeks, "simulate only the first N weeks")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory");

    DesignFlags sim_flags, base_flags;
    auto* sim = app.add_subcommand("simulate", "optimized dispatch of one design");
    add_design_flags(sim, sim_flags);
    auto* base = app.add_subcommand("baseline", "uncontrolled charging reference for one design");
    add_design_flags(base, base_flags);

    std::optional<int> budget, n_init;
    auto* opt = app.add_subcommand("optimize", "size the components by Bayesian optimization");
    opt->add_option("--budget", budget, "number of evaluations")->check(CLI::PositiveNumber);
    opt->add_option("--n-init", n_init, "random designs before the model takes over")->check(CLI::PositiveNumber);

    std::string report_dir, report_day = "Mon";
    int report_week = 1, report_days = 2;
    bool report_baseline = false;
    auto* rep = app.add_subcommand("report", "two-day window and cost summary from written results");
    rep->add_option("--in", report_dir, "results directory (default: the configured output directory)");
    rep->add_option("--week", report_week, "week number, starting at 1")->check(CLI::PositiveNumber);
    rep->add_option("--day", report_day, "first day of the window (Mon..Sun)");
    rep->add_option("--days", report_days, "window length in days")->check(CLI::PositiveNumber);
    rep->add_flag("--baseline", report_baseline, "read the baseline results");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed) cfg.optimizer.seed = *seed;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (budget) cfg.optimizer.budget = *budget;
        if (n_init) cfg.optimizer.n_init = *n_init;
        if (budget && !n_init) cfg.optimizer.n_init = std::min(cfg.optimizer.n_init, *budget);
        if (*sim) return simulate(cfg, weeks, sim_flags, false, out);
        if (*base) return simulate(cfg, weeks, base_flags, true, out);
        if (*opt) return optimize(cfg, weeks, out);
        if (*rep) return report(report_dir.empty() ? cfg.output_dir : report_dir, report_baseline, report_week, report_day, report_days, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace v2g::app
