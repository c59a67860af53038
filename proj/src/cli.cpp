#include "ctsid/cli.hpp"

#include "ctsid/config.hpp"
#include "ctsid/csv.hpp"
#include "ctsid/discretize.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace ctsid {
namespace {

using json = nlohmann::json;

// Trivial-solution pattern thresholds (free-gain observer): the fit is flagged
// when the residual is a negligible fraction of the output power while the
// discretized innovation weight |C Gamma K| is near the one-step-tracker value
// of 1 (the gain, not the model, is eliminating the error).
constexpr double kTrivialResidualFraction = 1e-3;
constexpr double kTrivialInnovationWeight = 0.25;

struct CommonArgs {
    std::string config_path;
    std::string scenario;
};

void add_source_options(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "config JSON path");
    cmd->add_option("--scenario", a.scenario, "built-in scenario name (A, B, or C)");
}

RunConfig resolve_config(const CommonArgs& a) {
    if (a.config_path.empty() == a.scenario.empty())
        throw ConfigError("give exactly one of --config or --scenario");
    try {
        return a.config_path.empty() ? config_from_scenario(scenario_by_name(a.scenario))
                                     : load_config_file(a.config_path);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(ex.what());
    }
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

std::string sanitized(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '"' || c == '\n') c = ';';
    return s;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> theta_columns(Eigen::Index n) {
    std::vector<std::string> cols;
    for (Eigen::Index i = 0; i < n; ++i) cols.push_back("theta_" + std::to_string(i));
    return cols;
}

int input_error(const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
}

// --- simulate ---

int cmd_simulate(const CommonArgs& args, const std::string& out, long long trial,
                 bool no_shadows) {
    RunConfig cfg;
    Scenario sc;
    try {
        cfg = resolve_config(args);
        sc = cfg.to_scenario(false);
    } catch (const std::exception& ex) {
        return input_error(ex);
    }
    const bool shadows = cfg.shadows && !no_shadows;
    DataSet data;
    try {
        data = generate_trial_data(sc, static_cast<std::uint64_t>(trial), shadows);
    } catch (const DivergenceError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const std::exception& ex) {
        return input_error(ex);
    }
    try {
        write_dataset_csv(out, data);
    } catch (const std::exception& ex) {
        return input_error(ex);
    }
    json summary{{"command", "simulate"}, {"out", out},      {"rows", data.size()},
                 {"h", data.h},           {"shadows", shadows}, {"trial", trial}};
    std::cout << summary.dump() << "\n";
    return 0;
}

// --- identify ---

json start_table_json(const MultiStartResult& res) {
    json starts = json::array();
    for (const auto& s : res.starts) {
        json row{{"theta0", vec_json(s.theta0)},
                 {"feasible", s.feasible},
                 {"termination", s.termination}};
        row["cost"] = s.feasible ? json(s.cost) : json("infeasible");
        starts.push_back(std::move(row));
    }
    return starts;
}

int cmd_identify(const CommonArgs& args, const std::string& data_path, const std::string& out) {
    RunConfig cfg;
    DataSet data;
    try {
        cfg = resolve_config(args);
        if (!cfg.kind) throw ConfigError("config: predictor section is required for identify");
        if (!cfg.has_sampling) throw ConfigError("config: sampling section is required for identify");
        data = read_dataset_csv(data_path);
        if (std::abs(data.h - cfg.h) > 1e-6 * cfg.h)
            throw ConfigError("data sampling time " + std::to_string(data.h) +
                              " does not match config h = " + std::to_string(cfg.h));
        if (data.size() != cfg.N)
            throw ConfigError("data has " + std::to_string(data.size()) +
                              " samples, config N = " + std::to_string(cfg.N));
    } catch (const std::exception& ex) {
        return input_error(ex);
    }

    MultiStartResult res;
    try {
        const auto starts = cfg.explicit_starts.empty()
                                ? build_starts(cfg.ms, *cfg.kind, data, cfg.base_seed, 0,
                                               cfg.ee_starts, cfg.random_starts)
                                : cfg.explicit_starts;
        res = multi_start(cfg.ms, data, *cfg.kind, starts, cfg.opts);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    }
    const EstimationResult& best = res.best;

    json report{{"kind", cfg.kind->name()},
                {"theta", vec_json(best.theta)},
                {"x0", vec_json(best.x0)},
                {"cost", best.cost},
                {"iterations", best.iterations},
                {"accepted_steps", best.accepted_steps},
                {"termination", best.termination},
                {"cost_trace", best.cost_trace},
                {"best_start", res.best_index},
                {"starts", start_table_json(res)}};
    if (best.d0) report["d0"] = *best.d0;
    if (best.gain.size() > 0) report["gain"] = vec_json(best.gain);

    if (cfg.kind->type == PredictorType::free_gain_observer) {
        // Degenerate-optimum pattern: the estimated gain alone zeroes the
        // prediction error, carrying no plant information. At sampling time h
        // that optimum is a one-step output tracker whose innovation weight
        // |C Gamma K| is near 1, while placed-pole-scale gains sit far below.
        const double sy = (data.y.array() - data.y.mean()).square().sum();
        const double rf = sy > 0.0 ? best.cost / sy : 0.0;
        const StateSpace ss = realize_ccf(cfg.ms, best.theta);
        const Eigen::MatrixXd gk = zoh_discretize(ss.A, best.gain, data.h).second;
        const double alpha = std::abs((ss.C * gk)(0, 0));
        const bool flag = rf < kTrivialResidualFraction && alpha > kTrivialInnovationWeight;
        report["trivial_solution"] = flag;
        report["trivial_check"] = {{"residual_fraction", rf}, {"innovation_weight", alpha}};
    }

    try {
        std::ofstream f(out);
        if (!f) throw ConfigError("cannot open '" + out + "' for writing");
        f << report.dump(2) << "\n";
        if (!f) throw ConfigError("write to '" + out + "' failed");
    } catch (const std::exception& ex) {
        return input_error(ex);
    }

    json summary{{"command", "identify"},
                 {"out", out},
                 {"cost", best.cost},
                 {"termination", best.termination},
                 {"iterations", best.iterations}};
    if (report.contains("trivial_solution"))
        summary["trivial_solution"] = report["trivial_solution"];
    std::cout << summary.dump() << "\n";
    return best.termination == "max_iterations" ? 4 : 0;
}

// --- montecarlo ---

void write_trials_csv(const std::string& path, const TrialStats& st, Eigen::Index n_theta) {
    std::ofstream f(path);
    if (!f) throw CsvError(path + ": cannot open for writing");
    f << "trial,ok,start_index,cost,termination,error";
    for (Eigen::Index i = 0; i < n_theta; ++i) f << ",theta_" << i;
    f << "\n";
    for (const auto& r : st.records) {
        f << r.trial << "," << (r.ok ? 1 : 0) << "," << r.start_index << ","
          << (r.ok ? num(r.cost) : "") << "," << r.termination << "," << sanitized(r.error);
        for (Eigen::Index i = 0; i < n_theta; ++i) {
            f << ",";
            if (r.ok) f << num(r.theta[i]);
        }
        f << "\n";
    }
    if (!f) throw CsvError(path + ": write failed");
}

void write_stats_csv(const std::string& path, const TrialStats& st, Eigen::Index n_theta) {
    std::ofstream f(path);
    if (!f) throw CsvError(path + ": cannot open for writing");
    f << "parameter,median,q1,q3,min,max\n";
    if (st.theta_table.rows() > 0)
        for (Eigen::Index i = 0; i < n_theta; ++i)
            f << "theta_" << i << "," << num(st.median[i]) << "," << num(st.q1[i]) << ","
              << num(st.q3[i]) << "," << num(st.min[i]) << "," << num(st.max[i]) << "\n";
    if (!f) throw CsvError(path + ": write failed");
}

json stats_json(const TrialStats& st) {
    json s{{"failed", st.n_failed}, {"succeeded", st.theta_table.rows()}};
    if (st.theta_table.rows() > 0) {
        s["median"] = vec_json(st.median);
        s["q1"] = vec_json(st.q1);
        s["q3"] = vec_json(st.q3);
        s["min"] = vec_json(st.min);
        s["max"] = vec_json(st.max);
    }
    return s;
}

int cmd_montecarlo(const CommonArgs& args, const std::string& out_dir, long long trials_opt) {
    RunConfig cfg;
    Scenario sc;
    try {
        cfg = resolve_config(args);
        sc = cfg.to_scenario(true);
        std::filesystem::create_directories(out_dir);
    } catch (const std::exception& ex) {
        return input_error(ex);
    }
    const int trials = trials_opt > 0 ? static_cast<int>(trials_opt) : cfg.trials;
    TrialStats st;
    try {
        st = run_monte_carlo(sc, trials, cfg.opts);
        const std::filesystem::path dir(out_dir);
        write_trials_csv((dir / "trials.csv").string(), st, sc.ms.n_theta());
        write_table_csv((dir / "estimates.csv").string(), theta_columns(sc.ms.n_theta()),
                        st.theta_table);
        write_stats_csv((dir / "stats.csv").string(), st, sc.ms.n_theta());
    } catch (const std::exception& ex) {
        return input_error(ex);
    }
    json summary{{"command", "montecarlo"},
                 {"out_dir", out_dir},
                 {"trials", trials},
                 {"stats", stats_json(st)}};
    std::cout << summary.dump() << "\n";
    return 0;
}

// --- sweep ---

int cmd_sweep(const CommonArgs& args, const std::string& out_dir, long long trials_opt,
              std::vector<double> real_parts) {
    RunConfig cfg;
    Scenario sc;
    std::vector<SweepRow> rows;
    try {
        cfg = resolve_config(args);
        sc = cfg.to_scenario(true);
        std::filesystem::create_directories(out_dir);
        if (real_parts.empty()) real_parts = cfg.sweep_real_parts;
        if (real_parts.empty())
            throw ConfigError(
                "no sweep real parts (set experiment.sweep_real_parts or --real-parts)");
        const int trials = trials_opt > 0 ? static_cast<int>(trials_opt) : cfg.trials;
        rows = pole_sensitivity_sweep(sc, real_parts, trials, cfg.opts);
    } catch (const std::exception& ex) {
        return input_error(ex);
    }
    const Eigen::Index n_theta = sc.ms.n_theta();
    std::vector<std::string> cols = {"real_part", "n_failed"};
    for (const auto& c : theta_columns(n_theta)) cols.push_back("median_" + c);
    Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()), 2 + n_theta);
    json jrows = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto k = static_cast<Eigen::Index>(i);
        table(k, 0) = r.real_part;
        table(k, 1) = r.n_failed;
        if (r.median.size() == n_theta)
            table.row(k).tail(n_theta) = r.median.transpose();
        else
            table.row(k).tail(n_theta).setConstant(std::numeric_limits<double>::quiet_NaN());
        json jr{{"real_part", r.real_part}, {"n_failed", r.n_failed}};
        if (r.median.size() == n_theta) jr["median"] = vec_json(r.median);
        jrows.push_back(std::move(jr));
    }
    try {
        write_table_csv((std::filesystem::path(out_dir) / "sweep.csv").string(), cols, table);
    } catch (const std::exception& ex) {
        return input_error(ex);
    }
    json summary{{"command", "sweep"}, {"out_dir", out_dir}, {"rows", jrows}};
    std::cout << summary.dump() << "\n";
    return 0;
}

// --- bode ---

int cmd_bode(const CommonArgs& args, const std::string& out, const std::string& estimates_path) {
    RunConfig cfg;
    std::vector<Eigen::VectorXd> estimates;
    BodeTable bt;
    try {
        cfg = resolve_config(args);
        if (!cfg.theta) throw ConfigError("config: plant.theta is required for bode");
        if (!estimates_path.empty()) {
            const NumericTable t = read_table_csv(estimates_path);
            if (static_cast<Eigen::Index>(t.columns.size()) != cfg.ms.n_theta())
                throw ConfigError(estimates_path + ": expected " +
                                  std::to_string(cfg.ms.n_theta()) + " parameter columns");
            for (Eigen::Index i = 0; i < t.values.rows(); ++i)
                estimates.push_back(t.values.row(i).transpose());
        }
        const Eigen::VectorXd omega = log_grid(cfg.omega_lo, cfg.omega_hi, cfg.omega_points);
        bt = bode_table(theta_to_tf(cfg.ms, *cfg.theta), estimates, cfg.ms, omega);
        std::vector<std::string> cols = {"omega", "true_mag_db", "true_phase_deg"};
        Eigen::MatrixXd table(omega.size(), 3 + 2 * static_cast<Eigen::Index>(estimates.size()));
        table.col(0) = bt.omega;
        table.col(1) = bt.true_mag_db;
        table.col(2) = bt.true_phase_deg;
        for (std::size_t j = 0; j < estimates.size(); ++j) {
            cols.push_back("est" + std::to_string(j) + "_mag_db");
            cols.push_back("est" + std::to_string(j) + "_phase_deg");
            const auto k = static_cast<Eigen::Index>(j);
            table.col(3 + 2 * k) = bt.est_mag_db.col(k);
            table.col(4 + 2 * k) = bt.est_phase_deg.col(k);
        }
        write_table_csv(out, cols, table);
    } catch (const std::exception& ex) {
        return input_error(ex);
    }
    json summary{{"command", "bode"},
                 {"out", out},
                 {"rows", bt.omega.size()},
                 {"estimates", estimates.size()}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_print_config(const std::string& scenario) {
    try {
        std::cout << config_to_json(config_from_scenario(scenario_by_name(scenario)));
    } catch (const std::exception& ex) {
        return input_error(ex);
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"continuous-time system identification in closed loop"};
    app.require_subcommand(1);

    CommonArgs sim_args;
    std::string sim_out;
    long long sim_trial = 0;
    bool sim_no_shadows = false;
    auto* sim = app.add_subcommand("simulate", "generate a dataset CSV from a config");
    add_source_options(sim, sim_args);
    sim->add_option("--out", sim_out, "output CSV path")->required();
    sim->add_option("--trial", sim_trial, "trial index for the seed derivation (default 0)");
    sim->add_flag("--no-shadows", sim_no_shadows, "omit the noise-free shadow columns");

    CommonArgs id_args;
    std::string id_data, id_out;
    auto* ident = app.add_subcommand("identify", "estimate parameters from a dataset CSV");
    add_source_options(ident, id_args);
    ident->add_option("--data", id_data, "input dataset CSV")->required();
    ident->add_option("--out", id_out, "output report JSON path")->required();

    CommonArgs mc_args;
    std::string mc_dir;
    long long mc_trials = 0;
    auto* mc = app.add_subcommand("montecarlo", "run repeated trials and collect statistics");
    add_source_options(mc, mc_args);
    mc->add_option("--out-dir", mc_dir, "output directory")->required();
    mc->add_option("--trials", mc_trials, "override the configured trial count");

    CommonArgs sw_args;
    std::string sw_dir;
    long long sw_trials = 0;
    std::vector<double> sw_real_parts;
    auto* sw = app.add_subcommand("sweep", "repeat montecarlo across observer-pole real parts");
    add_source_options(sw, sw_args);
    sw->add_option("--out-dir", sw_dir, "output directory")->required();
    sw->add_option("--trials", sw_trials, "override the configured trial count");
    sw->add_option("--real-parts", sw_real_parts, "observer-pole real parts to sweep");

    CommonArgs bo_args;
    std::string bo_out, bo_estimates;
    auto* bo = app.add_subcommand("bode", "tabulate true/estimated frequency responses");
    add_source_options(bo, bo_args);
    bo->add_option("--out", bo_out, "output CSV path")->required();
    bo->add_option("--estimates", bo_estimates, "estimates CSV (montecarlo estimates.csv)");

    std::string pc_scenario;
    auto* pc = app.add_subcommand("print-config", "print a built-in scenario as config JSON");
    pc->add_option("--scenario", pc_scenario, "scenario name (A, B, or C)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (sim->parsed()) return cmd_simulate(sim_args, sim_out, sim_trial, sim_no_shadows);
    if (ident->parsed()) return cmd_identify(id_args, id_data, id_out);
    if (mc->parsed()) return cmd_montecarlo(mc_args, mc_dir, mc_trials);
    if (sw->parsed()) return cmd_sweep(sw_args, sw_dir, sw_trials, sw_real_parts);
    if (bo->parsed()) return cmd_bode(bo_args, bo_out, bo_estimates);
    if (pc->parsed()) return cmd_print_config(pc_scenario);
    return 2;
}

}  // namespace ctsid
