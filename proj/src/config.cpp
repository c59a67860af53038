#include "ctsid/config.hpp"

#include "json.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace ctsid {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + where + ": " + what);
}

void check_object(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    check_object(j, where);
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(where, "unknown key '" + item.key() + "'");
    }
}

double get_num(const json& sec, const std::string& where, const char* key) {
    if (!sec.contains(key)) fail(where, std::string("missing key '") + key + "'");
    const json& v = sec.at(key);
    if (!v.is_number()) fail(where + "." + key, "expected a number");
    return v.get<double>();
}

double get_num_or(const json& sec, const std::string& where, const char* key, double fallback) {
    return sec.contains(key) ? get_num(sec, where, key) : fallback;
}

long long get_int(const json& sec, const std::string& where, const char* key) {
    if (!sec.contains(key)) fail(where, std::string("missing key '") + key + "'");
    const json& v = sec.at(key);
    if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
    return v.get<long long>();
}

long long get_int_or(const json& sec, const std::string& where, const char* key,
                     long long fallback) {
    return sec.contains(key) ? get_int(sec, where, key) : fallback;
}

bool get_bool_or(const json& sec, const std::string& where, const char* key, bool fallback) {
    if (!sec.contains(key)) return fallback;
    const json& v = sec.at(key);
    if (!v.is_boolean()) fail(where + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string get_str(const json& sec, const std::string& where, const char* key) {
    if (!sec.contains(key)) fail(where, std::string("missing key '") + key + "'");
    const json& v = sec.at(key);
    if (!v.is_string()) fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

Eigen::VectorXd get_vector(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const auto& e : v) {
        if (!e.is_number()) fail(where, "expected an array of numbers");
        out[i++] = e.get<double>();
    }
    return out;
}

SignalSpec parse_signal(const json& j, const std::string& where) {
    check_object(j, where);
    const std::string kind = get_str(j, where, "kind");
    SignalSpec s;
    if (kind == "zero") {
        check_keys(j, where, {"kind"});
        s = SignalSpec::zero();
    } else if (kind == "constant") {
        check_keys(j, where, {"kind", "value"});
        s = SignalSpec::constant(get_num(j, where, "value"));
    } else if (kind == "square_wave") {
        check_keys(j, where, {"kind", "amplitude", "period"});
        s = SignalSpec::square_wave(get_num(j, where, "amplitude"), get_num(j, where, "period"));
    } else if (kind == "zoh_gaussian") {
        check_keys(j, where, {"kind", "mean", "stddev", "hold"});
        s = SignalSpec::zoh_gaussian(get_num(j, where, "mean"), get_num(j, where, "stddev"),
                                     get_num(j, where, "hold"));
    } else {
        fail(where + ".kind", "unknown signal kind '" + kind + "'");
    }
    try {
        s.validate();
    } catch (const std::exception& ex) {
        fail(where, ex.what());
    }
    return s;
}

TransferFunction parse_tf(const json& j, const std::string& where) {
    check_keys(j, where, {"num_descending", "den_descending"});
    if (!j.contains("num_descending") || !j.contains("den_descending"))
        fail(where, "needs num_descending and den_descending");
    const Eigen::VectorXd num = get_vector(j.at("num_descending"), where + ".num_descending");
    const Eigen::VectorXd den = get_vector(j.at("den_descending"), where + ".den_descending");
    if (num.size() == 0 || den.size() == 0) fail(where, "coefficient arrays must be non-empty");
    try {
        TransferFunction tf = TransferFunction::from_descending(num, den);
        if (!tf.is_zero()) tf.normalized();  // rejects improper models up front
        return tf;
    } catch (const std::exception& ex) {
        fail(where, ex.what());
    }
}

PoleSet parse_poles(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of [re, im] pairs");
    std::vector<std::complex<double>> poles;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            fail(where, "each pole must be a [re, im] pair");
        poles.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    PoleSet ps(std::move(poles));
    try {
        ps.validate();  // conjugate-closed + strictly stable; never auto-completed
    } catch (const std::exception& ex) {
        fail(where, ex.what());
    }
    return ps;
}

PredictorKind parse_predictor(const json& j, const std::string& where, const ModelStructure& ms) {
    check_object(j, where);
    const std::string kind = get_str(j, where, "kind");
    PredictorKind pk;
    if (kind == "oe") {
        check_keys(j, where, {"kind", "pin_initial_states"});
        pk = PredictorKind::oe();
    } else if (kind == "stabilized_oe") {
        check_keys(j, where, {"kind", "virtual_controller", "pin_initial_states"});
        if (!j.contains("virtual_controller")) fail(where, "stabilized_oe needs virtual_controller");
        pk = PredictorKind::stabilized_oe(
            parse_tf(j.at("virtual_controller"), where + ".virtual_controller"));
    } else if (kind == "fixed_pole_observer" || kind == "fixed_pole_extended_observer") {
        check_keys(j, where, {"kind", "poles", "pin_initial_states"});
        if (!j.contains("poles")) fail(where, kind + " needs poles");
        const PoleSet ps = parse_poles(j.at("poles"), where + ".poles");
        pk = (kind == "fixed_pole_observer") ? PredictorKind::fixed_pole_observer(ps)
                                             : PredictorKind::fixed_pole_extended_observer(ps);
    } else if (kind == "free_gain_observer") {
        check_keys(j, where, {"kind", "gain0", "pin_initial_states"});
        if (!j.contains("gain0")) fail(where, "free_gain_observer needs gain0");
        pk = PredictorKind::free_gain_observer(get_vector(j.at("gain0"), where + ".gain0"));
    } else {
        fail(where + ".kind", "unknown predictor kind '" + kind + "'");
    }
    pk.pin_initial_states = get_bool_or(j, where, "pin_initial_states", false);
    try {
        pk.validate(ms);
    } catch (const std::exception& ex) {
        fail(where, ex.what());
    }
    return pk;
}

json signal_to_json(const SignalSpec& s) {
    switch (s.kind) {
        case SignalSpec::Kind::zero:
            return {{"kind", "zero"}};
        case SignalSpec::Kind::constant:
            return {{"kind", "constant"}, {"value", s.value}};
        case SignalSpec::Kind::square_wave:
            return {{"kind", "square_wave"}, {"amplitude", s.amplitude}, {"period", s.period}};
        case SignalSpec::Kind::zoh_gaussian:
            return {{"kind", "zoh_gaussian"},
                    {"mean", s.mean},
                    {"stddev", s.stddev},
                    {"hold", s.hold}};
    }
    throw ConfigError("config: unhandled signal kind");
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json tf_to_json(const TransferFunction& tf) {
    return {{"num_descending", vector_to_json(tf.num.descending())},
            {"den_descending", vector_to_json(tf.den.descending())}};
}

json predictor_to_json(const PredictorKind& pk) {
    json j{{"kind", pk.name()}};
    if (pk.pin_initial_states) j["pin_initial_states"] = true;
    switch (pk.type) {
        case PredictorType::oe:
            break;
        case PredictorType::stabilized_oe:
            j["virtual_controller"] = tf_to_json(pk.virtual_controller);
            break;
        case PredictorType::fixed_pole_observer:
        case PredictorType::fixed_pole_extended_observer: {
            json poles = json::array();
            for (const auto& p : pk.p_ob.poles) poles.push_back({p.real(), p.imag()});
            j["poles"] = poles;
            break;
        }
        case PredictorType::free_gain_observer:
            j["gain0"] = vector_to_json(pk.gain0);
            break;
    }
    return j;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& ex) {
        throw ConfigError(std::string("config: not valid JSON: ") + ex.what());
    }
    check_keys(j, "top level",
               {"model", "plant", "controller", "signals", "sampling", "predictor", "optimizer",
                "experiment", "output"});
    RunConfig cfg;

    if (!j.contains("model")) fail("top level", "missing required section 'model'");
    const json& m = j.at("model");
    check_keys(m, "model", {"n", "m"});
    try {
        cfg.ms = ModelStructure(static_cast<int>(get_int(m, "model", "n")),
                                static_cast<int>(get_int(m, "model", "m")));
    } catch (const std::exception& ex) {
        fail("model", ex.what());
    }

    if (j.contains("plant")) {
        const json& p = j.at("plant");
        check_keys(p, "plant", {"theta"});
        if (!p.contains("theta")) fail("plant", "missing key 'theta'");
        Eigen::VectorXd th = get_vector(p.at("theta"), "plant.theta");
        if (th.size() != cfg.ms.n_theta())
            fail("plant.theta", "expected " + std::to_string(cfg.ms.n_theta()) +
                                    " entries, got " + std::to_string(th.size()));
        cfg.theta = std::move(th);
    }

    cfg.controller = TransferFunction::zero();
    if (j.contains("controller")) cfg.controller = parse_tf(j.at("controller"), "controller");

    cfg.r_u = cfg.r_y = cfg.w = cfg.eta = SignalSpec::zero();
    if (j.contains("signals")) {
        const json& s = j.at("signals");
        check_keys(s, "signals", {"r_u", "r_y", "w", "eta"});
        if (s.contains("r_u")) cfg.r_u = parse_signal(s.at("r_u"), "signals.r_u");
        if (s.contains("r_y")) cfg.r_y = parse_signal(s.at("r_y"), "signals.r_y");
        if (s.contains("w")) cfg.w = parse_signal(s.at("w"), "signals.w");
        if (s.contains("eta")) cfg.eta = parse_signal(s.at("eta"), "signals.eta");
    }

    if (j.contains("sampling")) {
        const json& s = j.at("sampling");
        check_keys(s, "sampling", {"h", "N", "warmup"});
        cfg.has_sampling = true;
        cfg.h = get_num(s, "sampling", "h");
        if (!(cfg.h > 0.0)) fail("sampling.h", "must be > 0");
        cfg.N = get_int(s, "sampling", "N");
        if (cfg.N < 1) fail("sampling.N", "must be >= 1");
        cfg.warmup = get_int_or(s, "sampling", "warmup", 0);
        if (cfg.warmup < 0) fail("sampling.warmup", "must be >= 0");
    }

    if (j.contains("predictor"))
        cfg.kind = parse_predictor(j.at("predictor"), "predictor", cfg.ms);

    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        check_keys(o, "optimizer",
                   {"max_iterations", "cost_tolerance", "step_tolerance", "lambda0", "lambda_up",
                    "lambda_down", "fd_rel_step", "ee_starts", "random_starts", "theta0"});
        cfg.opts.max_iterations =
            static_cast<int>(get_int_or(o, "optimizer", "max_iterations", cfg.opts.max_iterations));
        cfg.opts.cost_tolerance =
            get_num_or(o, "optimizer", "cost_tolerance", cfg.opts.cost_tolerance);
        cfg.opts.step_tolerance =
            get_num_or(o, "optimizer", "step_tolerance", cfg.opts.step_tolerance);
        cfg.opts.lambda0 = get_num_or(o, "optimizer", "lambda0", cfg.opts.lambda0);
        cfg.opts.lambda_up = get_num_or(o, "optimizer", "lambda_up", cfg.opts.lambda_up);
        cfg.opts.lambda_down = get_num_or(o, "optimizer", "lambda_down", cfg.opts.lambda_down);
        cfg.opts.fd_rel_step = get_num_or(o, "optimizer", "fd_rel_step", cfg.opts.fd_rel_step);
        try {
            cfg.opts.validate();
        } catch (const std::exception& ex) {
            fail("optimizer", ex.what());
        }
        cfg.ee_starts = static_cast<int>(get_int_or(o, "optimizer", "ee_starts", 1));
        cfg.random_starts = static_cast<int>(get_int_or(o, "optimizer", "random_starts", 1));
        if (cfg.ee_starts < 0 || cfg.random_starts < 0)
            fail("optimizer", "start counts must be >= 0");
        if (o.contains("theta0")) {
            const json& t0 = o.at("theta0");
            if (!t0.is_array()) fail("optimizer.theta0", "expected an array of start vectors");
            for (const auto& e : t0) {
                Eigen::VectorXd th = get_vector(e, "optimizer.theta0");
                if (th.size() != cfg.ms.n_theta())
                    fail("optimizer.theta0", "each start needs " +
                                                 std::to_string(cfg.ms.n_theta()) + " entries");
                cfg.explicit_starts.push_back(std::move(th));
            }
        }
    }

    if (j.contains("experiment")) {
        const json& e = j.at("experiment");
        check_keys(e, "experiment", {"trials", "base_seed", "sweep_real_parts"});
        cfg.trials = static_cast<int>(get_int_or(e, "experiment", "trials", cfg.trials));
        if (cfg.trials < 1) fail("experiment.trials", "must be >= 1");
        if (e.contains("base_seed")) {
            const json& v = e.at("base_seed");
            const bool ok =
                v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
            if (!ok) fail("experiment.base_seed", "expected a 64-bit unsigned integer");
            cfg.base_seed = v.get<std::uint64_t>();
        }
        if (e.contains("sweep_real_parts")) {
            const Eigen::VectorXd rp =
                get_vector(e.at("sweep_real_parts"), "experiment.sweep_real_parts");
            cfg.sweep_real_parts.assign(rp.data(), rp.data() + rp.size());
        }
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        check_keys(o, "output", {"shadows", "omega_lo", "omega_hi", "omega_points"});
        cfg.shadows = get_bool_or(o, "output", "shadows", cfg.shadows);
        cfg.omega_lo = get_num_or(o, "output", "omega_lo", cfg.omega_lo);
        cfg.omega_hi = get_num_or(o, "output", "omega_hi", cfg.omega_hi);
        cfg.omega_points = get_int_or(o, "output", "omega_points", cfg.omega_points);
        if (!(cfg.omega_lo > 0.0) || !(cfg.omega_hi > cfg.omega_lo) || cfg.omega_points < 2)
            fail("output", "need 0 < omega_lo < omega_hi and omega_points >= 2");
    }

    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

Scenario RunConfig::to_scenario(bool need_predictor) const {
    if (!theta) throw ConfigError("config: plant.theta is required for this command");
    if (!has_sampling) throw ConfigError("config: sampling section is required for this command");
    if (need_predictor && !kind)
        throw ConfigError("config: predictor section is required for this command");
    Scenario sc;
    sc.name = "config";
    sc.ms = ms;
    sc.theta_star = *theta;
    sc.controller = controller;
    sc.r_u = r_u;
    sc.r_y = r_y;
    sc.w = w;
    sc.eta = eta;
    sc.h = h;
    sc.N = N;
    sc.warmup = warmup;
    if (kind) sc.kind = *kind;
    sc.default_trials = trials;
    sc.base_seed = base_seed;
    sc.ee_starts = ee_starts;
    sc.random_starts = random_starts;
    return sc;
}

RunConfig config_from_scenario(const Scenario& sc) {
    RunConfig cfg;
    cfg.ms = sc.ms;
    cfg.theta = sc.theta_star;
    cfg.controller = sc.controller;
    cfg.r_u = sc.r_u;
    cfg.r_y = sc.r_y;
    cfg.w = sc.w;
    cfg.eta = sc.eta;
    cfg.has_sampling = true;
    cfg.h = sc.h;
    cfg.N = sc.N;
    cfg.warmup = sc.warmup;
    cfg.kind = sc.kind;
    cfg.trials = sc.default_trials;
    cfg.base_seed = sc.base_seed;
    cfg.ee_starts = sc.ee_starts;
    cfg.random_starts = sc.random_starts;
    cfg.sweep_real_parts = {-0.5, -3.0, -10.0};
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["model"] = {{"n", cfg.ms.n}, {"m", cfg.ms.m}};
    if (cfg.theta) j["plant"] = {{"theta", vector_to_json(*cfg.theta)}};
    j["controller"] = tf_to_json(cfg.controller);
    j["signals"] = {{"r_u", signal_to_json(cfg.r_u)},
                    {"r_y", signal_to_json(cfg.r_y)},
                    {"w", signal_to_json(cfg.w)},
                    {"eta", signal_to_json(cfg.eta)}};
    if (cfg.has_sampling)
        j["sampling"] = {{"h", cfg.h}, {"N", cfg.N}, {"warmup", cfg.warmup}};
    if (cfg.kind) j["predictor"] = predictor_to_json(*cfg.kind);
    j["optimizer"] = {{"max_iterations", cfg.opts.max_iterations},
                      {"cost_tolerance", cfg.opts.cost_tolerance},
                      {"step_tolerance", cfg.opts.step_tolerance},
                      {"lambda0", cfg.opts.lambda0},
                      {"lambda_up", cfg.opts.lambda_up},
                      {"lambda_down", cfg.opts.lambda_down},
                      {"fd_rel_step", cfg.opts.fd_rel_step},
                      {"ee_starts", cfg.ee_starts},
                      {"random_starts", cfg.random_starts}};
    j["experiment"] = {{"trials", cfg.trials},
                       {"base_seed", cfg.base_seed},
                       {"sweep_real_parts", cfg.sweep_real_parts}};
    j["output"] = {{"shadows", cfg.shadows},
                   {"omega_lo", cfg.omega_lo},
                   {"omega_hi", cfg.omega_hi},
                   {"omega_points", cfg.omega_points}};
    return j.dump(2) + "\n";
}

}  // namespace ctsid
