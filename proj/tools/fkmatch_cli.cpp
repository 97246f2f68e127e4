// fkmatch command line: transform evaluation, simulation runs, identity
// verification and the full suite, with JSON/CSV reports. All numerics go
// through the fkmatch C API.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <fkmatch/fkmatch.h>

namespace {

using nlohmann::json;

constexpr const char* kSchemaVersion = "1";

struct CliError {
    int exit_code;
    std::string message;
};

int exit_code_for(fk_status s) {
    switch (s) {
        case FK_OK: return 0;
        case FK_ERR_INVALID_ARGUMENT:
        case FK_ERR_PARSE:
        case FK_ERR_DOMAIN: return 2;
        default: return 3;
    }
}

void require_ok(fk_status s) {
    if (s != FK_OK) throw CliError{exit_code_for(s), fk_last_error()};
}

struct Options {
    std::string command;
    std::string process;
    double x = 1.0;
    std::string delta;
    std::string theta;
    double alpha = 1.0;
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;
    std::string preset = "sqrt2x";
    double t = 1.0;
    double lambda = 1.0;
    double gamma = 0.0;
    std::uint64_t paths = 0;
    double dt = 0.0;
    std::uint64_t seed = 20140309;
    std::string scheme = "auto";
    std::string identity;
    std::string out_path;
    std::string format = "json";
    bool json_errors = false;
    std::string config_path;
};

json number_or_expression(const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() && *end == '\0') return v;
    return text;
}

json process_json(const Options& opt) {
    json j;
    j["family"] = opt.process;
    if (opt.process == "gbesq1") {
        j["x"] = opt.x;
        j["delta"] = number_or_expression(opt.delta.empty() ? "2" : opt.delta);
    } else if (opt.process == "gbesq2") {
        j["x"] = opt.x;
        j["delta"] = number_or_expression(opt.delta.empty() ? "1" : opt.delta);
        j["theta"] = number_or_expression(opt.theta.empty() ? "0" : opt.theta);
    } else if (opt.process == "srou") {
        j["x"] = opt.x;
        j["delta"] = opt.delta.empty() ? 2.0 : std::strtod(opt.delta.c_str(), nullptr);
        j["alpha"] = opt.alpha;
    } else if (opt.process == "bridge") {
        j["x"] = opt.x;
        j["delta"] = opt.delta.empty() ? 2.0 : std::strtod(opt.delta.c_str(), nullptr);
    } else if (opt.process == "pgsce") {
        j["x"] = opt.x;
        j["c"] = opt.c;
    } else if (opt.process == "baff") {
        j["x"] = opt.x;
        j["a"] = opt.a;
        j["b"] = opt.b;
    } else if (opt.process == "cosh") {
        // no parameters
    } else if (opt.process == "geom") {
        j["x"] = opt.x;
        j["preset"] = opt.preset;
    } else if (opt.process == "jacobi") {
        j["x"] = opt.x;
        j["a"] = opt.a;
        j["b"] = opt.b;
    } else {
        throw CliError{2, "unknown process family '" + opt.process + "'"};
    }
    return j;
}

fk_scheme scheme_from(const std::string& name) {
    if (name == "auto") return FK_SCHEME_AUTO;
    if (name == "full_truncation") return FK_SCHEME_EULER_FULL_TRUNCATION;
    if (name == "reciprocal") return FK_SCHEME_EULER_RECIPROCAL;
    if (name == "exact_terminal") return FK_SCHEME_EXACT_BESQ_TERMINAL;
    throw CliError{2, "unknown scheme '" + name + "'"};
}

std::optional<std::uint64_t> budget_from_env() {
    if (const char* env = std::getenv("FKMATCH_BUDGET")) {
        const double v = std::strtod(env, nullptr);
        if (v > 0) return static_cast<std::uint64_t>(v);
    }
    return std::nullopt;
}

void enforce_budget(std::uint64_t paths, double t, double dt) {
    const auto budget = budget_from_env();
    if (!budget) return;
    const auto steps =
        static_cast<std::uint64_t>(paths * std::max(1.0, std::floor(t / dt)));
    if (steps > *budget)
        throw CliError{3, "requested " + std::to_string(steps) +
                              " simulated steps exceed FKMATCH_BUDGET=" +
                              std::to_string(*budget)};
}

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { fk_string_free(ptr); }
};

struct OwnedProcess {
    fk_process* ptr = nullptr;
    ~OwnedProcess() { fk_process_free(ptr); }
};

json metadata() {
    json m;
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    m["timestamp"] = buf;
    m["version"] = fk_version();
    const char* workers = std::getenv("FKMATCH_WORKERS");
    m["workers"] = workers ? workers : "auto";
    return m;
}

// The report's results/ledger/config sections are deterministic for a fixed
// config (seed included); volatile fields live only under "metadata".
json report_envelope(const std::string& command, json config, json results,
                     json ledger = json::array()) {
    json report;
    report["schema_version"] = kSchemaVersion;
    report["command"] = command;
    report["config"] = std::move(config);
    report["results"] = std::move(results);
    report["ledger"] = std::move(ledger);
    report["metadata"] = metadata();
    return report;
}

std::string results_csv(const json& results) {
    std::ostringstream out;
    out.precision(17);
    out << "id,verdict,lhs,lhs_se,rhs,rhs_se,z,residual\n";
    for (const auto& r : results) {
        out << r.value("id", std::string("-")) << ','
            << r.value("verdict", std::string("-")) << ','
            << r["lhs"].value("value", 0.0) << ',' << r["lhs"].value("std_error", 0.0)
            << ',' << r["rhs"].value("value", 0.0) << ','
            << r["rhs"].value("std_error", 0.0) << ',' << r.value("z", 0.0) << ','
            << r.value("residual", 0.0) << '\n';
    }
    return out.str();
}

std::string values_csv(const json& results) {
    std::ostringstream out;
    out.precision(17);
    out << "t,lambda,gamma,value\n";
    for (const auto& r : results)
        out << r["t"].get<double>() << ',' << r["lambda"].get<double>() << ','
            << r.value("gamma", 0.0) << ',' << r["value"].get<double>() << '\n';
    return out.str();
}

void emit(const Options& opt, const json& report, bool table_style) {
    if (opt.out_path.empty()) return;
    std::ofstream file(opt.out_path);
    if (!file) throw CliError{2, "cannot open output file '" + opt.out_path + "'"};
    if (opt.format == "json") {
        file << report.dump(2) << '\n';
    } else if (opt.format == "csv") {
        file << (table_style ? results_csv(report["results"])
                             : values_csv(report["results"]));
    } else {
        throw CliError{2, "unknown format '" + opt.format + "'"};
    }
}

json identity_overrides(const Options& opt, const json& extra_params) {
    json j = json::object();
    if (opt.paths != 0) j["paths"] = opt.paths;
    if (opt.dt != 0.0) j["dt"] = opt.dt;
    j["seed"] = opt.seed;
    if (!extra_params.empty()) j["params"] = extra_params;
    return j;
}

int run_laplace(const Options& opt, bool joint) {
    const json spec = process_json(opt);
    OwnedProcess proc;
    require_ok(fk_process_create(spec.dump().c_str(), &proc.ptr));
    double value = 0.0;
    if (joint)
        require_ok(fk_joint_laplace(proc.ptr, opt.t, opt.lambda, opt.gamma, &value));
    else
        require_ok(fk_laplace_marginal(proc.ptr, opt.t, opt.lambda, &value));

    std::cout << std::setprecision(12) << value << '\n';

    json config{{"process", spec},
                {"query", {{"t", opt.t}, {"lambda", opt.lambda}, {"gamma", joint ? opt.gamma : 0.0}}}};
    json row{{"t", opt.t}, {"lambda", opt.lambda}, {"value", value}};
    if (joint) row["gamma"] = opt.gamma;
    emit(opt, report_envelope(joint ? "joint" : "laplace", config,
                              json::array({row})),
         false);
    return 0;
}

int run_simulate(const Options& opt) {
    const json spec = process_json(opt);
    OwnedProcess proc;
    require_ok(fk_process_create(spec.dump().c_str(), &proc.ptr));
    const std::uint64_t paths = opt.paths ? opt.paths : 100000;
    const double dt = opt.dt != 0.0 ? opt.dt : 1e-3;
    enforce_budget(paths, opt.t, dt);
    fk_sim_config cfg{opt.t, dt, paths, opt.seed, scheme_from(opt.scheme)};
    fk_mc_estimate est{};
    require_ok(fk_mc_exp_functional(proc.ptr, &cfg, opt.lambda, opt.gamma, &est));

    std::cout << std::setprecision(12) << est.mean << " +- " << est.std_error
              << "  (paths=" << est.n_paths << ", flagged=" << est.flagged << ")\n";

    json config{{"process", spec},
                {"query", {{"t", opt.t}, {"lambda", opt.lambda}, {"gamma", opt.gamma}}},
                {"sim",
                 {{"paths", paths}, {"dt", dt}, {"seed", opt.seed}, {"scheme", opt.scheme}}}};
    json row{{"t", opt.t},     {"lambda", opt.lambda},       {"gamma", opt.gamma},
             {"mean", est.mean}, {"std_error", est.std_error}, {"n_paths", est.n_paths},
             {"flagged", est.flagged}};
    emit(opt, report_envelope("simulate", config, json::array({row})), true);
    return 0;
}

int run_verify(const Options& opt, const json& extra_params) {
    if (opt.identity.empty()) throw CliError{2, "verify requires --identity"};
    const json overrides = identity_overrides(opt, extra_params);
    OwnedString report;
    require_ok(
        fk_check_identity(opt.identity.c_str(), overrides.dump().c_str(), &report.ptr));
    const json rep = json::parse(report.ptr);

    const std::string verdict = rep.value("verdict", "?");
    std::cout << rep.value("id", opt.identity) << ": " << verdict;
    if (rep.contains("z") && !rep["lhs"].value("exact", true))
        std::cout << "  (z = " << rep["z"].get<double>() << ")";
    std::cout << '\n';

    json config{{"identity", opt.identity}, {"overrides", overrides}};
    json results = json::array();
    json ledger = json::array();
    (verdict == "ledger" ? ledger : results).push_back(rep);
    emit(opt, report_envelope("verify", config, results, ledger), true);
    if (verdict == "pass" || verdict == "ledger") return 0;
    return verdict == "fail" ? 1 : 3;
}

int run_suite(const Options& opt) {
    const json overrides = identity_overrides(opt, json::object());
    OwnedString report;
    require_ok(fk_run_suite(overrides.dump().c_str(), &report.ptr));
    const json rep = json::parse(report.ptr);

    bool any_failed = false;
    std::cout << std::left;
    for (const auto& r : rep["results"]) {
        const std::string verdict = r.value("verdict", "?");
        if (verdict != "pass") any_failed = true;
        std::cout << "  " << std::setw(24) << r.value("id", std::string("?")) << verdict;
        if (!r["lhs"].value("exact", true) || !r["rhs"].value("exact", true))
            std::cout << "  z=" << std::setprecision(3) << r.value("z", 0.0);
        std::cout << '\n';
    }
    for (const auto& r : rep["ledger"])
        std::cout << "  " << std::setw(24) << r.value("id", std::string("?"))
                  << "ledger  " << r.value("detail", std::string()) << '\n';

    json config{{"overrides", overrides}};
    emit(opt, report_envelope("suite", config, rep["results"], rep["ledger"]), true);
    return any_failed ? 1 : 0;
}

void apply_config_file(Options& opt, json& identity_params) {
    std::ifstream file(opt.config_path);
    if (!file) throw CliError{2, "cannot open config file '" + opt.config_path + "'"};
    json cfg;
    try {
        cfg = json::parse(file);
    } catch (const json::exception& e) {
        throw CliError{2, std::string("config parse error: ") + e.what()};
    }
    // schema: docs/config_schema.json; unknown keys rejected
    for (const auto& [key, value] : cfg.items()) {
        (void)value;
        static const std::vector<std::string> allowed = {
            "command", "process", "query", "sim", "identity", "identity_params",
            "output"};
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw CliError{2, "config: unknown key '" + key + "'"};
    }
    try {
        if (cfg.contains("command")) opt.command = cfg["command"].get<std::string>();
        if (cfg.contains("process")) {
            const json& p = cfg["process"];
            opt.process = p.at("family").get<std::string>();
            if (p.contains("x")) opt.x = p["x"].get<double>();
            const auto text_of = [](const json& v) {
                return v.is_string() ? v.get<std::string>() : v.dump();
            };
            if (p.contains("delta")) opt.delta = text_of(p["delta"]);
            if (p.contains("theta")) opt.theta = text_of(p["theta"]);
            if (p.contains("alpha")) opt.alpha = p["alpha"].get<double>();
            if (p.contains("a")) opt.a = p["a"].get<double>();
            if (p.contains("b")) opt.b = p["b"].get<double>();
            if (p.contains("c")) opt.c = p["c"].get<double>();
            if (p.contains("preset")) opt.preset = p["preset"].get<std::string>();
        }
        if (cfg.contains("query")) {
            const json& q = cfg["query"];
            if (q.contains("t")) opt.t = q["t"].get<double>();
            if (q.contains("lambda")) opt.lambda = q["lambda"].get<double>();
            if (q.contains("gamma")) opt.gamma = q["gamma"].get<double>();
        }
        if (cfg.contains("sim")) {
            const json& s = cfg["sim"];
            if (s.contains("paths")) opt.paths = s["paths"].get<std::uint64_t>();
            if (s.contains("dt")) opt.dt = s["dt"].get<double>();
            if (s.contains("seed")) opt.seed = s["seed"].get<std::uint64_t>();
            if (s.contains("scheme")) opt.scheme = s["scheme"].get<std::string>();
        }
        if (cfg.contains("identity")) opt.identity = cfg["identity"].get<std::string>();
        if (cfg.contains("identity_params")) identity_params = cfg["identity_params"];
        if (cfg.contains("output")) {
            const json& o = cfg["output"];
            if (o.contains("format")) opt.format = o["format"].get<std::string>();
            if (o.contains("path")) opt.out_path = o["path"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw CliError{2, std::string("config validation error: ") + e.what()};
    }
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    json identity_params = json::object();

    CLI::App app{"Laplace transforms of squared-Bessel-type diffusions, verified "
                 "against Monte Carlo simulation"};
    app.require_subcommand(0, 1);
    app.add_flag("--json-errors", opt.json_errors,
                 "emit machine-readable errors on stderr");
    app.add_option("--config", opt.config_path, "JSON run configuration file");

    const auto add_common = [&](CLI::App* cmd, bool with_process, bool with_sim) {
        if (with_process) {
            cmd->add_option("--process", opt.process,
                            "family: gbesq1|gbesq2|srou|bridge|pgsce|baff|cosh|geom|jacobi");
            cmd->add_option("--x", opt.x, "initial state");
            cmd->add_option("--delta", opt.delta,
                            "dimension (number or expression in t)");
            cmd->add_option("--theta", opt.theta,
                            "drift rate (number or expression in t, <= 0)");
            cmd->add_option("--alpha", opt.alpha, "mean-reversion rate");
            cmd->add_option("--a", opt.a, "family parameter a");
            cmd->add_option("--b", opt.b, "family parameter b");
            cmd->add_option("--c", opt.c, "family parameter c");
            cmd->add_option("--preset", opt.preset, "geom preset (sqrt2x|gbm)");
        }
        cmd->add_option("--t", opt.t, "time");
        cmd->add_option("--lambda", opt.lambda, "transform variable");
        cmd->add_option("--gamma", opt.gamma, "integral weight");
        if (with_sim) {
            cmd->add_option("--paths", opt.paths, "number of Monte Carlo paths");
            cmd->add_option("--dt", opt.dt, "time step");
            cmd->add_option("--seed", opt.seed, "master seed");
            cmd->add_option("--scheme", opt.scheme,
                            "auto|full_truncation|reciprocal|exact_terminal");
        }
        cmd->add_option("--out", opt.out_path, "report file");
        cmd->add_option("--format", opt.format, "json|csv");
    };

    add_common(app.add_subcommand("laplace", "evaluate the marginal transform"), true,
               false);
    add_common(app.add_subcommand("joint", "evaluate the joint transform"), true,
               false);
    add_common(app.add_subcommand("simulate", "Monte Carlo estimate"), true, true);
    auto* verify_cmd =
        app.add_subcommand("verify", "check one identity against its oracle");
    verify_cmd->add_option("--identity", opt.identity, "identity name");
    add_common(verify_cmd, false, true);
    auto* suite_cmd = app.add_subcommand("suite", "run the whole identity catalog");
    add_common(suite_cmd, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (opt.json_errors)
            std::cerr << json{{"error", {{"code", 2}, {"message", e.what()}}}}.dump()
                      << '\n';
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!opt.config_path.empty()) apply_config_file(opt, identity_params);
        for (auto* sub : app.get_subcommands())
            opt.command = sub->get_name();
        if (opt.command.empty()) throw CliError{2, "no command given (see --help)"};

        if (opt.command == "laplace") return run_laplace(opt, false);
        if (opt.command == "joint") return run_laplace(opt, true);
        if (opt.command == "simulate") return run_simulate(opt);
        if (opt.command == "verify") return run_verify(opt, identity_params);
        if (opt.command == "suite") return run_suite(opt);
        throw CliError{2, "unknown command '" + opt.command + "'"};
    } catch (const CliError& e) {
        if (opt.json_errors)
            std::cerr << json{{"error", {{"code", e.exit_code}, {"message", e.message}}}}
                             .dump()
                      << '\n';
        else
            std::cerr << "error: " << e.message << '\n';
        return e.exit_code;
    } catch (const std::exception& e) {
        if (opt.json_errors)
            std::cerr << json{{"error", {{"code", 3}, {"message", e.what()}}}}.dump()
                      << '\n';
        else
            std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
