#include "fkmatch/fkmatch.h"

#include <cstring>
#include <string>

#include <json.hpp>

#include "catalog/process.hpp"
#include "errors.hpp"
#include "riccati/flow.hpp"
#include "sim/simulate.hpp"
#include "verify/identities.hpp"
#include "verify/report_json.hpp"

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

struct ProcessHandle {
    fkmatch::catalog::ProcessSpec spec;
};

fk_status classify(const std::exception& e) {
    using namespace fkmatch;
    if (dynamic_cast<const ParseError*>(&e)) return FK_ERR_PARSE;
    if (dynamic_cast<const DomainError*>(&e)) return FK_ERR_DOMAIN;
    if (dynamic_cast<const BudgetExceeded*>(&e)) return FK_ERR_BUDGET;
    if (dynamic_cast<const NotInvertible*>(&e)) return FK_ERR_NOT_INVERTIBLE;
    if (dynamic_cast<const OdeBlowUp*>(&e)) return FK_ERR_NUMERICAL;
    if (dynamic_cast<const NumericalError*>(&e)) return FK_ERR_NUMERICAL;
    if (dynamic_cast<const InvalidArgument*>(&e)) return FK_ERR_INVALID_ARGUMENT;
    if (dynamic_cast<const json::exception*>(&e)) return FK_ERR_PARSE;
    return FK_ERR_INTERNAL;
}

template <typename Fn>
fk_status wrap(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return FK_OK;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return classify(e);
    } catch (...) {
        g_last_error = "unknown error";
        return FK_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : allowed)
            if (key == k) ok = true;
        if (!ok) throw fkmatch::InvalidArgument("unknown key '" + key + "'");
    }
}

fkmatch::expr::TimeFunction time_function_from(const json& j, const char* key,
                                               double t_max = 64.0) {
    using fkmatch::expr::TimeFunction;
    const auto& v = j.at(key);
    if (v.is_number()) return TimeFunction::constant(v.get<double>());
    if (v.is_string()) return TimeFunction::expression(v.get<std::string>(), t_max);
    throw fkmatch::InvalidArgument(std::string("'") + key +
                                   "' must be a number or an expression string");
}

fkmatch::catalog::ProcessSpec spec_from_json(const std::string& text) {
    using namespace fkmatch;
    const json j = json::parse(text);
    if (!j.is_object()) throw InvalidArgument("process spec must be a JSON object");
    const std::string family = j.at("family").get<std::string>();
    if (family == "gbesq1") {
        reject_unknown_keys(j, {"family", "x", "delta"});
        return catalog::make_gbesq1(j.at("x").get<double>(),
                                    time_function_from(j, "delta"));
    }
    if (family == "gbesq2") {
        reject_unknown_keys(j, {"family", "x", "delta", "theta"});
        return catalog::make_gbesq2(j.at("x").get<double>(),
                                    time_function_from(j, "delta"),
                                    time_function_from(j, "theta"));
    }
    if (family == "srou") {
        reject_unknown_keys(j, {"family", "x", "delta", "alpha"});
        return catalog::make_srou(j.at("x").get<double>(), j.at("delta").get<double>(),
                                  j.at("alpha").get<double>());
    }
    if (family == "bridge") {
        reject_unknown_keys(j, {"family", "x", "delta"});
        return catalog::make_bridge(j.at("x").get<double>(),
                                    j.at("delta").get<double>());
    }
    if (family == "pgsce") {
        reject_unknown_keys(j, {"family", "x", "c"});
        return catalog::make_pgsce(j.at("x").get<double>(), j.at("c").get<double>());
    }
    if (family == "baff") {
        reject_unknown_keys(j, {"family", "x", "a", "b"});
        return catalog::make_baff(j.at("x").get<double>(), j.at("a").get<double>(),
                                  j.at("b").get<double>());
    }
    if (family == "cosh") {
        reject_unknown_keys(j, {"family"});
        return catalog::make_cosh_bm();
    }
    if (family == "geom") {
        reject_unknown_keys(j, {"family", "preset", "x"});
        return catalog::make_geom_assoc(j.at("preset").get<std::string>(),
                                        j.at("x").get<double>());
    }
    if (family == "jacobi") {
        reject_unknown_keys(j, {"family", "x", "a", "b"});
        return catalog::make_jacobi(j.at("x").get<double>(), j.at("a").get<double>(),
                                    j.at("b").get<double>());
    }
    throw InvalidArgument("unknown family '" + family + "'");
}

fkmatch::sim::SimConfig sim_config_from(const fk_sim_config* cfg) {
    if (cfg == nullptr) throw fkmatch::InvalidArgument("sim config is null");
    fkmatch::sim::SimConfig out;
    out.t_end = cfg->t_end;
    out.dt = cfg->dt;
    out.n_paths = cfg->n_paths;
    out.master_seed = cfg->seed;
    switch (cfg->scheme) {
        case FK_SCHEME_AUTO: out.scheme = fkmatch::sim::Scheme::auto_select; break;
        case FK_SCHEME_EULER_FULL_TRUNCATION:
            out.scheme = fkmatch::sim::Scheme::euler_full_truncation;
            break;
        case FK_SCHEME_EULER_RECIPROCAL:
            out.scheme = fkmatch::sim::Scheme::euler_reciprocal;
            break;
        case FK_SCHEME_EXACT_BESQ_TERMINAL:
            out.scheme = fkmatch::sim::Scheme::exact_besq_terminal;
            break;
        default: throw fkmatch::InvalidArgument("unknown scheme");
    }
    return out;
}

fkmatch::verify::IdentityConfig identity_config_from(const char* overrides_json) {
    fkmatch::verify::IdentityConfig cfg;
    if (overrides_json == nullptr || overrides_json[0] == '\0') return cfg;
    const json j = json::parse(overrides_json);
    reject_unknown_keys(j, {"paths", "dt", "seed", "params", "allow_rerun"});
    if (j.contains("paths")) cfg.paths = j.at("paths").get<std::uint64_t>();
    if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("allow_rerun")) cfg.allow_rerun = j.at("allow_rerun").get<bool>();
    if (j.contains("params"))
        for (const auto& [k, v] : j.at("params").items())
            cfg.params[k] = v.get<double>();
    if (const char* budget = std::getenv("FKMATCH_BUDGET")) {
        const double b = std::strtod(budget, nullptr);
        if (b > 0) cfg.max_total_steps = static_cast<std::uint64_t>(b);
    }
    return cfg;
}

void fill_estimate(const fkmatch::sim::MCEstimate& est, fk_mc_estimate* out) {
    out->mean = est.mean;
    out->std_error = est.std_error;
    out->n_paths = est.n_paths;
    out->flagged = est.flagged;
}

}  // namespace

extern "C" {

const char* fk_version(void) { return "0.1.0"; }

const char* fk_last_error(void) { return g_last_error.c_str(); }

fk_status fk_process_create(const char* spec_json, fk_process** out) {
    return wrap([&] {
        if (spec_json == nullptr || out == nullptr)
            throw fkmatch::InvalidArgument("null argument");
        auto handle = new ProcessHandle{spec_from_json(spec_json)};
        *out = reinterpret_cast<fk_process*>(handle);
    });
}

void fk_process_free(fk_process* p) { delete reinterpret_cast<ProcessHandle*>(p); }

fk_status fk_process_coefficients(const fk_process* p, double t, double x,
                                  double* drift, double* diffusion) {
    return wrap([&] {
        if (p == nullptr || drift == nullptr || diffusion == nullptr)
            throw fkmatch::InvalidArgument("null argument");
        const auto* h = reinterpret_cast<const ProcessHandle*>(p);
        const auto co = fkmatch::catalog::coefficients(h->spec, t, x);
        *drift = co.drift;
        *diffusion = co.diffusion;
    });
}

fk_status fk_laplace_marginal(const fk_process* p, double t, double lambda,
                              double* out) {
    return wrap([&] {
        if (p == nullptr || out == nullptr)
            throw fkmatch::InvalidArgument("null argument");
        const auto* h = reinterpret_cast<const ProcessHandle*>(p);
        *out = fkmatch::catalog::laplace_marginal(h->spec, t, lambda);
    });
}

fk_status fk_joint_laplace(const fk_process* p, double t, double lambda,
                           double gamma, double* out) {
    return wrap([&] {
        if (p == nullptr || out == nullptr)
            throw fkmatch::InvalidArgument("null argument");
        const auto* h = reinterpret_cast<const ProcessHandle*>(p);
        *out = fkmatch::riccati::joint_laplace(h->spec, t, lambda, gamma);
    });
}

fk_status fk_mc_exp_functional(const fk_process* p, const fk_sim_config* cfg,
                               double lambda, double gamma, fk_mc_estimate* out) {
    return wrap([&] {
        if (p == nullptr || out == nullptr)
            throw fkmatch::InvalidArgument("null argument");
        const auto* h = reinterpret_cast<const ProcessHandle*>(p);
        const auto est = fkmatch::sim::mc_expectation(
            h->spec, fkmatch::sim::PathFunctional::exp_terminal_integral(lambda, gamma),
            sim_config_from(cfg));
        fill_estimate(est, out);
    });
}

fk_status fk_mc_terminal_mean(const fk_process* p, const fk_sim_config* cfg,
                              fk_mc_estimate* out) {
    return wrap([&] {
        if (p == nullptr || out == nullptr)
            throw fkmatch::InvalidArgument("null argument");
        const auto* h = reinterpret_cast<const ProcessHandle*>(p);
        const auto est = fkmatch::sim::mc_expectation(
            h->spec, fkmatch::sim::PathFunctional::raw_terminal(), sim_config_from(cfg));
        fill_estimate(est, out);
    });
}

fk_status fk_sample_besq_terminal(double delta, double x0, double t, uint64_t seed,
                                  uint64_t stream_index, double* out) {
    return wrap([&] {
        if (out == nullptr) throw fkmatch::InvalidArgument("null argument");
        fkmatch::rng::RngStream stream(seed, stream_index);
        *out = fkmatch::sim::sample_besq_terminal(delta, x0, t, stream);
    });
}

fk_status fk_check_identity(const char* name, const char* overrides_json,
                            char** report_json) {
    return wrap([&] {
        if (name == nullptr || report_json == nullptr)
            throw fkmatch::InvalidArgument("null argument");
        const auto id = fkmatch::verify::identity_from_name(name);
        if (!id) throw fkmatch::InvalidArgument("unknown identity '" +
                                                std::string(name) + "'");
        const auto rep =
            fkmatch::verify::check_identity(*id, identity_config_from(overrides_json));
        *report_json = dup_string(fkmatch::verify::to_json(rep).dump());
    });
}

fk_status fk_run_suite(const char* overrides_json, char** report_json) {
    return wrap([&] {
        if (report_json == nullptr) throw fkmatch::InvalidArgument("null argument");
        const auto suite =
            fkmatch::verify::run_suite(identity_config_from(overrides_json));
        *report_json = dup_string(fkmatch::verify::to_json(suite).dump());
    });
}

fk_status fk_identity_names(char** names) {
    return wrap([&] {
        if (names == nullptr) throw fkmatch::InvalidArgument("null argument");
        std::string out;
        for (const auto id : fkmatch::verify::all_identities()) {
            out += fkmatch::verify::identity_name(id);
            out += '\n';
        }
        *names = dup_string(out);
    });
}

void fk_string_free(char* s) { delete[] s; }

}  // extern "C"
