#include "verify/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "numerics/ode.hpp"
#include "numerics/quadrature.hpp"
#include "numerics/special.hpp"
#include "riccati/flow.hpp"

namespace fkmatch::verify {

namespace {

using catalog::ProcessSpec;
using sim::MCEstimate;
using sim::PathFunctional;
using sim::SimConfig;

constexpr double kZThreshold = 3.0;

// Pathwise sup discrepancy of the Doss check at dt = 1e-4, 1e3 paths,
// seed 20140309 (procedure in docs/calibration.md). Acceptance bound is 2x.
constexpr double kDossCalibratedMax = 0.0;  // placeholder until calibrated

struct IdentityInfo {
    IdentityId id;
    const char* name;
    std::uint64_t paths;
    double dt;
    bool ledger;
    std::map<std::string, double> params;
};

const std::vector<IdentityInfo>& identity_table() {
    static const std::vector<IdentityInfo> table = {
        {IdentityId::hbp_cosh, "hbp_cosh", 100000, 1e-3, false,
         {{"t", 1.0}, {"lambda", 1.0}}},
        {IdentityId::pgsce_recip, "pgsce_recip", 100000, 1e-3, false,
         {{"x", 1.0}, {"c", 0.5}, {"t", 1.0}, {"lambda", 1.0}}},
        {IdentityId::baff_el, "baff_el", 100000, 1e-3, false,
         {{"x", 1.0}, {"a", 0.5}, {"b", 1.0}, {"t", 1.0}, {"lambda", 1.0}}},
        {IdentityId::doss_pathwise, "doss_pathwise", 1000, 1e-4, false,
         {{"x", 1.0}, {"t", 1.0}}},
        {IdentityId::jj1_geom, "jj1_geom", 100000, 1e-3, false,
         {{"x", 1.0}, {"lambda", 0.5}, {"gamma", 0.5}, {"t", 1.0}}},
        {IdentityId::jacobi_up, "jacobi_up", 100000, 1e-4, false,
         {{"x", 0.5}, {"b", 0.5}, {"a", 1.5}, {"alpha", 2.0}, {"t", 0.5}}},
        {IdentityId::jacobi_down, "jacobi_down", 100000, 1e-4, false,
         {{"x", 0.5}, {"b", 0.5}, {"a", 1.5}, {"gamma", 1.0}, {"t", 0.5}}},
        {IdentityId::hypfk_cosh, "hypfk_cosh", 100000, 1e-3, false,
         {{"t", 0.8}, {"lambda", 0.5}}},
        {IdentityId::tricomi_moment, "tricomi_moment", 100000, 1e-3, false,
         {{"x", 1.0}, {"t", 1.0}}},
        {IdentityId::wave_trsol_density, "wave_trsol_density", 100000, 1e-3, false,
         {{"lambda", 1.0}, {"t", 1.0}}},
        {IdentityId::gamma_limit, "gamma_limit", 0, 0.0, false,
         {{"x", 1.0}, {"delta", 2.0}, {"t", 1.0}, {"lambda", 1.0}, {"gamma", 1e-6}}},
        {IdentityId::srou_discrepancy, "srou_discrepancy", 1000000, 1e-4, true,
         {{"x", 1.0}, {"delta", 2.0}, {"alpha", 1.0}, {"t", 1.0}, {"lambda", 1.0}}},
        {IdentityId::jj31_discrepancy, "jj31_discrepancy", 1000000, 1e-4, true,
         {{"x", 1.0}, {"delta", 1.0}, {"c", -1.0}, {"t", 1.0}, {"lambda", 1.0}}},
        {IdentityId::fk_membership_gbesq1, "fk_membership_gbesq1", 0, 0.0, false, {}},
        {IdentityId::fk_membership_srou, "fk_membership_srou", 0, 0.0, false,
         {{"alpha", 1.0}}},
        {IdentityId::fk_membership_bridge, "fk_membership_bridge", 0, 0.0, false, {}},
    };
    return table;
}

const IdentityInfo& info_for(IdentityId id) {
    for (const auto& info : identity_table())
        if (info.id == id) return info;
    throw InvalidArgument("unknown identity");
}

struct Resolved {
    std::uint64_t paths;
    double dt;
    std::uint64_t seed;
    std::uint64_t max_total_steps;
    std::map<std::string, double> params;

    double param(const std::string& key) const {
        const auto it = params.find(key);
        if (it == params.end())
            throw InvalidArgument("missing identity parameter '" + key + "'");
        return it->second;
    }
};

Resolved resolve(IdentityId id, const IdentityConfig& cfg) {
    const IdentityInfo& info = info_for(id);
    Resolved r;
    r.paths = cfg.paths != 0 ? cfg.paths : info.paths;
    r.dt = cfg.dt != 0.0 ? cfg.dt : info.dt;
    r.seed = rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(id) * 2 + 1);
    r.max_total_steps = cfg.max_total_steps;
    r.params = info.params;
    for (const auto& [k, v] : cfg.params) {
        if (!r.params.count(k))
            throw InvalidArgument("identity '" + std::string(info.name) +
                                  "' does not take parameter '" + k + "'");
        r.params[k] = v;
    }
    return r;
}

SimConfig sim_config(const Resolved& r, double t_end, std::uint64_t side_tag) {
    SimConfig cfg;
    cfg.t_end = t_end;
    cfg.dt = r.dt;
    cfg.n_paths = r.paths;
    cfg.master_seed = rng::derive_seed(r.seed, side_tag);
    cfg.max_total_steps = r.max_total_steps;
    return cfg;
}

Side side_from(const MCEstimate& est, const std::string& method) {
    return {est.mean, est.std_error, est.n_paths, false, method};
}

Side exact_side(double value, const std::string& method) {
    return {value, 0.0, 0, true, method};
}

nlohmann::json echo(const Resolved& r) {
    nlohmann::json j;
    j["paths"] = r.paths;
    j["dt"] = r.dt;
    j["seed"] = r.seed;
    j["params"] = r.params;
    return j;
}

quad::QuadratureConfig tight_quadrature() {
    quad::QuadratureConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    return cfg;
}

// --------------------------------------------------------------------------
// Identity sides

// MC of exp(-l e^{B_t} - (l^2/2) int_0^t e^{2B}); the shared right side of
// both cosh identities.
Side cosh_rhs_mc(const Resolved& r, std::uint64_t tag) {
    const double t = r.param("t");
    const double lam = r.param("lambda");
    const SimConfig cfg = sim_config(r, t, tag);
    const auto n_steps = static_cast<std::uint64_t>(std::llround(t / cfg.dt));
    const double dt = t / static_cast<double>(n_steps);
    const double sqrt_dt = std::sqrt(dt);
    const auto per_path = [=](rng::RngStream& s) {
        double b = 0.0;
        double integral = 0.0;
        double prev = 1.0;  // e^{2 B_0}
        for (std::uint64_t i = 0; i < n_steps; ++i) {
            b += sqrt_dt * s.normal();
            const double g = std::exp(2.0 * b);
            integral += 0.5 * (prev + g) * dt;
            prev = g;
        }
        return std::exp(-lam * std::exp(b) - 0.5 * lam * lam * integral);
    };
    return side_from(sim::mc_stream_expectation(per_path, cfg), "mc_gbm_functional");
}

IdentityReport make_z_report(IdentityId id, const Resolved& r, Side lhs, Side rhs) {
    IdentityReport rep;
    rep.id = id;
    rep.name = identity_name(id);
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.z = z_score(lhs, rhs);
    rep.threshold = kZThreshold;
    rep.verdict = std::abs(rep.z) <= kZThreshold ? Verdict::pass : Verdict::fail;
    rep.config_echo = echo(r);
    return rep;
}

IdentityReport check_hbp_cosh(IdentityId id, const Resolved& r) {
    const double t = r.param("t");
    const double lam = r.param("lambda");
    const double quad_value = gaussian_expectation(
        [lam](double z) { return std::exp(-lam * std::cosh(z)); }, t);
    return make_z_report(id, r, exact_side(quad_value, "gaussian_quadrature"),
                         cosh_rhs_mc(r, 2));
}

IdentityReport check_pgsce_recip(IdentityId id, const Resolved& r) {
    const double x = r.param("x");
    const double c = r.param("c");
    const double t = r.param("t");
    const double lam = r.param("lambda");

    const ProcessSpec spec = catalog::make_pgsce(x, c);
    PathFunctional f;
    f.terminal_map = [lam](double xt) { return std::exp(-lam / xt); };
    f.combiner = PathFunctional::Combiner::raw;
    const SimConfig lhs_cfg = sim_config(r, t, 1);
    const Side lhs = side_from(sim::mc_expectation(spec, f, lhs_cfg), "mc_reciprocal");

    // E exp(-(l/x) e^{B_t + t/2} - c l int_0^t e^{B_u + u/2} du).
    const SimConfig rhs_cfg = sim_config(r, t, 2);
    const auto n_steps = static_cast<std::uint64_t>(std::llround(t / rhs_cfg.dt));
    const double dt = t / static_cast<double>(n_steps);
    const double sqrt_dt = std::sqrt(dt);
    const auto per_path = [=](rng::RngStream& s) {
        double b = 0.0;
        double integral = 0.0;
        double prev = 1.0;
        for (std::uint64_t i = 0; i < n_steps; ++i) {
            b += sqrt_dt * s.normal();
            const double u = static_cast<double>(i + 1) * dt;
            const double g = std::exp(b + 0.5 * u);
            integral += 0.5 * (prev + g) * dt;
            prev = g;
        }
        const double terminal = std::exp(b + 0.5 * t);
        return std::exp(-(lam / x) * terminal - c * lam * integral);
    };
    const Side rhs =
        side_from(sim::mc_stream_expectation(per_path, rhs_cfg), "mc_gbm_functional");
    return make_z_report(id, r, lhs, rhs);
}

IdentityReport check_baff_el(IdentityId id, const Resolved& r) {
    const double x = r.param("x");
    const double a = r.param("a");
    const double b_drift = r.param("b");
    const double t = r.param("t");
    const double lam = r.param("lambda");
    if (b_drift < 0.5)
        throw DomainError("baff_el requires b >= 1/2");

    const ProcessSpec spec = catalog::make_baff(x, a, b_drift);
    const SimConfig lhs_cfg = sim_config(r, t, 1);
    const Side lhs = side_from(
        sim::mc_expectation(spec, PathFunctional::exp_terminal_integral(lam, 0.0),
                            lhs_cfg),
        "mc_euler");

    // X_t = l e^{B_t+(b-1/2)t} / (1 + l int e^{B+(b-1/2)u}); the exponent
    // integral collapses to a logarithm, so e^{-x X_t - a int X} is
    // (1 + l I)^{-a} e^{-x X_t} pathwise.
    const SimConfig rhs_cfg = sim_config(r, t, 2);
    const auto n_steps = static_cast<std::uint64_t>(std::llround(t / rhs_cfg.dt));
    const double dt = t / static_cast<double>(n_steps);
    const double sqrt_dt = std::sqrt(dt);
    const double mu = b_drift - 0.5;
    const auto per_path = [=](rng::RngStream& s) {
        double b = 0.0;
        double integral = 0.0;
        double prev = 1.0;
        for (std::uint64_t i = 0; i < n_steps; ++i) {
            b += sqrt_dt * s.normal();
            const double u = static_cast<double>(i + 1) * dt;
            const double g = std::exp(b + mu * u);
            integral += 0.5 * (prev + g) * dt;
            prev = g;
        }
        const double xt = lam * std::exp(b + mu * t) / (1.0 + lam * integral);
        return std::pow(1.0 + lam * integral, -a) * std::exp(-x * xt);
    };
    const Side rhs =
        side_from(sim::mc_stream_expectation(per_path, rhs_cfg), "mc_pathwise_closed");
    return make_z_report(id, r, lhs, rhs);
}

IdentityReport check_jj1_geom(IdentityId id, const Resolved& r) {
    const double x = r.param("x");
    const double t = r.param("t");
    const double lam = r.param("lambda");
    const double gamma = r.param("gamma");

    const ProcessSpec spec = catalog::make_geom_assoc("sqrt2x", x);
    const double fx = std::exp(std::sqrt(x));
    PathFunctional f;
    f.terminal_map = [](double xt) { return std::exp(std::sqrt(std::max(xt, 0.0))); };
    f.integrand = [](double, double xu) {
        return std::exp(std::sqrt(std::max(xu, 0.0)));
    };
    f.combiner = PathFunctional::Combiner::exp_neg;
    f.lambda = lam;
    f.weight = gamma;
    const SimConfig lhs_cfg = sim_config(r, t, 1);
    const Side lhs = side_from(sim::mc_expectation(spec, f, lhs_cfg), "mc_euler");

    // X_t = e^{B_t+t/2} (l + g int e^{-B_s - s/2} ds), value e^{-f(x) X_t}.
    const SimConfig rhs_cfg = sim_config(r, t, 2);
    const auto n_steps = static_cast<std::uint64_t>(std::llround(t / rhs_cfg.dt));
    const double dt = t / static_cast<double>(n_steps);
    const double sqrt_dt = std::sqrt(dt);
    const auto per_path = [=](rng::RngStream& s) {
        double b = 0.0;
        double integral = 0.0;
        double prev = 1.0;
        for (std::uint64_t i = 0; i < n_steps; ++i) {
            b += sqrt_dt * s.normal();
            const double u = static_cast<double>(i + 1) * dt;
            const double g = std::exp(-b - 0.5 * u);
            integral += 0.5 * (prev + g) * dt;
            prev = g;
        }
        const double xt = std::exp(b + 0.5 * t) * (lam + gamma * integral);
        return std::exp(-fx * xt);
    };
    const Side rhs =
        side_from(sim::mc_stream_expectation(per_path, rhs_cfg), "mc_driven_linear_sde");
    return make_z_report(id, r, lhs, rhs);
}

IdentityReport check_jacobi_up(IdentityId id, const Resolved& r) {
    const double lam0 = r.param("x");
    const double a = r.param("a");
    const double b = r.param("b");
    const double alpha = r.param("alpha");
    const double t = r.param("t");
    if (b < 0.5 || a < b + 0.5 || alpha < 1.0 + 2.0 * b)
        throw DomainError("jacobi_up requires b >= 1/2, a >= b + 1/2, alpha >= 1 + 2b");

    const ProcessSpec spec = catalog::make_jacobi(lam0, a, b);
    PathFunctional f;
    f.terminal_map = [alpha](double xt) { return std::pow(std::max(xt, 0.0), alpha); };
    f.integrand = [](double, double xu) { return 1.0 / std::max(xu, 1e-10); };
    f.combiner = PathFunctional::Combiner::product_exp;
    f.weight = alpha * (0.5 * (alpha - 1.0) - b);
    const SimConfig lhs_cfg = sim_config(r, t, 1);
    const MCEstimate est = sim::mc_expectation(spec, f, lhs_cfg);
    Side lhs = side_from(est, "mc_euler");

    const double exact = std::pow(lam0, alpha) *
                         std::exp(alpha * (a - alpha + 1.0) * t / 2.0);
    IdentityReport rep =
        make_z_report(id, r, lhs, exact_side(exact, "closed_form"));
    rep.extra["integrand_clips"] = est.clipped;
    return rep;
}

IdentityReport check_jacobi_down(IdentityId id, const Resolved& r) {
    const double lam0 = r.param("x");
    const double a = r.param("a");
    const double b = r.param("b");
    const double gamma = r.param("gamma");
    const double t = r.param("t");
    const bool interior = b >= 0.5 && a >= b + 0.5;
    const bool entrance = b < 0.5 && a > 2.0;
    if (!interior && !entrance)
        throw DomainError(
            "jacobi_down requires b >= 1/2 and a >= b + 1/2, or b < 1/2 and a > 2");
    if (gamma < std::max(2.0 * (b - a) + 1.0, 0.0))
        throw DomainError("jacobi_down requires gamma >= (2(b-a)+1)^+");

    const ProcessSpec spec = catalog::make_jacobi(lam0, a, b);
    PathFunctional f;
    f.terminal_map = [gamma](double xt) {
        return std::pow(std::max(1.0 - xt, 0.0), gamma);
    };
    f.integrand = [](double, double xu) {
        return std::clamp(xu, 0.0, 1.0) / std::max(1.0 - xu, 1e-10);
    };
    f.combiner = PathFunctional::Combiner::product_exp;
    f.weight = gamma * (0.5 * (gamma - 1.0) - b + a);
    const SimConfig lhs_cfg = sim_config(r, t, 1);
    const MCEstimate est = sim::mc_expectation(spec, f, lhs_cfg);

    const double exact = std::pow(1.0 - lam0, gamma) * std::exp(-gamma * t * b);
    IdentityReport rep = make_z_report(id, r, side_from(est, "mc_euler"),
                                       exact_side(exact, "closed_form"));
    rep.extra["integrand_clips"] = est.clipped;
    return rep;
}

IdentityReport check_hypfk_cosh(IdentityId id, const Resolved& r) {
    const double t = r.param("t");
    const double lam = r.param("lambda");
    // E f(l, |B_t|) with f = e^{-l cosh x}: folded-normal quadrature.
    const double quad_value = gaussian_expectation(
        [lam](double z) { return std::exp(-lam * std::cosh(z)); }, t);
    return make_z_report(id, r,
                         exact_side(quad_value, "reflected_bm_quadrature"),
                         cosh_rhs_mc(r, 2));
}

IdentityReport check_tricomi_moment(IdentityId id, const Resolved& r) {
    const double x = r.param("x");
    const double t = r.param("t");
    const ProcessSpec spec = catalog::make_baff(x, 0.0, 0.0);
    PathFunctional f;
    f.terminal_map = [](double xt) { return xt * xt + 2.0 * xt; };
    f.combiner = PathFunctional::Combiner::raw;
    const SimConfig lhs_cfg = sim_config(r, t, 1);
    const Side lhs = side_from(sim::mc_expectation(spec, f, lhs_cfg), "mc_euler");
    const double exact = (x * x + 2.0 * x) * std::exp(t);
    return make_z_report(id, r, lhs, exact_side(exact, "closed_form"));
}

IdentityReport check_wave_density(IdentityId id, const Resolved& r) {
    const double t = r.param("t");
    const double lam = r.param("lambda");
    // integral_0^inf e^{-z} (z/t) e^{-(l^2+z^2)/(2t)} I0(l z / t) dz; the
    // scaled Bessel keeps the integrand bounded for large l z / t.
    const auto integrand = [&](double z) {
        const double scaled = special::bessel_i0_scaled(lam * z / t);
        const double gauss = std::exp(-(lam - z) * (lam - z) / (2.0 * t));
        return std::exp(-z) * (z / t) * gauss * scaled;
    };
    const double z_hi = lam + 12.0 * std::sqrt(t) + 40.0;
    const double quad_value = quad::integrate(integrand, 0.0, z_hi, tight_quadrature());

    // E f(sqrt((l + B1_t)^2 + (B2_t)^2)) with exact Gaussian draws.
    SimConfig cfg = sim_config(r, t, 2);
    cfg.dt = cfg.t_end;  // one Gaussian pair per path
    const double sqrt_t = std::sqrt(t);
    const auto per_path = [=](rng::RngStream& s) {
        const double b1 = sqrt_t * s.normal();
        const double b2 = sqrt_t * s.normal();
        return std::exp(-std::hypot(lam + b1, b2));
    };
    const Side rhs =
        side_from(sim::mc_stream_expectation(per_path, cfg), "mc_planar_gaussian");
    return make_z_report(id, r, exact_side(quad_value, "bessel_density_quadrature"),
                         rhs);
}

IdentityReport check_gamma_limit(IdentityId id, const Resolved& r) {
    const double x = r.param("x");
    const double delta = r.param("delta");
    const double t = r.param("t");
    const double lam = r.param("lambda");
    const double gamma = r.param("gamma");
    const ProcessSpec spec =
        catalog::make_gbesq1(x, expr::TimeFunction::constant(delta));
    const double joint = riccati::joint_laplace(spec, t, lam, gamma);
    const double marginal = catalog::laplace_marginal(spec, t, lam);

    IdentityReport rep;
    rep.id = id;
    rep.name = identity_name(id);
    rep.lhs = exact_side(joint, "joint_transform");
    rep.rhs = exact_side(marginal, "marginal_transform");
    rep.residual = std::abs(joint - marginal);
    rep.threshold = 1e-4;
    rep.verdict = rep.residual <= rep.threshold ? Verdict::pass : Verdict::fail;
    rep.config_echo = echo(r);
    return rep;
}

IdentityReport check_doss_pathwise(IdentityId id, const Resolved& r) {
    const double x = r.param("x");
    const double t = r.param("t");
    const ProcessSpec rough = catalog::make_geom_assoc("sqrt2x", x);
    const double fx = std::exp(std::sqrt(x));
    const ProcessSpec assoc = catalog::make_geom_assoc("gbm", fx);
    const auto map_a = [](double s) { return std::exp(std::sqrt(std::max(s, 0.0))); };
    const auto map_b = [](double s) { return s; };

    const std::vector<double> dts = {1e-2, 1e-3, 1e-4};
    std::vector<double> maxes;
    for (double dt : dts) {
        SimConfig cfg = sim_config(r, t, 1);
        cfg.dt = dt;
        maxes.push_back(
            sim::paired_pathwise(rough, map_a, assoc, map_b, cfg).max_sup);
    }
    const bool monotone = maxes[0] > maxes[1] && maxes[1] > maxes[2];
    const double bound = 2.0 * doss_calibrated_max();
    const bool below = maxes.back() <= bound;

    IdentityReport rep;
    rep.id = id;
    rep.name = identity_name(id);
    rep.lhs = exact_side(maxes.back(), "paired_euler_sup");
    rep.rhs = exact_side(0.0, "pathwise_limit");
    rep.residual = maxes.back();
    rep.threshold = bound;
    rep.verdict = monotone && below ? Verdict::pass : Verdict::fail;
    rep.detail = monotone ? "discrepancy decreases with dt"
                          : "discrepancy not monotone in dt";
    rep.extra["max_sup_by_dt"] = maxes;
    rep.extra["dts"] = dts;
    rep.config_echo = echo(r);
    return rep;
}

IdentityReport ledger_report(IdentityId id, const Resolved& r, const Side& mc,
                             const std::string& winner_name, double winner_value,
                             const std::string& loser_name, double loser_value) {
    const Side winner = exact_side(winner_value, winner_name);
    const Side loser = exact_side(loser_value, loser_name);
    const double z_winner = z_score(mc, winner);
    const double z_loser = z_score(mc, loser);

    IdentityReport rep;
    rep.id = id;
    rep.name = identity_name(id);
    rep.lhs = mc;
    rep.rhs = winner;
    rep.z = z_winner;
    rep.verdict = Verdict::ledger;
    rep.detail = "winner: " + winner_name;
    rep.extra["candidates"] = nlohmann::json::array(
        {{{"name", winner_name}, {"value", winner_value}, {"z", z_winner}},
         {{"name", loser_name}, {"value", loser_value}, {"z", z_loser}}});
    rep.extra["decisive"] =
        std::abs(z_winner) <= kZThreshold && std::abs(z_loser) > 5.0;
    rep.config_echo = echo(r);
    return rep;
}

IdentityReport check_srou_discrepancy(IdentityId id, const Resolved& r) {
    const double x = r.param("x");
    const double delta = r.param("delta");
    const double alpha = r.param("alpha");
    const double t = r.param("t");
    const double lam = r.param("lambda");
    const ProcessSpec spec = catalog::make_srou(x, delta, alpha);
    const SimConfig cfg = sim_config(r, t, 1);
    const Side mc = side_from(
        sim::mc_expectation(spec, PathFunctional::exp_terminal_integral(lam, 0.0), cfg),
        "mc_euler");

    const double flow_value = catalog::laplace_marginal(spec, t, lam);
    const double displayed = catalog::paper_displayed_srou(x, delta, alpha, t, lam);
    // The flow pipeline also matches the stationary limit; the displayed
    // formula does not. The MC single-handedly names the winner here.
    const double z_flow = z_score(mc, exact_side(flow_value, ""));
    const double z_disp = z_score(mc, exact_side(displayed, ""));
    const bool flow_wins = std::abs(z_flow) <= std::abs(z_disp);
    return ledger_report(id, r, mc,
                         flow_wins ? "characteristic_flow" : "displayed_closed_form",
                         flow_wins ? flow_value : displayed,
                         flow_wins ? "displayed_closed_form" : "characteristic_flow",
                         flow_wins ? displayed : flow_value);
}

IdentityReport check_jj31_discrepancy(IdentityId id, const Resolved& r) {
    const double x = r.param("x");
    const double delta = r.param("delta");
    const double c = r.param("c");
    const double t = r.param("t");
    const double lam = r.param("lambda");
    if (c > 0.0) throw DomainError("jj31_discrepancy requires c <= 0");
    const ProcessSpec spec =
        catalog::make_gbesq2(x, expr::TimeFunction::constant(delta),
                             expr::TimeFunction::constant(c));
    const SimConfig cfg = sim_config(r, t, 1);
    const Side mc = side_from(
        sim::mc_expectation(spec, PathFunctional::exp_terminal_integral(lam, 0.0), cfg),
        "mc_euler");

    const double general = catalog::laplace_marginal(spec, t, lam);
    const double doubled = catalog::jj31_marginal(x, delta, c, t, lam);
    const double z_gen = z_score(mc, exact_side(general, ""));
    const double z_dbl = z_score(mc, exact_side(doubled, ""));
    const bool general_wins = std::abs(z_gen) <= std::abs(z_dbl);
    return ledger_report(id, r, mc,
                         general_wins ? "general_solution" : "doubled_denominator_form",
                         general_wins ? general : doubled,
                         general_wins ? "doubled_denominator_form" : "general_solution",
                         general_wins ? doubled : general);
}

IdentityReport check_membership(IdentityId id, const Resolved& r, bool expect_member) {
    std::function<double(double)> theta;
    if (id == IdentityId::fk_membership_gbesq1) {
        theta = [](double) { return 0.0; };
    } else if (id == IdentityId::fk_membership_srou) {
        const double alpha = r.param("alpha");
        theta = [alpha](double) { return -alpha; };
    } else {
        theta = [](double u) { return -1.0 / (1.0 - u); };
    }
    const PdeGrid grid = PdeGrid::linspace(0.1, 0.8, 8, 0.2, 2.0, 10);
    const MembershipResult res = fk_membership(theta, grid);

    IdentityReport rep;
    rep.id = id;
    rep.name = identity_name(id);
    rep.lhs = exact_side(res.max_residual, "characteristic_residual");
    rep.rhs = exact_side(0.0, "membership_condition");
    rep.residual = res.max_residual;
    rep.threshold = 1e-6;
    rep.verdict = res.member == expect_member ? Verdict::pass : Verdict::fail;
    rep.detail = std::string(res.member ? "member" : "not a member") +
                 ", expected " + (expect_member ? "member" : "not a member");
    rep.extra["member"] = res.member;
    rep.extra["expected_member"] = expect_member;
    rep.extra["grid_points"] = res.points;
    rep.config_echo = echo(r);
    return rep;
}

IdentityReport dispatch(IdentityId id, const Resolved& r) {
    switch (id) {
        case IdentityId::hbp_cosh: return check_hbp_cosh(id, r);
        case IdentityId::pgsce_recip: return check_pgsce_recip(id, r);
        case IdentityId::baff_el: return check_baff_el(id, r);
        case IdentityId::doss_pathwise: return check_doss_pathwise(id, r);
        case IdentityId::jj1_geom: return check_jj1_geom(id, r);
        case IdentityId::jacobi_up: return check_jacobi_up(id, r);
        case IdentityId::jacobi_down: return check_jacobi_down(id, r);
        case IdentityId::hypfk_cosh: return check_hypfk_cosh(id, r);
        case IdentityId::tricomi_moment: return check_tricomi_moment(id, r);
        case IdentityId::wave_trsol_density: return check_wave_density(id, r);
        case IdentityId::gamma_limit: return check_gamma_limit(id, r);
        case IdentityId::srou_discrepancy: return check_srou_discrepancy(id, r);
        case IdentityId::jj31_discrepancy: return check_jj31_discrepancy(id, r);
        case IdentityId::fk_membership_gbesq1: return check_membership(id, r, true);
        case IdentityId::fk_membership_srou: return check_membership(id, r, true);
        case IdentityId::fk_membership_bridge: return check_membership(id, r, false);
    }
    throw InvalidArgument("unknown identity");
}

}  // namespace

const std::vector<IdentityId>& all_identities() {
    static const std::vector<IdentityId> ids = [] {
        std::vector<IdentityId> v;
        for (const auto& info : identity_table()) v.push_back(info.id);
        return v;
    }();
    return ids;
}

std::string identity_name(IdentityId id) { return info_for(id).name; }

std::optional<IdentityId> identity_from_name(const std::string& name) {
    for (const auto& info : identity_table())
        if (name == info.name) return info.id;
    return std::nullopt;
}

bool is_ledger_identity(IdentityId id) { return info_for(id).ledger; }

double z_score(const Side& lhs, const Side& rhs) {
    const double se =
        std::sqrt(lhs.std_error * lhs.std_error + rhs.std_error * rhs.std_error);
    const double diff = lhs.value - rhs.value;
    if (se == 0.0) {
        if (std::abs(diff) <= 1e-12) return 0.0;
        return diff > 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    }
    return diff / se;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::ledger: return "ledger";
        case Verdict::failed_to_run: return "failed_to_run";
    }
    return "?";
}

double gaussian_expectation(const std::function<double(double)>& g, double t) {
    if (!(t > 0.0)) throw InvalidArgument("gaussian_expectation: t must be > 0");
    const double sd = std::sqrt(t);
    const double z_hi = 12.0 * sd;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * t);
    const auto integrand = [&](double z) {
        return g(z) * norm * std::exp(-z * z / (2.0 * t));
    };
    return quad::integrate(integrand, -z_hi, z_hi, tight_quadrature());
}

double doss_calibrated_max() { return kDossCalibratedMax; }

IdentityReport check_identity(IdentityId id, const IdentityConfig& cfg) {
    const Resolved r = resolve(id, cfg);
    IdentityReport rep;
    try {
        rep = dispatch(id, r);
    } catch (const InvalidArgument&) {
        throw;
    } catch (const DomainError&) {
        throw;
    } catch (const Error& e) {
        rep.id = id;
        rep.name = identity_name(id);
        rep.verdict = Verdict::failed_to_run;
        rep.detail = e.what();
        rep.config_echo = echo(r);
        return rep;
    }
    if (rep.verdict == Verdict::fail && cfg.allow_rerun && !rep.lhs.exact) {
        // One rerun at 4x paths with a fresh derived seed; family-wise
        // error control for the z-tests.
        IdentityConfig retry = cfg;
        retry.allow_rerun = false;
        retry.paths = (cfg.paths != 0 ? cfg.paths : info_for(id).paths) * 4;
        retry.seed = rng::derive_seed(cfg.seed, 0x5EED4E57ull);
        IdentityReport second = check_identity(id, retry);
        second.rerun = true;
        return second;
    }
    return rep;
}

SuiteReport run_suite(const IdentityConfig& base) {
    SuiteReport suite;
    for (IdentityId id : all_identities()) {
        IdentityReport rep = check_identity(id, base);
        if (is_ledger_identity(id)) {
            suite.ledger.push_back(std::move(rep));
        } else {
            if (rep.verdict != Verdict::pass) suite.all_passed = false;
            suite.results.push_back(std::move(rep));
        }
    }
    return suite;
}

PdeGrid PdeGrid::linspace(double t_lo, double t_hi, int nt, double l_lo,
                          double l_hi, int nl) {
    PdeGrid g;
    for (int i = 0; i < nt; ++i)
        g.ts.push_back(nt == 1 ? t_lo : t_lo + (t_hi - t_lo) * i / (nt - 1));
    for (int j = 0; j < nl; ++j)
        g.lambdas.push_back(nl == 1 ? l_lo : l_lo + (l_hi - l_lo) * j / (nl - 1));
    return g;
}

namespace {

double residual_at(const std::function<double(double, double)>& p,
                   const std::function<double(double, double)>& mu,
                   const std::function<double(double, double)>& potential,
                   double t, double lam, double h) {
    const double dp_dt = (p(t + h, lam) - p(t - h, lam)) / (2.0 * h);
    const double dp_dl = (p(t, lam + h) - p(t, lam - h)) / (2.0 * h);
    return std::abs(dp_dt - mu(t, lam) * dp_dl + potential(t, lam) * p(t, lam));
}

}  // namespace

ResidualPair pde_residual(const std::function<double(double, double)>& p,
                          const std::function<double(double, double)>& mu,
                          const std::function<double(double, double)>& potential,
                          const PdeGrid& grid, double h, double t_domain_max) {
    ResidualPair out;
    for (double t : grid.ts) {
        for (double lam : grid.lambdas) {
            if (t - h <= 0.0 || lam - h <= 0.0 || t + h >= t_domain_max) {
                ++out.trimmed;
                continue;
            }
            out.at_h = std::max(out.at_h, residual_at(p, mu, potential, t, lam, h));
            out.at_half_h = std::max(out.at_half_h,
                                     residual_at(p, mu, potential, t, lam, 0.5 * h));
        }
    }
    return out;
}

namespace {

std::function<double(double)> marginal_theta(const catalog::ProcessSpec& spec) {
    if (std::holds_alternative<catalog::GBesq1>(spec))
        return [](double) { return 0.0; };
    if (const auto* g2 = std::get_if<catalog::GBesq2>(&spec)) {
        const auto th = g2->theta;
        return [th](double u) { return th(u); };
    }
    if (const auto* ou = std::get_if<catalog::SquaredRadialOu>(&spec)) {
        const double alpha = ou->alpha;
        return [alpha](double) { return -alpha; };
    }
    if (std::holds_alternative<catalog::BesselBridge>(spec))
        return [](double u) { return -1.0 / (1.0 - u); };
    throw InvalidArgument("family has no first-order transform PDE");
}

std::function<double(double)> marginal_delta(const catalog::ProcessSpec& spec) {
    if (const auto* g1 = std::get_if<catalog::GBesq1>(&spec)) {
        const auto d = g1->delta;
        return [d](double u) { return d(u); };
    }
    if (const auto* g2 = std::get_if<catalog::GBesq2>(&spec)) {
        const auto d = g2->delta;
        return [d](double u) { return d(u); };
    }
    if (const auto* ou = std::get_if<catalog::SquaredRadialOu>(&spec)) {
        const double d = ou->delta;
        return [d](double) { return d; };
    }
    const double d = std::get<catalog::BesselBridge>(spec).delta;
    return [d](double) { return d; };
}

}  // namespace

ResidualPair marginal_pde_residual_of(const catalog::ProcessSpec& spec,
                                      const std::function<double(double, double)>& p,
                                      const PdeGrid& grid, double h) {
    const auto theta = marginal_theta(spec);
    const auto delta = marginal_delta(spec);
    const auto mu = [theta](double t, double lam) {
        return -2.0 * lam * lam + 2.0 * lam * theta(t);
    };
    const auto potential = [delta](double t, double lam) { return delta(t) * lam; };
    const double t_cap = std::holds_alternative<catalog::BesselBridge>(spec)
                             ? 1.0
                             : std::numeric_limits<double>::infinity();
    return pde_residual(p, mu, potential, grid, h, t_cap);
}

ResidualPair marginal_pde_residual(const catalog::ProcessSpec& spec,
                                   const PdeGrid& grid, double h) {
    return marginal_pde_residual_of(
        spec,
        [&](double t, double lam) { return catalog::laplace_marginal(spec, t, lam); },
        grid, h);
}

ResidualPair joint_pde_residual(const catalog::ProcessSpec& spec, double gamma,
                                const PdeGrid& grid, double h) {
    const auto theta = marginal_theta(spec);
    const auto delta = marginal_delta(spec);
    const auto mu = [theta, gamma](double t, double lam) {
        return gamma - 2.0 * lam * lam + 2.0 * lam * theta(t);
    };
    const auto potential = [delta](double t, double lam) { return delta(t) * lam; };
    const double t_cap = std::holds_alternative<catalog::BesselBridge>(spec)
                             ? 1.0
                             : std::numeric_limits<double>::infinity();
    return pde_residual(
        [&](double t, double lam) { return riccati::joint_laplace(spec, t, lam, gamma); },
        mu, potential, grid, h, t_cap);
}

MembershipResult fk_membership(const std::function<double(double)>& theta,
                               const PdeGrid& grid, double fd_h, int ode_steps,
                               double member_tol) {
    const auto mu = [&theta](double t, double lam) {
        return -2.0 * lam * lam + 2.0 * lam * theta(t);
    };
    const double t_max = *std::max_element(grid.ts.begin(), grid.ts.end());

    MembershipResult res;
    for (double lam : grid.lambdas) {
        // Characteristics at lam and lam +- h, sampled on the grid times.
        const auto solve = [&](double l0) {
            return ode::rk4_path([&](double u, double y) { return mu(u, y); }, l0,
                                 0.0, t_max, ode_steps);
        };
        const auto base = solve(lam);
        const auto up = solve(lam + fd_h);
        const auto down = solve(lam - fd_h);
        for (double t : grid.ts) {
            const auto at = [&](const std::vector<ode::OdePoint>& path) {
                const double pos = t / t_max * ode_steps;
                const auto i = std::min(static_cast<std::size_t>(std::llround(pos)),
                                        path.size() - 1);
                return path[i].y;
            };
            const double y = at(base);
            const double dy_dl = (at(up) - at(down)) / (2.0 * fd_h);
            const double residual = std::abs(mu(t, y) - mu(t, lam) * dy_dl);
            res.max_residual = std::max(res.max_residual, residual);
            ++res.points;
        }
    }
    res.member = res.max_residual <= member_tol;
    return res;
}

}  // namespace fkmatch::verify
