#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "catalog/process.hpp"
#include "errors.hpp"
#include "sim/simulate.hpp"
#include "verify/identities.hpp"

using namespace fkmatch;
using catalog::ProcessSpec;
using expr::TimeFunction;
using sim::PathFunctional;
using sim::SimConfig;

namespace {

SimConfig quick(double t_end, double dt, std::uint64_t paths, std::uint64_t seed) {
    SimConfig cfg;
    cfg.t_end = t_end;
    cfg.dt = dt;
    cfg.n_paths = paths;
    cfg.master_seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("constant functional gives mean 1, stderr 0") {
    const auto spec = catalog::make_gbesq1(1.0, TimeFunction::constant(2.0));
    PathFunctional f;
    f.terminal_map = [](double) { return 1.0; };
    const auto est = sim::mc_expectation(spec, f, quick(1.0, 1e-2, 5000, 7));
    CHECK(est.mean == 1.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("mc runs are bit-identical across repeats and worker counts") {
    const auto spec = catalog::make_srou(1.0, 2.0, 1.0);
    const auto f = PathFunctional::exp_terminal_integral(1.0, 0.5);
    const auto cfg = quick(1.0, 1e-2, 20000, 12345);

    const auto first = sim::mc_expectation(spec, f, cfg);
    const auto second = sim::mc_expectation(spec, f, cfg);
    CHECK(first.mean == second.mean);
    CHECK(first.std_error == second.std_error);

    setenv("FKMATCH_WORKERS", "1", 1);
    const auto serial = sim::mc_expectation(spec, f, cfg);
    setenv("FKMATCH_WORKERS", "3", 1);
    const auto parallel = sim::mc_expectation(spec, f, cfg);
    unsetenv("FKMATCH_WORKERS");
    CHECK(serial.mean == parallel.mean);
    CHECK(serial.std_error == parallel.std_error);
}

TEST_CASE("absorbed at zero: gbesq2 with zero coefficients stays put") {
    const auto spec = catalog::make_gbesq2(0.0, TimeFunction::constant(0.0),
                                           TimeFunction::constant(0.0));
    rng::RngStream stream(5, 0);
    const auto rec = sim::simulate_path(spec, quick(1.0, 1e-3, 1, 5),
                                        stream, PathFunctional::raw_terminal());
    CHECK(rec.terminal == 0.0);
}

TEST_CASE("gbesq1 drift sanity: E X_t = x + int Delta") {
    const auto spec = catalog::make_gbesq1(1.0, TimeFunction::constant(2.0));
    const auto est = sim::mc_expectation(spec, PathFunctional::raw_terminal(),
                                         quick(1.0, 1e-3, 50000, 99));
    CHECK(std::abs(est.mean - 3.0) <= 3.0 * est.std_error);
}

TEST_CASE("exact besq terminal sampler") {
    rng::RngStream stream(31337, 0);
    CHECK(sim::sample_besq_terminal(0.0, 0.0, 1.0, stream) == 0.0);

    // empirical mean of BESQ_2 from 0 at t: x0 + delta t = 2t
    const double t = 0.7;
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += sim::sample_besq_terminal(2.0, 0.0, t, stream);
    const double mean = sum / n;
    // var of besq terminal: 2 delta t^2 + 4 x0 t = 4 t^2
    const double se = std::sqrt(4.0 * t * t / n);
    CHECK(std::abs(mean - 2.0 * t) <= 4.0 * se);

    // transform check at delta=2, x0=1, t=1, lambda=1
    double esum = 0.0, esq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = std::exp(-sim::sample_besq_terminal(2.0, 1.0, 1.0, stream));
        esum += v;
        esq += v * v;
    }
    const double emean = esum / n;
    const double ese = std::sqrt((esq / n - emean * emean) / n);
    const double closed = catalog::besq_marginal(1.0, 2.0, 1.0, 1.0);
    CHECK(std::abs(emean - closed) <= 3.0 * ese);
}

TEST_CASE("scheme dispatch and validation") {
    const auto pgsce = catalog::make_pgsce(1.0, 0.5);
    CHECK(sim::scheme_for(pgsce, sim::Scheme::auto_select) ==
          sim::Scheme::euler_reciprocal);
    CHECK_THROWS_AS(sim::scheme_for(pgsce, sim::Scheme::euler_full_truncation),
                    InvalidArgument);
    const auto g1 = catalog::make_gbesq1(1.0, TimeFunction::constant(2.0));
    CHECK(sim::scheme_for(g1, sim::Scheme::auto_select) ==
          sim::Scheme::euler_full_truncation);
    CHECK_NOTHROW(sim::scheme_for(g1, sim::Scheme::exact_besq_terminal));
    const auto g1e = catalog::make_gbesq1(1.0, TimeFunction::expression("2+t", 8.0));
    CHECK_THROWS_AS(sim::scheme_for(g1e, sim::Scheme::exact_besq_terminal),
                    InvalidArgument);
}

TEST_CASE("full-truncation euler matches exact besq statistics (z-test)") {
    const auto spec = catalog::make_gbesq1(1.0, TimeFunction::constant(2.0));
    const auto f = PathFunctional::exp_terminal_integral(1.0, 0.0);

    auto cfg = quick(1.0, 1e-4, 50000, 4242);
    const auto euler = sim::mc_expectation(spec, f, cfg);

    cfg.scheme = sim::Scheme::exact_besq_terminal;
    cfg.master_seed = 777;
    const auto exact = sim::mc_expectation(spec, f, cfg);

    const double z = (euler.mean - exact.mean) /
                     std::sqrt(euler.std_error * euler.std_error +
                               exact.std_error * exact.std_error);
    CHECK(std::abs(z) <= 3.0);
}

TEST_CASE("trapezoidal accumulator is second order on a smooth integrand") {
    const auto spec = catalog::make_gbesq1(1.0, TimeFunction::constant(2.0));
    PathFunctional f;
    f.terminal_map = [](double) { return 0.0; };
    f.integrand = [](double u, double) { return u * u; };  // int_0^1 = 1/3
    f.combiner = PathFunctional::Combiner::raw;

    const auto integral_error = [&](double dt) {
        rng::RngStream stream(1, 0);
        const auto rec = sim::simulate_path(spec, quick(1.0, dt, 1, 1), stream, f);
        return std::abs(rec.integral - 1.0 / 3.0);
    };
    const double e1 = integral_error(1e-2);
    const double e2 = integral_error(5e-3);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("pgsce reciprocal scheme: linear SDE mean of 1/X") {
    // Y = 1/X solves dY = Y(dt - dB) + c dt, so E Y_t = y0 e^t + c(e^t - 1).
    const double x0 = 2.0, c = 0.5, t = 1.0;
    const auto spec = catalog::make_pgsce(x0, c);
    PathFunctional f;
    f.terminal_map = [](double x) { return 1.0 / x; };  // recovers Y
    const auto est = sim::mc_expectation(spec, f, quick(t, 1e-3, 50000, 321));
    const double expected = (1.0 / x0) * std::exp(t) + c * (std::exp(t) - 1.0);
    CHECK(std::abs(est.mean - expected) <= 3.5 * est.std_error);
}

TEST_CASE("cosh family terminal vs gaussian quadrature oracle") {
    const auto spec = catalog::make_cosh_bm();
    PathFunctional f;
    f.terminal_map = [](double x) { return std::exp(-x); };
    const auto est = sim::mc_expectation(spec, f, quick(1.0, 1e-3, 100000, 2718));
    const double oracle = verify::gaussian_expectation(
        [](double z) { return std::exp(-std::cosh(z)); }, 1.0);
    CHECK(std::abs(est.mean - oracle) <= 3.0 * est.std_error);
}

TEST_CASE("paired pathwise: identical specs give zero discrepancy") {
    const auto spec = catalog::make_srou(1.0, 2.0, 1.0);
    const auto id = [](double x) { return x; };
    const auto rep = sim::paired_pathwise(spec, id, spec, id, quick(1.0, 1e-2, 200, 9));
    CHECK(rep.max_sup == 0.0);
    CHECK(rep.mean_terminal == 0.0);
}

TEST_CASE("doss pairing: discrepancy shrinks with dt") {
    const auto rough = catalog::make_geom_assoc("sqrt2x", 1.0);
    const auto assoc = catalog::make_geom_assoc("gbm", std::exp(1.0));
    const auto map_a = [](double x) { return std::exp(std::sqrt(std::max(x, 0.0))); };
    const auto map_b = [](double x) { return x; };
    double prev = 1e300;
    for (double dt : {1e-2, 1e-3, 1e-4}) {
        const auto rep =
            sim::paired_pathwise(rough, map_a, assoc, map_b, quick(1.0, dt, 200, 55));
        CHECK(rep.max_sup < prev);
        prev = rep.max_sup;
    }
}

TEST_CASE("budget guard") {
    const auto spec = catalog::make_gbesq1(1.0, TimeFunction::constant(2.0));
    auto cfg = quick(1.0, 1e-4, 100000, 3);
    cfg.max_total_steps = 1000;
    CHECK_THROWS_AS(
        sim::mc_expectation(spec, PathFunctional::raw_terminal(), cfg),
        BudgetExceeded);
}

TEST_CASE("bridge simulation requires t_end < 1") {
    const auto bridge = catalog::make_bridge(1.0, 2.0);
    CHECK_THROWS_AS(sim::mc_expectation(bridge, PathFunctional::raw_terminal(),
                                        quick(1.0, 1e-3, 10, 3)),
                    DomainError);
    CHECK_NOTHROW(sim::mc_expectation(bridge, PathFunctional::raw_terminal(),
                                      quick(0.5, 1e-3, 10, 3)));
}

TEST_CASE("jacobi paths stay in [0,1] and report integrand clips") {
    const auto spec = catalog::make_jacobi(0.5, 1.5, 0.5);
    PathFunctional f;
    f.terminal_map = [](double x) { return x; };
    f.integrand = [](double, double x) { return 1.0 / std::max(x, 1e-10); };
    f.combiner = PathFunctional::Combiner::raw;
    const auto est = sim::mc_expectation(spec, f, quick(0.5, 1e-3, 2000, 77));
    CHECK(est.mean >= 0.0);
    CHECK(est.mean <= 1.0);
    CHECK(est.flagged == 0);
}
