#include <doctest.h>

#include <cmath>

#include "catalog/process.hpp"
#include "errors.hpp"
#include "numerics/rng.hpp"

using namespace fkmatch;
using catalog::ProcessSpec;
using expr::TimeFunction;

namespace {
ProcessSpec besq2(double x0) {
    return catalog::make_gbesq1(x0, TimeFunction::constant(2.0));
}
}  // namespace

TEST_CASE("coefficients read off the SDE displays") {
    const auto g2 = catalog::make_gbesq2(1.0, TimeFunction::constant(2.0),
                                         TimeFunction::constant(0.0));
    auto co = catalog::coefficients(g2, 0.3, 4.0);
    CHECK(co.drift == doctest::Approx(2.0));
    CHECK(co.diffusion == doctest::Approx(4.0));

    const auto bridge = catalog::make_bridge(1.0, 2.0);
    co = catalog::coefficients(bridge, 0.5, 1.0);
    CHECK(co.drift == doctest::Approx(-2.0));
    CHECK(co.diffusion == doctest::Approx(2.0));

    const auto baff = catalog::make_baff(1.0, 0.0, 0.0);
    co = catalog::coefficients(baff, 0.0, 1.0);
    CHECK(co.drift == doctest::Approx(0.0));
    CHECK(co.diffusion == doctest::Approx(std::sqrt(3.0)));

    const auto srou = catalog::make_srou(1.0, 2.0, 1.0);
    co = catalog::coefficients(srou, 0.0, 0.25);
    CHECK(co.drift == doctest::Approx(1.5));
    CHECK(co.diffusion == doctest::Approx(1.0));

    const auto jacobi = catalog::make_jacobi(0.5, 1.5, 0.5);
    co = catalog::coefficients(jacobi, 0.0, 0.25);
    CHECK(co.drift == doctest::Approx(0.125));
    CHECK(co.diffusion == doctest::Approx(std::sqrt(0.1875)));
    CHECK_THROWS_AS(catalog::coefficients(jacobi, 0.0, 1.5), DomainError);

    const auto cosh_bm = catalog::make_cosh_bm();
    co = catalog::coefficients(cosh_bm, 0.0, 2.0);
    CHECK(co.drift == doctest::Approx(1.0));
    CHECK(co.diffusion == doctest::Approx(std::sqrt(3.0)));
    CHECK_THROWS_AS(catalog::coefficients(cosh_bm, 0.0, 0.5), DomainError);

    const auto pgsce = catalog::make_pgsce(2.0, 0.5);
    co = catalog::coefficients(pgsce, 0.0, 2.0);
    CHECK(co.drift == doctest::Approx(-2.0));
    CHECK(co.diffusion == doctest::Approx(2.0));

    const auto geom = catalog::make_geom_assoc("sqrt2x", 1.0);
    co = catalog::coefficients(geom, 0.0, 4.0);
    CHECK(co.drift == doctest::Approx(3.0));
    CHECK(co.diffusion == doctest::Approx(4.0));
}

TEST_CASE("spec construction validates invariants") {
    CHECK_THROWS_AS(catalog::make_gbesq1(-1.0, TimeFunction::constant(2.0)),
                    InvalidArgument);
    CHECK_THROWS_AS(catalog::make_gbesq1(1.0, TimeFunction::constant(-2.0)),
                    DomainError);
    CHECK_THROWS_AS(catalog::make_gbesq2(1.0, TimeFunction::constant(1.0),
                                         TimeFunction::constant(0.5)),
                    DomainError);
    CHECK_THROWS_AS(catalog::make_pgsce(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(catalog::make_jacobi(1.5, 1.0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(catalog::make_geom_assoc("nope", 1.0), InvalidArgument);
}

TEST_CASE("marginal boundary exactness: lambda = 0 and t = 0") {
    rng::RngStream s(99, 0);
    for (int draw = 0; draw < 20; ++draw) {
        const double x = 4.0 * s.uniform();
        const double delta = 4.0 * s.uniform();
        const double alpha = 2.0 * s.uniform();
        const double t = 0.1 + 2.0 * s.uniform();
        const double lam = 0.1 + 3.0 * s.uniform();
        const std::vector<ProcessSpec> specs = {
            catalog::make_gbesq1(x, TimeFunction::constant(delta)),
            catalog::make_gbesq2(x, TimeFunction::constant(delta),
                                 TimeFunction::constant(-alpha)),
            catalog::make_srou(x, delta, alpha),
            catalog::make_bridge(x, delta),
        };
        for (const auto& spec : specs) {
            const double t_eval =
                std::holds_alternative<catalog::BesselBridge>(spec) ? t / 3.0 : t;
            CHECK(catalog::laplace_marginal(spec, t_eval, 0.0) == 1.0);
            CHECK(std::abs(catalog::laplace_marginal(spec, 0.0, lam) -
                           std::exp(-lam * x)) <= 1e-12);
        }
    }
}

TEST_CASE("standard besq reduction on a (t, lambda) grid") {
    const double x = 1.3, delta = 2.7;
    const auto spec = catalog::make_gbesq1(x, TimeFunction::constant(delta));
    const auto spec_expr = catalog::make_gbesq1(x, TimeFunction::expression("2.7", 16.0));
    for (int i = 1; i <= 10; ++i) {
        for (int j = 1; j <= 10; ++j) {
            const double t = 0.2 * i;
            const double lam = 0.3 * j;
            const double closed = catalog::besq_marginal(x, delta, t, lam);
            CHECK(catalog::laplace_marginal(spec, t, lam) ==
                  doctest::Approx(closed).epsilon(1e-13));
            // quadrature route (expression-backed delta) within 1e-10
            CHECK(std::abs(catalog::laplace_marginal(spec_expr, t, lam) - closed) <
                  1e-10);
        }
    }
}

TEST_CASE("paper value: gbesq1 delta=2 x=1 t=1 lambda=1 is exp(-1/3)/3") {
    const auto spec = besq2(1.0);
    CHECK(catalog::laplace_marginal(spec, 1.0, 1.0) ==
          doctest::Approx(std::exp(-1.0 / 3.0) / 3.0).epsilon(1e-14));
}

TEST_CASE("gbesq2 with theta == 0 equals gbesq1 with the same delta") {
    const std::string delta_src = "1+0.5*sin(t)";
    const auto g1 = catalog::make_gbesq1(0.8, TimeFunction::expression(delta_src, 8.0));
    const auto g2 = catalog::make_gbesq2(0.8, TimeFunction::expression(delta_src, 8.0),
                                         TimeFunction::constant(0.0));
    for (double t : {0.3, 1.0, 2.5}) {
        for (double lam : {0.2, 1.0, 3.0}) {
            CHECK(std::abs(catalog::laplace_marginal(g1, t, lam) -
                           catalog::laplace_marginal(g2, t, lam)) < 1e-10);
        }
    }
}

TEST_CASE("gbesq2 exponent pair: documented examples") {
    const auto delta0 = TimeFunction::constant(0.0);
    const auto theta0 = TimeFunction::constant(0.0);

    auto e = catalog::gbesq2_phi_psi(delta0, theta0, 1.7, 0.0);
    CHECK(e.phi == 0.0);
    CHECK(e.psi == 0.0);

    // theta == 0, Delta == 0: phi = lambda/(1+2*lambda*t), psi = 0
    e = catalog::gbesq2_phi_psi(delta0, theta0, 2.0, 1.5);
    CHECK(e.phi == doctest::Approx(1.5 / (1.0 + 3.0 * 2.0)).epsilon(1e-14));
    CHECK(e.psi == doctest::Approx(0.0));

    // theta == c < 0: phi = l c e^{2ct} / (c + l (e^{2ct} - 1))
    const double c = -0.7, lam = 1.3, t = 0.9;
    const auto theta_c = TimeFunction::constant(c);
    e = catalog::gbesq2_phi_psi(delta0, theta_c, t, lam);
    const double phi_closed =
        lam * c * std::exp(2.0 * c * t) / (c + lam * std::expm1(2.0 * c * t));
    CHECK(e.phi == doctest::Approx(phi_closed).epsilon(1e-12));
    // ... which differs from the doubled-denominator candidate
    CHECK(std::abs(catalog::jj31_flow_y(lam, c, t) - e.phi) > 1e-3);
}

TEST_CASE("gbesq2 with constant theta matches the srou flow pipeline") {
    // theta == -alpha, Delta == delta is the same process as srou
    const double x = 1.0, delta = 1.0, alpha = 1.0;
    const auto g2 = catalog::make_gbesq2(x, TimeFunction::constant(delta),
                                         TimeFunction::constant(-alpha));
    const auto srou = catalog::make_srou(x, delta, alpha);
    for (double t : {0.25, 1.0, 2.0}) {
        for (double lam : {0.5, 1.0, 2.0}) {
            CHECK(catalog::laplace_marginal(g2, t, lam) ==
                  doctest::Approx(catalog::laplace_marginal(srou, t, lam))
                      .epsilon(1e-11));
        }
    }
}

TEST_CASE("bridge marginal: displayed formula, endpoint limit, gbesq2 route") {
    const double x = 1.0, delta = 2.0;
    const auto bridge = catalog::make_bridge(x, delta);
    CHECK(catalog::laplace_marginal(bridge, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(catalog::laplace_marginal(bridge, 1.0 - 1e-9, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-6));

    // the generalized-family machinery with theta = -1/(1-t) agrees
    const auto theta_bridge = TimeFunction::expression("-1/(1-t)", 0.95);
    const auto delta_c = TimeFunction::constant(delta);
    for (double t : {0.2, 0.5, 0.9}) {
        for (double lam : {0.4, 1.0, 2.0}) {
            const auto e = catalog::gbesq2_phi_psi(delta_c, theta_bridge, t, lam);
            const double via_gbesq2 = std::exp(-x * e.phi - e.psi);
            CHECK(catalog::laplace_marginal(bridge, t, lam) ==
                  doctest::Approx(via_gbesq2).epsilon(1e-9));
        }
    }
}

TEST_CASE("srou pipeline: alpha -> 0 reduces to besq, displayed form does not") {
    const double x = 1.0, delta = 2.0;
    const auto srou0 = catalog::make_srou(x, delta, 0.0);
    for (double t : {0.5, 1.0}) {
        for (double lam : {0.5, 1.0, 2.0}) {
            CHECK(catalog::laplace_marginal(srou0, t, lam) ==
                  doctest::Approx(catalog::besq_marginal(x, delta, t, lam))
                      .epsilon(1e-13));
        }
    }
    // catalogued discrepancy point: the displayed form sits far from the
    // pipeline value; the mc oracle adjudicates in the verifier
    const double pipeline =
        catalog::laplace_marginal(catalog::make_srou(1.0, 2.0, 1.0), 1.0, 1.0);
    const double displayed = catalog::paper_displayed_srou(1.0, 2.0, 1.0, 1.0, 1.0);
    CHECK(std::abs(pipeline - displayed) > 0.05);
    // both agree at t = 0
    CHECK(catalog::paper_displayed_srou(1.0, 2.0, 1.0, 0.0, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    // pipeline tends to the stationary gamma transform (1 + lam/alpha)^{-d/2}
    const double far = catalog::laplace_marginal(catalog::make_srou(1.0, 2.0, 1.0),
                                                 30.0, 1.0);
    CHECK(far == doctest::Approx(std::pow(2.0, -1.0)).epsilon(1e-8));
}

TEST_CASE("lambda -> marginal is 1 at 0, decreasing, log-convex") {
    const std::vector<ProcessSpec> specs = {
        besq2(1.0),
        catalog::make_gbesq2(1.0, TimeFunction::expression("1+0.5*sin(t)", 8.0),
                             TimeFunction::expression("-0.25-0.1*t", 8.0)),
        catalog::make_srou(1.0, 2.0, 1.0),
        catalog::make_bridge(1.0, 2.0),
    };
    for (const auto& spec : specs) {
        const double t = std::holds_alternative<catalog::BesselBridge>(spec) ? 0.5 : 1.0;
        std::vector<double> values;
        for (int i = 0; i < 50; ++i) values.push_back(
            catalog::laplace_marginal(spec, t, 0.1 + 0.1 * i));
        CHECK(catalog::laplace_marginal(spec, t, 0.0) == 1.0);
        for (std::size_t i = 1; i < values.size(); ++i)
            CHECK(values[i] < values[i - 1]);
        // pairwise midpoint test on log-values (equally spaced grid)
        for (std::size_t i = 0; i + 2 < values.size(); ++i) {
            const double mid = std::log(values[i + 1]);
            const double avg = 0.5 * (std::log(values[i]) + std::log(values[i + 2]));
            CHECK(mid <= avg + 1e-12);
        }
    }
}

TEST_CASE("monotonicity in the initial state on a 5x5 grid") {
    for (int fam = 0; fam < 4; ++fam) {
        const auto make = [&](double x) -> ProcessSpec {
            switch (fam) {
                case 0: return besq2(x);
                case 1:
                    return catalog::make_gbesq2(x, TimeFunction::constant(1.0),
                                                TimeFunction::constant(-1.0));
                case 2: return catalog::make_srou(x, 2.0, 1.0);
                default: return catalog::make_bridge(x, 2.0);
            }
        };
        const auto lo = make(0.7);
        const auto hi = make(1.9);
        for (int i = 1; i <= 5; ++i) {
            for (int j = 1; j <= 5; ++j) {
                const double t = (fam == 3 ? 0.16 : 0.4) * i;
                const double lam = 0.5 * j;
                CHECK(catalog::laplace_marginal(hi, t, lam) <=
                      catalog::laplace_marginal(lo, t, lam) + 1e-14);
            }
        }
    }
}

TEST_CASE("marginal rejects invalid queries") {
    const auto spec = besq2(1.0);
    CHECK_THROWS_AS(catalog::laplace_marginal(spec, 1.0, -0.5), DomainError);
    CHECK_THROWS_AS(catalog::laplace_marginal(spec, -1.0, 0.5), DomainError);
    const auto bridge = catalog::make_bridge(1.0, 2.0);
    CHECK_THROWS_AS(catalog::laplace_marginal(bridge, 1.5, 0.5), DomainError);
    CHECK_THROWS_AS(catalog::laplace_marginal(catalog::make_pgsce(1.0, 1.0), 1.0, 1.0),
                    InvalidArgument);
}
