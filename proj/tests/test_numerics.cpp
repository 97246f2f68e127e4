#include <doctest.h>

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "numerics/expression.hpp"
#include "numerics/ode.hpp"
#include "numerics/quadrature.hpp"
#include "numerics/rng.hpp"
#include "numerics/roots.hpp"
#include "numerics/special.hpp"

using namespace fkmatch;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Reference vectors from the Random123 distribution.
    auto out = rng::philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("rng streams are reproducible and distinct") {
    rng::RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool all_equal = true, differs_c = false, differs_d = false;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        differs_c = differs_c || va != c.next_u64();
        differs_d = differs_d || va != d.next_u64();
    }
    CHECK(all_equal);
    CHECK(differs_c);
    CHECK(differs_d);
}

TEST_CASE("rng normal, gamma, poisson moments") {
    rng::RngStream s(2024, 0);
    const int n = 200000;
    double sum = 0, sum_sq = 0;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        sum += x;
        sum_sq += x * x;
    }
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(sum_sq / n - 1.0) < 6.0 / std::sqrt(double(n)));

    double gsum = 0;
    for (int i = 0; i < n; ++i) gsum += s.gamma(2.5, 2.0);
    CHECK(gsum / n == doctest::Approx(5.0).epsilon(0.02));

    double psum = 0;
    for (int i = 0; i < n; ++i) psum += double(s.poisson(3.7));
    CHECK(psum / n == doctest::Approx(3.7).epsilon(0.02));
    // splitting regime
    double psum_big = 0;
    for (int i = 0; i < 20000; ++i) psum_big += double(s.poisson(130.0));
    CHECK(psum_big / 20000 == doctest::Approx(130.0).epsilon(0.01));
}

TEST_CASE("quadrature basics") {
    quad::QuadratureConfig cfg;
    CHECK(quad::integrate([](double) { return 1.0; }, 0, 1, cfg) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(quad::integrate([](double t) { return t; }, 0, 1, cfg) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(quad::integrate([](double) { return 1.0; }, 2, 2, cfg) == 0.0);
    // integral_0^1 delta/(1+2 lambda u) du at delta=2, lambda=1 has
    // antiderivative (delta/(2 lambda)) log(1+2 lambda t) = log(3).
    const double ln3 = 1.09861228866810969139524523692;
    CHECK(quad::integrate([](double u) { return 2.0 / (1.0 + 2.0 * u); }, 0, 1, cfg) ==
          doctest::Approx(ln3).epsilon(1e-12));
}

TEST_CASE("gauss-legendre is exact on low-degree polynomials") {
    for (int n : {2, 5, 8, 16}) {
        // degree 2n-1 polynomial: x^(2n-1) + x^2 + 1 over [-1, 2]
        const int deg = 2 * n - 1;
        const auto f = [deg](double x) { return std::pow(x, deg) + x * x + 1.0; };
        const double a = -1.0, b = 2.0;
        const double exact = (std::pow(b, deg + 1) - std::pow(a, deg + 1)) / (deg + 1) +
                             (b * b * b - a * a * a) / 3.0 + (b - a);
        CHECK(quad::gauss_legendre(f, a, b, n) ==
              doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("quadrature non-convergence carries the best estimate") {
    quad::QuadratureConfig cfg;
    cfg.max_subdivisions = 2;
    cfg.abs_tol = 1e-15;
    cfg.rel_tol = 1e-15;
    const auto f = [](double x) { return std::sqrt(std::abs(x - 0.3141)); };
    CHECK_THROWS_AS(quad::integrate(f, 0, 1, cfg), NumericalError);
    try {
        quad::integrate(f, 0, 1, cfg);
    } catch (const NumericalError& e) {
        CHECK(e.best_estimate == doctest::Approx(0.394).epsilon(0.05));
    }
}

TEST_CASE("cumulative integral matches direct quadrature") {
    const auto f = [](double u) { return std::exp(-0.3 * u) + std::sin(u); };
    quad::CumulativeIntegral F(f, 4.0, 512);
    for (double u : {0.0, 0.1, 0.7303, 2.5, 4.0}) {
        const double direct = quad::integrate(f, 0, u);
        CHECK(F(u) == doctest::Approx(direct).epsilon(1e-12));
    }
    CHECK_THROWS_AS(F(4.5), DomainError);
}

TEST_CASE("rk4 basics") {
    const auto zero_rhs = [](double, double) { return 0.0; };
    CHECK(ode::rk4_final(zero_rhs, 5.0, 0, 1, 10) == 5.0);

    // y' = -2y^2, y(0)=1 -> y(t) = 1/(1+2t); y(1) = 1/3
    const auto rhs = [](double, double y) { return -2.0 * y * y; };
    CHECK(ode::rk4_final(rhs, 1.0, 0, 1, 200) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));

    // backward integration inverts the flow
    const double fwd = ode::rk4_final(rhs, 1.0, 0, 1, 400);
    CHECK(ode::rk4_final(rhs, fwd, 1, 0, 400) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rk4 empirical order on y' = -2y^2 is ~4") {
    const auto rhs = [](double, double y) { return -2.0 * y * y; };
    const double exact = 1.0 / 3.0;
    const double e1 = std::abs(ode::rk4_final(rhs, 1.0, 0, 1, 20) - exact);
    const double e2 = std::abs(ode::rk4_final(rhs, 1.0, 0, 1, 40) - exact);
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.5);
    CHECK(order < 4.5);
}

TEST_CASE("rk4 vs closed-form riccati solution y' = 2y^2 - 2a^2") {
    // alpha = 1, x0 = 0.5, t = 0.3; closed form
    // y(t) = a[1 + 2(x0-a)e^{4at}/(2a + (x0-a)(1-e^{4at}))]
    const double alpha = 1.0, x0 = 0.5, t = 0.3;
    const double e = std::exp(4.0 * alpha * t);
    const double closed =
        alpha * (1.0 + 2.0 * (x0 - alpha) * e / (2.0 * alpha + (x0 - alpha) * (1.0 - e)));
    const auto rhs = [alpha](double, double y) { return 2.0 * y * y - 2.0 * alpha * alpha; };
    const double numeric = ode::rk4_final(rhs, x0, 0, t, 2000);
    CHECK(numeric == doctest::Approx(closed).epsilon(1e-8));
}

TEST_CASE("rk4 blow-up reports the last valid state") {
    const auto rhs = [](double, double y) { return y * y; };  // blows at t=1 from y0=1
    CHECK_THROWS_AS(ode::rk4_final(rhs, 1.0, 0, 2, 1000), OdeBlowUp);
}

TEST_CASE("brent root finding") {
    CHECK(roots::brent([](double x) { return x - 1.0; }, 0, 2) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(roots::brent([](double x) { return x * x - 2.0; }, 0, 2) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(roots::brent([](double x) { return std::exp(x) - 3.0; }, 0, 2) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(roots::brent([](double x) { return x * x + 1.0; }, 0, 2),
                    InvalidArgument);
}

TEST_CASE("bessel i0") {
    CHECK(special::bessel_i0(0.0) == 1.0);
    // series oracle: sum (z^2/4)^k / (k!)^2
    CHECK(special::bessel_i0(1.0) ==
          doctest::Approx(1.26606587775200833559824462521).epsilon(1e-12));
    CHECK(special::bessel_i0(10.0) ==
          doctest::Approx(2815.71662846625447146981115343).epsilon(1e-12));
    // continuity across the series/asymptotic switch
    CHECK(special::bessel_i0(17.9) ==
          doctest::Approx(5642579.56004840170752128261968).epsilon(1e-11));
    CHECK(special::bessel_i0(18.1) ==
          doctest::Approx(6853118.77696301134197441587305).epsilon(1e-11));
    CHECK(special::bessel_i0(25.0) ==
          doctest::Approx(5774560606.46631031577133979731).epsilon(1e-11));
    CHECK(special::bessel_i0_scaled(100.0) ==
          doctest::Approx(0.0399443792990966826475587051553).epsilon(1e-11));
    CHECK(special::bessel_i0_scaled(2.0) ==
          doctest::Approx(special::bessel_i0(2.0) * std::exp(-2.0)).epsilon(1e-13));
    CHECK_THROWS_AS(special::bessel_i0(-1.0), DomainError);
}

TEST_CASE("expression parser evaluates the documented examples") {
    using expr::parse_time_function;
    CHECK(parse_time_function("1")(3.7) == doctest::Approx(1.0));
    CHECK(parse_time_function("t*t")(2.0) == doctest::Approx(4.0));
    CHECK(parse_time_function("1+0.5*sin(t)")(0.0) == doctest::Approx(1.0));
    CHECK(parse_time_function(" 1 + 0.5 * sin( t ) ")(0.0) == doctest::Approx(1.0));
}

TEST_CASE("expression parser precedence and functions") {
    using expr::parse_time_function;
    CHECK(parse_time_function("-t^2")(3.0) == doctest::Approx(-9.0));
    CHECK(parse_time_function("2^-1")(0.0) == doctest::Approx(0.5));
    CHECK(parse_time_function("2^3^2")(0.0) == doctest::Approx(512.0));
    CHECK(parse_time_function("(1+t)*2-3/t")(1.0) == doctest::Approx(1.0));
    CHECK(parse_time_function("exp(log(t))")(2.5) == doctest::Approx(2.5));
    CHECK(parse_time_function("sqrt(t)*cos(0)")(9.0) == doctest::Approx(3.0));
    CHECK(parse_time_function("1-2-3")(0.0) == doctest::Approx(-4.0));
    CHECK(parse_time_function("12/3/2")(0.0) == doctest::Approx(2.0));
}

TEST_CASE("expression parser reports errors with positions") {
    CHECK_THROWS_AS(expr::parse("1+"), ParseError);
    CHECK_THROWS_AS(expr::parse("foo(t)"), ParseError);
    CHECK_THROWS_AS(expr::parse("(1+t"), ParseError);
    CHECK_THROWS_AS(expr::parse("1+t)"), ParseError);
    try {
        expr::parse("1 + bogus(t)");
    } catch (const ParseError& e) {
        CHECK(e.pos == 4);
    }
}

TEST_CASE("pretty-print round-trips to a structurally identical tree") {
    const std::vector<std::string> corpus = {
        "1",
        "t*t",
        "1+0.5*sin(t)",
        "-t^2",
        "2^-t",
        "2^3^2",
        "(1+t)*(2-t)/(3+t)",
        "exp(-(t^2)/2)",
        "sqrt(1+t*t)-log(2+cos(t))",
        "1-2-3",
        "1-(2-3)",
        "12/3/2",
        "-(t+1)",
        "t^(1+t)",
    };
    for (const auto& src : corpus) {
        const auto tree = expr::parse(src);
        const std::string printed = expr::pretty_print(*tree);
        const auto reparsed = expr::parse(printed);
        INFO(src, " -> ", printed);
        CHECK(expr::structurally_equal(*tree, *reparsed));
        // and the reprint is a fixed point
        CHECK(expr::pretty_print(*reparsed) == printed);
    }
}

TEST_CASE("time function kinds and role checks") {
    using expr::TimeFunction;
    const auto c = TimeFunction::constant(2.0);
    CHECK(c(123.0) == 2.0);
    CHECK(c.is_constant());

    const auto pw = TimeFunction::piecewise_linear({{0.0, 1.0}, {1.0, 3.0}, {2.0, 0.0}});
    CHECK(pw(0.5) == doctest::Approx(2.0));
    CHECK(pw(1.5) == doctest::Approx(1.5));
    CHECK_THROWS_AS(pw(2.5), DomainError);

    const auto e = TimeFunction::expression("1+0.5*sin(t)", 8.0);
    CHECK_THROWS_AS(e(9.0), DomainError);
    CHECK_NOTHROW(e.check_role(TimeFunction::Role::nonnegative, "delta"));
    const auto neg = TimeFunction::expression("-1+t", 8.0);
    CHECK_THROWS_AS(neg.check_role(TimeFunction::Role::nonnegative, "delta"),
                    DomainError);
    CHECK_THROWS_AS(neg.check_role(TimeFunction::Role::nonpositive, "theta"),
                    DomainError);
    CHECK_NOTHROW(TimeFunction::constant(-0.5).check_role(
        TimeFunction::Role::nonpositive, "theta"));
}
