#include "catalog/process.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace fkmatch::catalog {

namespace {

constexpr double kDefaultHorizon = 16.0;

// Tight tolerances: transform values feed finite-difference residual
// checks, so quadrature noise has to sit well under the h^2 signal.
quad::QuadratureConfig transform_quadrature() {
    quad::QuadratureConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    return cfg;
}

double finite_horizon(const TimeFunction& f) {
    return std::isfinite(f.t_max()) ? f.t_max() : kDefaultHorizon;
}

void require_nonneg(double v, const char* what) {
    if (!(v >= 0.0)) throw InvalidArgument(std::string(what) + " must be >= 0");
}

}  // namespace

GeomAssoc GeomAssoc::make(const std::string& preset, double x0) {
    GeomAssoc g;
    g.x0 = x0;
    g.preset = preset;
    if (preset == "sqrt2x") {
        // sigma = 2 sqrt(x), drift = sqrt(x) + 1, f = exp(sqrt(x))
        g.sigma = [](double x) { return 2.0 * std::sqrt(std::max(x, 0.0)); };
        g.drift = [](double x) { return std::sqrt(std::max(x, 0.0)) + 1.0; };
        g.assoc_map = [](double x) { return std::exp(std::sqrt(std::max(x, 0.0))); };
    } else if (preset == "gbm") {
        // sigma = x, drift = x, f = x: the associated motion itself
        g.sigma = [](double x) { return x; };
        g.drift = [](double x) { return x; };
        g.assoc_map = [](double x) { return x; };
    } else {
        throw InvalidArgument("unknown geom_assoc preset '" + preset + "'");
    }
    return g;
}

ProcessSpec make_gbesq1(double x0, TimeFunction delta) {
    require_nonneg(x0, "x0");
    delta.check_role(TimeFunction::Role::nonnegative, "delta");
    return GBesq1{x0, std::move(delta)};
}

ProcessSpec make_gbesq2(double x0, TimeFunction delta, TimeFunction theta) {
    require_nonneg(x0, "x0");
    delta.check_role(TimeFunction::Role::nonnegative, "delta");
    theta.check_role(TimeFunction::Role::nonpositive, "theta");
    const double horizon = std::min(finite_horizon(delta), finite_horizon(theta));
    auto curves = std::make_shared<Gbesq2Curves>(build_gbesq2_curves(theta, horizon));
    return GBesq2{x0, std::move(delta), std::move(theta), std::move(curves)};
}

ProcessSpec make_srou(double x0, double delta, double alpha) {
    require_nonneg(x0, "x0");
    require_nonneg(delta, "delta");
    require_nonneg(alpha, "alpha");
    return SquaredRadialOu{x0, delta, alpha};
}

ProcessSpec make_bridge(double x0, double delta) {
    require_nonneg(x0, "x0");
    require_nonneg(delta, "delta");
    return BesselBridge{x0, delta};
}

ProcessSpec make_pgsce(double x0, double c) {
    if (!(x0 > 0.0)) throw InvalidArgument("pgsce: x0 must be > 0");
    if (!(c > 0.0)) throw InvalidArgument("pgsce: c must be > 0");
    return Pgsce{x0, c};
}

ProcessSpec make_baff(double x0, double a, double b) {
    require_nonneg(x0, "x0");
    require_nonneg(a, "a");
    return BAff{x0, a, b};
}

ProcessSpec make_cosh_bm() { return CoshBm{}; }

ProcessSpec make_geom_assoc(const std::string& preset, double x0) {
    require_nonneg(x0, "x0");
    return GeomAssoc::make(preset, x0);
}

ProcessSpec make_jacobi(double x0, double a, double b) {
    if (!(x0 >= 0.0 && x0 <= 1.0))
        throw InvalidArgument("jacobi: x0 must lie in [0, 1]");
    return Jacobi{x0, a, b};
}

std::string family_name(const ProcessSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GBesq1>) return "gbesq1";
            else if constexpr (std::is_same_v<T, GBesq2>) return "gbesq2";
            else if constexpr (std::is_same_v<T, SquaredRadialOu>) return "srou";
            else if constexpr (std::is_same_v<T, BesselBridge>) return "bridge";
            else if constexpr (std::is_same_v<T, Pgsce>) return "pgsce";
            else if constexpr (std::is_same_v<T, BAff>) return "baff";
            else if constexpr (std::is_same_v<T, CoshBm>) return "cosh";
            else if constexpr (std::is_same_v<T, GeomAssoc>) return "geom";
            else return "jacobi";
        },
        spec);
}

double initial_state(const ProcessSpec& spec) {
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CoshBm>) return 1.0;
            else return s.x0;
        },
        spec);
}

double time_horizon(const ProcessSpec& spec) {
    if (std::holds_alternative<BesselBridge>(spec)) return 1.0;
    return std::numeric_limits<double>::infinity();
}

Coefficients coefficients(const ProcessSpec& spec, double t, double x) {
    return std::visit(
        [&](const auto& s) -> Coefficients {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GBesq1>) {
                if (x < 0.0) throw DomainError("gbesq1: state must be >= 0");
                return {s.delta(t), 2.0 * std::sqrt(x)};
            } else if constexpr (std::is_same_v<T, GBesq2>) {
                if (x < 0.0) throw DomainError("gbesq2: state must be >= 0");
                return {s.delta(t) + 2.0 * s.theta(t) * x, 2.0 * std::sqrt(x)};
            } else if constexpr (std::is_same_v<T, SquaredRadialOu>) {
                if (x < 0.0) throw DomainError("srou: state must be >= 0");
                return {s.delta - 2.0 * s.alpha * x, 2.0 * std::sqrt(x)};
            } else if constexpr (std::is_same_v<T, BesselBridge>) {
                if (x < 0.0) throw DomainError("bridge: state must be >= 0");
                if (!(t < 1.0)) throw DomainError("bridge: drift needs t < 1");
                return {s.delta - 2.0 * x / (1.0 - t), 2.0 * std::sqrt(x)};
            } else if constexpr (std::is_same_v<T, Pgsce>) {
                if (x < 0.0) throw DomainError("pgsce: state must be >= 0");
                return {-s.c * x * x, x};
            } else if constexpr (std::is_same_v<T, BAff>) {
                if (x < 0.0) throw DomainError("baff: state must be >= 0");
                return {s.b * x + s.a, std::sqrt(std::abs(x * x + 2.0 * x))};
            } else if constexpr (std::is_same_v<T, CoshBm>) {
                if (x < 1.0) throw DomainError("cosh: state must be >= 1");
                return {0.5 * x, std::sqrt(x * x - 1.0)};
            } else if constexpr (std::is_same_v<T, GeomAssoc>) {
                if (x < 0.0) throw DomainError("geom: state must be >= 0");
                return {s.drift(x), s.sigma(x)};
            } else {
                if (!(x >= 0.0 && x <= 1.0))
                    throw DomainError("jacobi: state must lie in [0, 1]");
                return {s.b - s.a * x, std::sqrt(x * (1.0 - x))};
            }
        },
        spec);
}

Gbesq2Curves build_gbesq2_curves(const TimeFunction& theta, double t_max) {
    Gbesq2Curves curves;
    curves.t_max = t_max;
    if (theta.is_constant()) {
        const double c = theta.constant_value();
        curves.k = [c](double u) { return std::exp(-2.0 * c * u); };
        // int_0^u e^{-2cu}; expm1 keeps the c -> 0 limit exact.
        curves.k_int = [c](double u) {
            return c == 0.0 ? u : -std::expm1(-2.0 * c * u) / (2.0 * c);
        };
        return curves;
    }
    auto theta_int = std::make_shared<quad::CumulativeIntegral>(
        [theta](double u) { return theta(u); }, t_max);
    auto k = [theta_int](double u) { return std::exp(-2.0 * (*theta_int)(u)); };
    curves.k = k;
    auto k_cumulative = std::make_shared<quad::CumulativeIntegral>(k, t_max);
    curves.k_int = [k_cumulative](double u) { return (*k_cumulative)(u); };
    return curves;
}

PhiPsi gbesq2_phi_psi(const TimeFunction& delta, const Gbesq2Curves& curves,
                      double t, double lambda) {
    if (lambda < 0.0) throw DomainError("lambda must be >= 0");
    if (t < 0.0) throw DomainError("t must be >= 0");
    if (lambda == 0.0 || t == 0.0) return {lambda, 0.0};
    const double kt = curves.k(t);
    const double Kt = curves.k_int(t);
    const double phi = lambda / (kt + 2.0 * lambda * Kt);
    const auto integrand = [&](double u) {
        const double denom = 1.0 - 2.0 * phi * curves.k_int(u);
        if (!(denom > 0.0))
            throw NumericalError(
                "gbesq2 transform: singular denominator; unreachable for valid inputs");
        return delta(u) * curves.k(u) / denom;
    };
    const double psi = phi * quad::integrate(integrand, 0.0, t, transform_quadrature());
    return {phi, psi};
}

PhiPsi gbesq2_phi_psi(const TimeFunction& delta, const TimeFunction& theta,
                      double t, double lambda) {
    const double horizon = std::min(finite_horizon(delta), finite_horizon(theta));
    const Gbesq2Curves curves = build_gbesq2_curves(theta, horizon);
    return gbesq2_phi_psi(delta, curves, t, lambda);
}

double besq_marginal(double x, double delta, double t, double lambda) {
    const double denom = 1.0 + 2.0 * lambda * t;
    return std::pow(denom, -0.5 * delta) * std::exp(-x * lambda / denom);
}

double gbesq1_marginal_quadrature(double x, const TimeFunction& delta, double t,
                                  double lambda) {
    const auto integrand = [&](double u) { return delta(t - u) / (1.0 + 2.0 * lambda * u); };
    const double integral = quad::integrate(integrand, 0.0, t, transform_quadrature());
    return std::exp(-x * lambda / (1.0 + 2.0 * lambda * t) - lambda * integral);
}

double srou_flow_y(double lambda, double alpha, double t) {
    // h = (1 - e^{-2 alpha t}) / alpha, continuous at alpha = 0 where h = 2t.
    const double h = alpha == 0.0 ? 2.0 * t : -std::expm1(-2.0 * alpha * t) / alpha;
    return lambda * std::exp(-2.0 * alpha * t) / (1.0 + lambda * h);
}

double srou_flow_y_integral(double lambda, double alpha, double t) {
    const double h = alpha == 0.0 ? 2.0 * t : -std::expm1(-2.0 * alpha * t) / alpha;
    return 0.5 * std::log1p(lambda * h);
}

double paper_displayed_srou(double x, double delta, double alpha, double t,
                            double lambda) {
    if (lambda == 0.0) return 1.0;
    const double denom = (1.0 + alpha / lambda) * std::exp(2.0 * t * alpha) - 1.0;
    return std::exp(-0.5 * lambda * delta - alpha * (x - 0.5 * delta) / denom);
}

double jj31_flow_y(double lambda, double c, double t) {
    return lambda * c * std::exp(2.0 * c * t) /
           (c + 2.0 * lambda * std::expm1(2.0 * c * t));
}

double jj31_marginal(double x, double delta, double c, double t, double lambda) {
    if (lambda == 0.0) return 1.0;
    // int_0^t y = (1/4) log|(c + 2 l (e^{2ct}-1)) / c| for this y.
    const double y = jj31_flow_y(lambda, c, t);
    const double integral =
        0.25 * std::log(std::abs((c + 2.0 * lambda * std::expm1(2.0 * c * t)) / c));
    return std::exp(-x * y - delta * integral);
}

double laplace_marginal(const ProcessSpec& spec, double t, double lambda) {
    if (lambda < 0.0) throw DomainError("laplace_marginal: lambda must be >= 0");
    if (t < 0.0) throw DomainError("laplace_marginal: t must be >= 0");
    const double x = initial_state(spec);
    if (lambda == 0.0) return 1.0;
    if (t == 0.0) return std::exp(-lambda * x);

    if (const auto* g1 = std::get_if<GBesq1>(&spec)) {
        if (g1->delta.is_constant())
            return besq_marginal(x, g1->delta.constant_value(), t, lambda);
        return gbesq1_marginal_quadrature(x, g1->delta, t, lambda);
    }
    if (const auto* g2 = std::get_if<GBesq2>(&spec)) {
        const PhiPsi e = gbesq2_phi_psi(g2->delta, *g2->curves, t, lambda);
        return std::exp(-x * e.phi - e.psi);
    }
    if (const auto* ou = std::get_if<SquaredRadialOu>(&spec)) {
        const double y = srou_flow_y(lambda, ou->alpha, t);
        const double yi = srou_flow_y_integral(lambda, ou->alpha, t);
        return std::exp(-x * y - ou->delta * yi);
    }
    if (const auto* br = std::get_if<BesselBridge>(&spec)) {
        if (t > 1.0) throw DomainError("bridge marginal: t must lie in [0, 1]");
        const double denom = 1.0 + 2.0 * lambda * t * (1.0 - t);
        const double one_m_t = 1.0 - t;
        return std::pow(denom, -0.5 * br->delta) *
               std::exp(-x * lambda * one_m_t * one_m_t / denom);
    }
    throw InvalidArgument("laplace_marginal: no closed marginal for family '" +
                          family_name(spec) + "'");
}

}  // namespace fkmatch::catalog
