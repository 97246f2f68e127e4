#include "riccati/flow.hpp"

#include <array>
#include <cmath>

#include "errors.hpp"
#include "numerics/ode.hpp"
#include "numerics/quadrature.hpp"

namespace fkmatch::riccati {

namespace {

constexpr double kBridgeEdge = 1e-6;  // joint bridge domain is [0, 1 - kBridgeEdge]

quad::QuadratureConfig psi_quadrature() {
    quad::QuadratureConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    return cfg;
}

int scaled_steps(int n_steps, double t) {
    const double span = std::max(std::abs(t), 1.0);
    return std::max(16, static_cast<int>(std::ceil(n_steps * span)));
}

// y' = 2y^2 - 2*alpha^2 (theta == 0, gamma = 2 alpha^2):
// y(t) = alpha * [1 + 2(x0-alpha) e^{4at} / (2a + (x0-alpha)(1-e^{4at}))].
double gdlp_flow(double gamma, double x0, double t) {
    const double alpha = std::sqrt(0.5 * gamma);
    const double e = std::exp(4.0 * alpha * t);
    const double denom = 2.0 * alpha + (x0 - alpha) * (1.0 - e);
    if (denom == 0.0 || !std::isfinite(denom) ||
        (x0 > alpha && denom < 0.0)) {
        // Blow-up at e^{4at*} = 1 + 2a/(x0-a).
        const double t_star =
            x0 > alpha ? std::log1p(2.0 * alpha / (x0 - alpha)) / (4.0 * alpha)
                       : t;
        throw OdeBlowUp("riccati flow blow-up", t_star, x0);
    }
    return alpha * (1.0 + 2.0 * (x0 - alpha) * e / denom);
}

double gdlp_invert(double gamma, double t, double lambda) {
    const double alpha = std::sqrt(0.5 * gamma);
    const double e = std::exp(4.0 * alpha * t);
    const double denom = 2.0 * alpha * e - (lambda - alpha) * (1.0 - e);
    if (denom == 0.0 || !std::isfinite(denom))
        throw NotInvertible("riccati inverse undefined here");
    return alpha * (1.0 + 2.0 * (lambda - alpha) / denom);
}

// theta == -alpha, a = (sqrt(alpha^2 + 2 gamma) - alpha)/2, m = 2a + alpha.
double srou_flow(double gamma, double alpha, double x0, double t) {
    const double m = std::sqrt(alpha * alpha + 2.0 * gamma);
    const double a = 0.5 * (m - alpha);
    const double e = std::exp(2.0 * t * m);
    const double denom = m + (x0 - a) * (1.0 - e);
    if (denom == 0.0 || !std::isfinite(denom) || (x0 > a && denom < 0.0)) {
        const double t_star =
            x0 > a ? std::log1p(m / (x0 - a)) / (2.0 * m) : t;
        throw OdeBlowUp("riccati flow blow-up", t_star, x0);
    }
    return a + e * (x0 - a) * m / denom;
}

double srou_invert(double gamma, double alpha, double t, double lambda) {
    const double m = std::sqrt(alpha * alpha + 2.0 * gamma);
    const double a = 0.5 * (m - alpha);
    const double e = std::exp(2.0 * t * m);
    const double denom = e * (a + alpha + lambda) + a - lambda;
    if (denom == 0.0 || !std::isfinite(denom))
        throw NotInvertible("riccati inverse undefined here");
    return a + (lambda - a) * m / denom;
}

// psi for the srou representation in closed form:
// delta*a*t - (delta/2) log|1 + (l-a)(1-e^{2tm}) / (e^{2tm}(a+l+alpha)+a-l)|.
double srou_psi(double gamma, double alpha, double delta, double t, double lambda) {
    const double m = std::sqrt(alpha * alpha + 2.0 * gamma);
    const double a = 0.5 * (m - alpha);
    const double e = std::exp(2.0 * t * m);
    const double frac =
        (lambda - a) * (1.0 - e) / (e * (a + lambda + alpha) + a - lambda);
    return delta * a * t - 0.5 * delta * std::log(std::abs(1.0 + frac));
}

// theta(t) = -1/(1-t): substituting v(s) = y(1-s) + 1/(2s) reduces the
// equation to v' = -2 v^2 + gamma, so with beta = sqrt(gamma/2),
// y_{x0}(t) = beta - 1/(2(1-t))
//             + e^{2 sqrt(2g) t} / (1/(x0 + 1/2 - beta) + (1 - e^{2 sqrt(2g) t})/sqrt(2g)).
double bridge_flow(double gamma, double x0, double t) {
    const double beta = std::sqrt(0.5 * gamma);
    const double s2g = std::sqrt(2.0 * gamma);  // == 2 beta
    const double e = std::exp(s2g * 2.0 * t);
    const double bracket = 1.0 / (x0 + 0.5 - beta) + (1.0 - e) / s2g;
    const double y = beta - 0.5 / (1.0 - t) + e / bracket;
    if (!std::isfinite(y)) {
        if (std::isinf(bracket)) return beta - 0.5 / (1.0 - t);  // equilibrium branch
        throw OdeBlowUp("riccati flow blow-up", t, x0);
    }
    return y;
}

double bridge_invert(double gamma, double t, double lambda) {
    const double beta = std::sqrt(0.5 * gamma);
    const double s2g = std::sqrt(2.0 * gamma);
    const double e = std::exp(s2g * 2.0 * t);
    const double bracket = e / (lambda + 0.5 / (1.0 - t) - beta) - (1.0 - e) / s2g;
    const double x0 = beta - 0.5 + 1.0 / bracket;
    if (!std::isfinite(x0)) {
        if (std::isinf(bracket)) return beta - 0.5;
        throw NotInvertible("riccati inverse undefined here");
    }
    return x0;
}

double flow_rhs(const RiccatiFlow& rf, double u, double y) {
    return 2.0 * y * y - 2.0 * y * rf.theta(u) - rf.gamma;
}

}  // namespace

double riccati_flow(const RiccatiFlow& rf, double x0, double t) {
    if (t == 0.0) return x0;
    if (const auto* g = std::get_if<RiccatiFlow::ClosedGdlp>(&rf.repr)) {
        (void)g;
        return gdlp_flow(rf.gamma, x0, t);
    }
    if (const auto* s = std::get_if<RiccatiFlow::ClosedSrou>(&rf.repr))
        return srou_flow(rf.gamma, s->alpha, x0, t);
    if (std::holds_alternative<RiccatiFlow::ClosedBridge>(rf.repr))
        return bridge_flow(rf.gamma, x0, t);
    const auto& num = std::get<RiccatiFlow::Numeric>(rf.repr);
    return ode::rk4_final([&](double u, double y) { return flow_rhs(rf, u, y); },
                          x0, 0.0, t, scaled_steps(num.n_steps, t));
}

double riccati_flow_segment(const RiccatiFlow& rf, double y0, double t0, double t1) {
    if (t0 == t1) return y0;
    const int n_steps =
        std::holds_alternative<RiccatiFlow::Numeric>(rf.repr)
            ? std::get<RiccatiFlow::Numeric>(rf.repr).n_steps
            : 4000;
    return ode::rk4_final([&](double u, double y) { return flow_rhs(rf, u, y); },
                          y0, t0, t1, scaled_steps(n_steps, t1 - t0));
}

double invert_flow(const RiccatiFlow& rf, double t, double lambda) {
    if (t == 0.0) return lambda;
    if (std::holds_alternative<RiccatiFlow::ClosedGdlp>(rf.repr))
        return gdlp_invert(rf.gamma, t, lambda);
    if (const auto* s = std::get_if<RiccatiFlow::ClosedSrou>(&rf.repr))
        return srou_invert(rf.gamma, s->alpha, t, lambda);
    if (std::holds_alternative<RiccatiFlow::ClosedBridge>(rf.repr))
        return bridge_invert(rf.gamma, t, lambda);
    const auto& num = std::get<RiccatiFlow::Numeric>(rf.repr);
    try {
        return ode::rk4_final(
            [&](double u, double y) { return flow_rhs(rf, u, y); }, lambda, t,
            0.0, scaled_steps(num.n_steps, t));
    } catch (const OdeBlowUp& e) {
        throw NotInvertible(std::string("flow not invertible here: ") + e.what());
    }
}

catalog::PhiPsi invert_flow_with_integral(const RiccatiFlow& rf,
                                          const std::function<double(double)>& delta,
                                          double t, double lambda) {
    if (t == 0.0) return {lambda, 0.0};
    if (std::holds_alternative<RiccatiFlow::Numeric>(rf.repr)) {
        // State (y, tail) backward from u = t: tail(u) = int_u^t Delta y.
        const auto& num = std::get<RiccatiFlow::Numeric>(rf.repr);
        using State = std::array<double, 2>;
        const std::function<State(double, const State&)> rhs =
            [&](double u, const State& s) -> State {
            return {flow_rhs(rf, u, s[0]), -delta(u) * s[0]};
        };
        State end{};
        try {
            end = ode::rk4_system<2>(rhs, {lambda, 0.0}, t, 0.0,
                                     scaled_steps(num.n_steps, t));
        } catch (const OdeBlowUp& e) {
            throw NotInvertible(std::string("flow not invertible here: ") + e.what());
        }
        return {end[0], end[1]};
    }
    const double phi = invert_flow(rf, t, lambda);
    if (const auto* s = std::get_if<RiccatiFlow::ClosedSrou>(&rf.repr)) {
        // Closed logarithm, valid for constant Delta.
        return {phi, srou_psi(rf.gamma, s->alpha, delta(0.0), t, lambda)};
    }
    const double psi = quad::integrate(
        [&](double u) { return delta(u) * riccati_flow(rf, phi, u); }, 0.0, t,
        psi_quadrature());
    return {phi, psi};
}

RiccatiFlow family_flow(const catalog::ProcessSpec& spec, double gamma) {
    RiccatiFlow rf;
    rf.gamma = gamma;
    if (const auto* g1 = std::get_if<catalog::GBesq1>(&spec)) {
        (void)g1;
        rf.theta = [](double) { return 0.0; };
        rf.repr = RiccatiFlow::ClosedGdlp{};
    } else if (const auto* g2 = std::get_if<catalog::GBesq2>(&spec)) {
        const auto theta = g2->theta;
        rf.theta = [theta](double u) { return theta(u); };
        rf.repr = RiccatiFlow::Numeric{};
    } else if (const auto* ou = std::get_if<catalog::SquaredRadialOu>(&spec)) {
        const double alpha = ou->alpha;
        rf.theta = [alpha](double) { return -alpha; };
        rf.repr = RiccatiFlow::ClosedSrou{alpha};
    } else if (std::holds_alternative<catalog::BesselBridge>(spec)) {
        rf.theta = [](double u) { return -1.0 / (1.0 - u); };
        rf.repr = RiccatiFlow::ClosedBridge{};
    } else {
        throw InvalidArgument("joint transform: family '" +
                              catalog::family_name(spec) + "' is not supported");
    }
    return rf;
}

RiccatiFlow family_flow_numeric(const catalog::ProcessSpec& spec, double gamma,
                                int n_steps) {
    RiccatiFlow rf = family_flow(spec, gamma);
    rf.repr = RiccatiFlow::Numeric{n_steps};
    return rf;
}

namespace {

std::function<double(double)> family_delta(const catalog::ProcessSpec& spec) {
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
    const auto& br = std::get<catalog::BesselBridge>(spec);
    const double d = br.delta;
    return [d](double) { return d; };
}

double joint_value(const catalog::ProcessSpec& spec, const RiccatiFlow& rf,
                   double t, double lambda) {
    const catalog::PhiPsi e =
        invert_flow_with_integral(rf, family_delta(spec), t, lambda);
    return std::exp(-catalog::initial_state(spec) * e.phi - e.psi);
}

double clamp_bridge_time(const catalog::ProcessSpec& spec, double t) {
    if (!std::holds_alternative<catalog::BesselBridge>(spec)) return t;
    if (t > 1.0) throw DomainError("bridge joint transform: t must lie in [0, 1]");
    return std::min(t, 1.0 - kBridgeEdge);
}

}  // namespace

double joint_laplace(const catalog::ProcessSpec& spec, double t, double lambda,
                     double gamma) {
    if (lambda < 0.0 || gamma < 0.0)
        throw DomainError("joint transform: lambda and gamma must be >= 0");
    if (t < 0.0) throw DomainError("joint transform: t must be >= 0");
    if (lambda == 0.0 && gamma == 0.0) return 1.0;
    if (gamma == 0.0) return catalog::laplace_marginal(spec, t, lambda);
    if (t == 0.0) return std::exp(-lambda * catalog::initial_state(spec));
    const double tt = clamp_bridge_time(spec, t);
    return joint_value(spec, family_flow(spec, gamma), tt, lambda);
}

double joint_laplace_numeric(const catalog::ProcessSpec& spec, double t,
                             double lambda, double gamma, int n_steps) {
    if (lambda < 0.0 || gamma < 0.0)
        throw DomainError("joint transform: lambda and gamma must be >= 0");
    if (t < 0.0) throw DomainError("joint transform: t must be >= 0");
    if (lambda == 0.0 && gamma == 0.0) return 1.0;
    if (t == 0.0) return std::exp(-lambda * catalog::initial_state(spec));
    const double tt = clamp_bridge_time(spec, t);
    return joint_value(spec, family_flow_numeric(spec, gamma, n_steps), tt, lambda);
}

}  // namespace fkmatch::riccati
