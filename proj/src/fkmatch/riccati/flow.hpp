#pragma once

#include <functional>
#include <variant>

#include "catalog/process.hpp"

namespace fkmatch::riccati {

// Flow map x0 -> y_{x0}(t) of the characteristic equation
//
//   y' = 2 y^2 - 2 y theta(t) - gamma,   y(0) = x0,
//
// the time-reversed characteristic of the transform PDE
// dp/dt = (gamma - 2 l^2 + 2 l theta(t)) dp/dl - Delta(t) l p. One
// orientation is fixed throughout: the flow runs the equation above
// forward, and inversion integrates the same equation backward from the
// terminal value, which is its exact inverse. Worked gamma = 0 example:
// theta == 0 gives y_{x0}(t) = x0/(1 - 2 x0 t), whose backward inverse
// from (t, lambda) is lambda/(1 + 2 lambda t), the marginal characteristic.
struct RiccatiFlow {
    struct ClosedGdlp {};                  // theta == 0
    struct ClosedSrou { double alpha; };   // theta == -alpha
    struct ClosedBridge {};                // theta(t) = -1/(1-t)
    struct Numeric { int n_steps = 4000; };
    using Repr = std::variant<ClosedGdlp, ClosedSrou, ClosedBridge, Numeric>;

    std::function<double(double)> theta;
    double gamma = 0.0;
    Repr repr = Numeric{};
};

// y_{x0}(t); throws OdeBlowUp (with a blow-up time estimate for the closed
// representations) when the flow leaves through infinity before t.
double riccati_flow(const RiccatiFlow& rf, double x0, double t);

// Numeric continuation of the flow from (t0, y0) to t1; used by the
// semigroup checks.
double riccati_flow_segment(const RiccatiFlow& rf, double y0, double t0, double t1);

// x0(t, lambda) with y_{x0(t,lambda)}(t) = lambda; closed representations
// use their displayed inverses, the numeric one integrates backward.
double invert_flow(const RiccatiFlow& rf, double t, double lambda);

// Backward pass returning both x0(t, lambda) and
// int_0^t Delta(u) y(u) du along the same trajectory.
catalog::PhiPsi invert_flow_with_integral(const RiccatiFlow& rf,
                                          const std::function<double(double)>& delta,
                                          double t, double lambda);

// Joint transform E exp(-lambda X_t - gamma int_0^t X_u du) as
// exp(-x phi - psi), phi = x0(t, lambda), psi = int Delta(u) y(u) du.
// Families: gbesq1, gbesq2, srou, bridge. gamma = 0 delegates to the
// marginal; the bridge is evaluated on [0, 1 - 1e-6] with the endpoint
// served by the limit value.
double joint_laplace(const catalog::ProcessSpec& spec, double t, double lambda,
                     double gamma);

// Same transform forced through the numeric flow; reference path for
// closed-form agreement checks.
double joint_laplace_numeric(const catalog::ProcessSpec& spec, double t,
                             double lambda, double gamma, int n_steps = 4000);

// The family's flow (theta and closed tag) at a given gamma.
RiccatiFlow family_flow(const catalog::ProcessSpec& spec, double gamma);
RiccatiFlow family_flow_numeric(const catalog::ProcessSpec& spec, double gamma,
                                int n_steps = 4000);

}  // namespace fkmatch::riccati
