#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>

#include "numerics/expression.hpp"
#include "numerics/quadrature.hpp"

namespace fkmatch::catalog {

using expr::TimeFunction;

// dX = 2 sqrt(X) dB + Delta(t) dt
struct GBesq1 {
    double x0;
    TimeFunction delta;
};

// Time-integral curves for the generalized family with linear drift rate:
// theta_int(u) = int_0^u theta, k(u) = exp(-2 theta_int(u)),
// k_int(u) = int_0^u k. Precomputed once so transform evaluation stays cheap.
struct Gbesq2Curves {
    std::function<double(double)> k;
    std::function<double(double)> k_int;
    double t_max;
};

// dX = 2 sqrt(X) dB + (Delta(t) + 2 theta(t) X) dt, theta <= 0
struct GBesq2 {
    double x0;
    TimeFunction delta;
    TimeFunction theta;
    std::shared_ptr<const Gbesq2Curves> curves;
};

// dX = 2 sqrt(X) dB + (delta - 2 alpha X) dt
struct SquaredRadialOu {
    double x0;
    double delta;
    double alpha;
};

// dX = 2 sqrt(X) dB + (delta - 2X/(1-t)) dt on [0, 1)
struct BesselBridge {
    double x0;
    double delta;
};

// dX = X dB - c X^2 dt, x0 > 0, c > 0
struct Pgsce {
    double x0;
    double c;
};

// dX = sqrt(|X^2 + 2X|) dB + (bX + a) dt
struct BAff {
    double x0;
    double a;
    double b;
};

// X_t = cosh(B_t): drift x/2, diffusion sqrt(x^2 - 1), X_0 = 1
struct CoshBm {};

// Diffusion whose drift is forced to sigma/2 * (1 + sigma') so that
// f(X) = exp(int_a^x dz/sigma(z)) is a geometric Brownian motion.
// Constructed from a named preset; `assoc_map` is f.
struct GeomAssoc {
    double x0;
    std::string preset;
    std::function<double(double)> sigma;
    std::function<double(double)> drift;
    std::function<double(double)> assoc_map;
    static GeomAssoc make(const std::string& preset, double x0);
};

// dX = sqrt(X(1-X)) dB + (b - aX) dt on [0, 1]
struct Jacobi {
    double x0;
    double a;
    double b;
};

using ProcessSpec = std::variant<GBesq1, GBesq2, SquaredRadialOu, BesselBridge,
                                 Pgsce, BAff, CoshBm, GeomAssoc, Jacobi>;

// Constructors validate invariants (domains, sign roles) and precompute
// curves; always build specs through these.
ProcessSpec make_gbesq1(double x0, TimeFunction delta);
ProcessSpec make_gbesq2(double x0, TimeFunction delta, TimeFunction theta);
ProcessSpec make_srou(double x0, double delta, double alpha);
ProcessSpec make_bridge(double x0, double delta);
ProcessSpec make_pgsce(double x0, double c);
ProcessSpec make_baff(double x0, double a, double b);
ProcessSpec make_cosh_bm();
ProcessSpec make_geom_assoc(const std::string& preset, double x0);
ProcessSpec make_jacobi(double x0, double a, double b);

std::string family_name(const ProcessSpec& spec);
double initial_state(const ProcessSpec& spec);
// Upper end of the simulatable time domain (1 for the bridge, +inf else).
double time_horizon(const ProcessSpec& spec);

struct Coefficients {
    double drift;
    double diffusion;
};
// SDE coefficients exactly as displayed; throws DomainError for states
// outside the family's state space.
Coefficients coefficients(const ProcessSpec& spec, double t, double x);

// E exp(-lambda X_t) for GBesq1, GBesq2, SquaredRadialOu, BesselBridge.
// lambda = 0 and t = 0 take exact early returns.
double laplace_marginal(const ProcessSpec& spec, double t, double lambda);

struct PhiPsi {
    double phi;
    double psi;
};

// Exponent pair of the generalized family's marginal transform,
// E exp(-lambda X_t) = exp(-x * phi - psi):
//   phi = lambda / (k(t) + 2 lambda K(t)),  K(t) = int_0^t k,
//   psi = phi * int_0^t Delta(u) k(u) / (1 - 2 phi K(u)) du,
// with k(t) = exp(-2 int_0^t theta). The integrand's denominator is
// positive for every valid (t, lambda); hitting zero means a bug upstream.
PhiPsi gbesq2_phi_psi(const TimeFunction& delta, const TimeFunction& theta,
                      double t, double lambda);
PhiPsi gbesq2_phi_psi(const TimeFunction& delta, const Gbesq2Curves& curves,
                      double t, double lambda);

Gbesq2Curves build_gbesq2_curves(const TimeFunction& theta, double t_max);

// Standard squared Bessel marginal: (1+2*l*t)^{-d/2} exp(-x*l/(1+2*l*t)).
double besq_marginal(double x, double delta, double t, double lambda);

// Marginal of the generalized family via the displayed integral form,
// exp(-x*l/(1+2*l*t) - l * int_0^t Delta(t-u)/(1+2*l*u) du), evaluated by
// quadrature regardless of whether Delta is constant. Reference path for
// cross-checking the constant-Delta fast path.
double gbesq1_marginal_quadrature(double x, const TimeFunction& delta, double t,
                                  double lambda);

// Marginal characteristic of the squared radial OU family:
// y' = -2y(y + alpha), y(0) = lambda; continuous in alpha at 0.
double srou_flow_y(double lambda, double alpha, double t);

// int_0^t y(u) du for the flow above, in closed form.
double srou_flow_y_integral(double lambda, double alpha, double t);

// The displayed closed form exp(-l*d/2 - a(x-d/2)/((1+a/l)e^{2ta}-1)),
// shipped for side-by-side comparison only; the flow-based pipeline above
// is the marginal evaluation path.
double paper_displayed_srou(double x, double delta, double alpha, double t,
                            double lambda);

// Constant-rate specialization of the marginal characteristic written with
// a doubled coefficient in the denominator,
//   y(t) = l c e^{2ct} / (c + 2 l (e^{2ct} - 1)),
// kept as a candidate formula for the discrepancy ledger.
double jj31_flow_y(double lambda, double c, double t);
double jj31_marginal(double x, double delta, double c, double t, double lambda);

}  // namespace fkmatch::catalog
