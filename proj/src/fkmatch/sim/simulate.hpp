#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "catalog/process.hpp"
#include "numerics/rng.hpp"

namespace fkmatch::sim {

enum class Scheme {
    auto_select,
    euler_full_truncation,
    euler_reciprocal,     // Pgsce only: simulate Y = 1/X via its linear SDE
    exact_besq_terminal,  // GBesq1 with constant Delta only
};

Scheme scheme_for(const catalog::ProcessSpec& spec, Scheme requested);
std::string scheme_name(Scheme s);

struct SimConfig {
    double t_end = 1.0;
    double dt = 1e-3;
    std::uint64_t n_paths = 100000;
    std::uint64_t master_seed = 1;
    Scheme scheme = Scheme::auto_select;
    // Cap on n_paths * steps per estimate; FKMATCH_BUDGET scales the
    // default at the CLI layer.
    std::uint64_t max_total_steps = 200'000'000'000ull;
};

// Functional of one path: terminal_map applied to X_t, plus an optional
// integrand accumulated as int_0^t by the trapezoidal rule on the
// simulation grid. Combined as
//   exp_neg:     exp(-(lambda * terminal_map(X_t) + weight * integral))
//   product_exp: terminal_map(X_t) * exp(-weight * integral)
//   raw:         terminal_map(X_t)
struct PathFunctional {
    std::function<double(double)> terminal_map = [](double x) { return x; };
    std::function<double(double, double)> integrand;  // (u, X_u); optional
    enum class Combiner { exp_neg, product_exp, raw } combiner = Combiner::raw;
    double lambda = 1.0;
    double weight = 0.0;

    // e^{-lambda X_t - gamma int_0^t X_u du}
    static PathFunctional exp_terminal_integral(double lambda, double gamma);
    static PathFunctional raw_terminal();
};

struct PathRecord {
    double terminal = 0.0;
    double integral = 0.0;
    double value = 0.0;
    bool flagged = false;         // non-finite state encountered
    std::uint64_t clips = 0;      // steps spent pinned at a clipped boundary
};

// Advances one path with the scheme's stepping rules:
//  - full truncation evaluates drift/diffusion at max(x, 0) (Jacobi: state
//    clamped to [0,1], baff: state clamped at 0) and feeds the truncated
//    state to the functional;
//  - the reciprocal scheme simulates Y = 1/X through
//    dY = Y (dt - dB) + c dt and reports X = 1/Y;
//  - exact_besq_terminal draws the terminal value directly (no integrand).
// All Brownian increments come from `stream` only.
PathRecord simulate_path(const catalog::ProcessSpec& spec, const SimConfig& cfg,
                         rng::RngStream& stream, const PathFunctional& functional);

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_paths = 0;
    std::uint64_t flagged = 0;
    std::uint64_t clipped = 0;
    SimConfig config;
};

// Mean/stderr over n_paths, path i drawing from stream index i. The
// reduction is a fixed-shape pairwise tree over fixed-size blocks, so the
// result is bit-identical for any worker count. Throws when more than 0.1%
// of paths flag non-finite states, or when the step budget is exceeded.
MCEstimate mc_expectation(const catalog::ProcessSpec& spec,
                          const PathFunctional& functional, const SimConfig& cfg);

// Same driver for functionals sampled directly from a stream (Brownian
// path functionals on an exact grid, closed-form path maps).
MCEstimate mc_stream_expectation(
    const std::function<double(rng::RngStream&)>& per_path, const SimConfig& cfg);

// Exact BESQ_delta terminal draw from x0 at time t > 0:
// Poisson(x0/(2t))-mixed Gamma(delta/2 + N, scale 2t).
double sample_besq_terminal(double delta, double x0, double t,
                            rng::RngStream& stream);

struct PairedReport {
    double max_sup = 0.0;        // max over paths of sup_t |mapA - mapB|
    double max_terminal = 0.0;
    double mean_terminal = 0.0;
    std::uint64_t n_paths = 0;
};

// Advances both processes with the same Gaussian increments per step and
// compares mapA(X^A) against mapB(X^B) along the grid.
PairedReport paired_pathwise(const catalog::ProcessSpec& spec_a,
                             const std::function<double(double)>& map_a,
                             const catalog::ProcessSpec& spec_b,
                             const std::function<double(double)>& map_b,
                             const SimConfig& cfg);

// Worker count for path-level parallelism; FKMATCH_WORKERS overrides.
int worker_count();

}  // namespace fkmatch::sim
