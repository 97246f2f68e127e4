#include "sim/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace fkmatch::sim {

namespace {

constexpr double kClipFloor = 1e-10;
constexpr double kFlaggedFractionLimit = 1e-3;

std::uint64_t steps_per_path(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw InvalidArgument("sim: dt must be > 0");
    if (!(cfg.t_end >= cfg.dt)) throw InvalidArgument("sim: need dt <= t_end");
    return static_cast<std::uint64_t>(std::llround(cfg.t_end / cfg.dt));
}

bool clamps_to_unit_interval(const catalog::ProcessSpec& spec) {
    return std::holds_alternative<catalog::Jacobi>(spec);
}

bool clamps_at_zero(const catalog::ProcessSpec& spec) {
    return std::holds_alternative<catalog::BAff>(spec);
}

// Truncation floor for coefficient evaluation; the cosh family lives on
// [1, inf), everything else on [0, inf).
double state_floor(const catalog::ProcessSpec& spec) {
    return std::holds_alternative<catalog::CoshBm>(spec) ? 1.0 : 0.0;
}

}  // namespace

Scheme scheme_for(const catalog::ProcessSpec& spec, Scheme requested) {
    const bool is_pgsce = std::holds_alternative<catalog::Pgsce>(spec);
    const auto* g1 = std::get_if<catalog::GBesq1>(&spec);
    switch (requested) {
        case Scheme::auto_select:
            return is_pgsce ? Scheme::euler_reciprocal : Scheme::euler_full_truncation;
        case Scheme::euler_reciprocal:
            if (!is_pgsce)
                throw InvalidArgument("euler_reciprocal applies to the pgsce family only");
            return requested;
        case Scheme::exact_besq_terminal:
            if (g1 == nullptr || !g1->delta.is_constant())
                throw InvalidArgument(
                    "exact_besq_terminal applies to gbesq1 with constant delta only");
            return requested;
        case Scheme::euler_full_truncation:
            if (is_pgsce)
                throw InvalidArgument("pgsce is simulated with the reciprocal scheme");
            return requested;
    }
    return requested;
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::auto_select: return "auto";
        case Scheme::euler_full_truncation: return "euler_full_truncation";
        case Scheme::euler_reciprocal: return "euler_reciprocal";
        case Scheme::exact_besq_terminal: return "exact_besq_terminal";
    }
    return "?";
}

PathFunctional PathFunctional::exp_terminal_integral(double lambda, double gamma) {
    PathFunctional f;
    f.terminal_map = [](double x) { return x; };
    if (gamma != 0.0) f.integrand = [](double, double x) { return x; };
    f.combiner = Combiner::exp_neg;
    f.lambda = lambda;
    f.weight = gamma;
    return f;
}

PathFunctional PathFunctional::raw_terminal() {
    PathFunctional f;
    f.combiner = Combiner::raw;
    return f;
}

double sample_besq_terminal(double delta, double x0, double t,
                            rng::RngStream& stream) {
    if (!(delta >= 0.0) || !(x0 >= 0.0) || !(t > 0.0))
        throw InvalidArgument("sample_besq_terminal: need delta >= 0, x0 >= 0, t > 0");
    const std::uint64_t n = x0 == 0.0 ? 0 : stream.poisson(x0 / (2.0 * t));
    const double shape = 0.5 * delta + static_cast<double>(n);
    if (shape == 0.0) return 0.0;
    return stream.gamma(shape, 2.0 * t);
}

PathRecord simulate_path(const catalog::ProcessSpec& spec, const SimConfig& cfg,
                         rng::RngStream& stream, const PathFunctional& functional) {
    const Scheme scheme = scheme_for(spec, cfg.scheme);
    PathRecord rec;

    if (scheme == Scheme::exact_besq_terminal) {
        if (functional.integrand)
            throw InvalidArgument(
                "exact_besq_terminal cannot accumulate a pathwise integral");
        const auto& g1 = std::get<catalog::GBesq1>(spec);
        rec.terminal =
            sample_besq_terminal(g1.delta.constant_value(), g1.x0, cfg.t_end, stream);
    } else {
        const std::uint64_t n_steps = steps_per_path(cfg);
        const double dt = cfg.t_end / static_cast<double>(n_steps);
        const double sqrt_dt = std::sqrt(dt);
        const bool reciprocal = scheme == Scheme::euler_reciprocal;
        const bool unit_clamp = clamps_to_unit_interval(spec);
        const bool zero_clamp = clamps_at_zero(spec);
        const double floor = state_floor(spec);
        const double c = reciprocal ? std::get<catalog::Pgsce>(spec).c : 0.0;

        double state = catalog::initial_state(spec);
        if (reciprocal) state = 1.0 / state;

        const auto observed = [&](double s) {
            if (reciprocal) return 1.0 / s;
            return std::max(s, floor);
        };

        double integral = 0.0;
        double prev_g = 0.0;
        if (functional.integrand) prev_g = functional.integrand(0.0, observed(state));
        if (unit_clamp && functional.integrand &&
            (observed(state) < kClipFloor || observed(state) > 1.0 - kClipFloor))
            ++rec.clips;

        for (std::uint64_t i = 0; i < n_steps; ++i) {
            const double t = static_cast<double>(i) * dt;
            const double xi = stream.normal();
            const double dw = sqrt_dt * xi;
            if (reciprocal) {
                // dY = Y (dt - dB) + c dt
                state += state * (dt - dw) + c * dt;
                if (state <= 0.0 || !std::isfinite(state)) {
                    rec.flagged = true;
                    break;
                }
            } else {
                const double eval_at = unit_clamp
                                           ? std::clamp(state, 0.0, 1.0)
                                           : std::max(state, floor);
                const catalog::Coefficients co = catalog::coefficients(spec, t, eval_at);
                state += co.drift * dt + co.diffusion * dw;
                if (unit_clamp) state = std::clamp(state, 0.0, 1.0);
                if (zero_clamp) state = std::max(state, 0.0);
                if (!std::isfinite(state)) {
                    rec.flagged = true;
                    break;
                }
            }
            if (functional.integrand) {
                const double x_obs = observed(state);
                const double g = functional.integrand(t + dt, x_obs);
                integral += 0.5 * (prev_g + g) * dt;
                prev_g = g;
                if (unit_clamp && (x_obs < kClipFloor || x_obs > 1.0 - kClipFloor))
                    ++rec.clips;
            }
        }
        if (rec.flagged) return rec;
        rec.terminal = observed(state);
        rec.integral = integral;
    }

    const double mapped = functional.terminal_map(rec.terminal);
    switch (functional.combiner) {
        case PathFunctional::Combiner::exp_neg:
            rec.value = std::exp(-(functional.lambda * mapped +
                                   functional.weight * rec.integral));
            break;
        case PathFunctional::Combiner::product_exp:
            rec.value = mapped * std::exp(-functional.weight * rec.integral);
            break;
        case PathFunctional::Combiner::raw:
            rec.value = mapped;
            break;
    }
    if (!std::isfinite(rec.value)) rec.flagged = true;
    return rec;
}

int worker_count() {
    if (const char* env = std::getenv("FKMATCH_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<int>(std::min<long>(v, 256));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

constexpr std::uint64_t kBlockSize = 4096;

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

struct BlockSums {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t count = 0;
    std::uint64_t flagged = 0;
    std::uint64_t clipped = 0;
};

// Runs per_path over path indices [0, n) in fixed blocks; blocks are
// claimed dynamically by workers but accumulated in index order, so the
// totals do not depend on the worker count.
MCEstimate reduce_paths(const std::function<double(std::uint64_t, BlockSums&)>& per_path,
                        const SimConfig& cfg) {
    const std::uint64_t n = cfg.n_paths;
    if (n == 0) throw InvalidArgument("mc: n_paths must be >= 1");
    const std::uint64_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
    std::vector<BlockSums> blocks(n_blocks);
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;

    const auto run_block = [&](std::uint64_t b) {
        BlockSums& sums = blocks[b];
        const std::uint64_t begin = b * kBlockSize;
        const std::uint64_t end = std::min(n, begin + kBlockSize);
        std::vector<double> values;
        std::vector<double> squares;
        values.reserve(end - begin);
        squares.reserve(end - begin);
        for (std::uint64_t i = begin; i < end; ++i) {
            const double v = per_path(i, sums);
            if (std::isnan(v)) continue;  // flagged path
            values.push_back(v);
            squares.push_back(v * v);
        }
        sums.count = values.size();
        sums.sum = pairwise_sum(values.data(), values.size());
        sums.sum_sq = pairwise_sum(squares.data(), squares.size());
    };

    const int workers =
        static_cast<int>(std::min<std::uint64_t>(worker_count(), n_blocks));
    const auto worker_body = [&] {
        for (;;) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= n_blocks || failed.load()) return;
            try {
                run_block(b);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    if (workers <= 1) {
        worker_body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_body);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    std::vector<double> block_sums(n_blocks), block_sqs(n_blocks);
    MCEstimate est;
    est.config = cfg;
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
        block_sums[b] = blocks[b].sum;
        block_sqs[b] = blocks[b].sum_sq;
        est.n_paths += blocks[b].count;
        est.flagged += blocks[b].flagged;
        est.clipped += blocks[b].clipped;
    }
    if (est.flagged > kFlaggedFractionLimit * static_cast<double>(n))
        throw NumericalError("mc: flagged path fraction exceeded 0.1%");
    if (est.n_paths == 0) throw NumericalError("mc: no usable paths");
    const double total = pairwise_sum(block_sums.data(), block_sums.size());
    const double total_sq = pairwise_sum(block_sqs.data(), block_sqs.size());
    const double count = static_cast<double>(est.n_paths);
    est.mean = total / count;
    const double var =
        est.n_paths > 1
            ? std::max(0.0, (total_sq - total * total / count) / (count - 1.0))
            : 0.0;
    est.std_error = std::sqrt(var / count);
    return est;
}

void check_budget(const SimConfig& cfg, std::uint64_t per_path_steps) {
    const std::uint64_t total = cfg.n_paths * std::max<std::uint64_t>(per_path_steps, 1);
    if (total > cfg.max_total_steps)
        throw BudgetExceeded("mc: requested " + std::to_string(total) +
                             " steps exceeds the budget of " +
                             std::to_string(cfg.max_total_steps));
}

}  // namespace

MCEstimate mc_expectation(const catalog::ProcessSpec& spec,
                          const PathFunctional& functional, const SimConfig& cfg) {
    const Scheme scheme = scheme_for(spec, cfg.scheme);
    check_budget(cfg, scheme == Scheme::exact_besq_terminal ? 1 : steps_per_path(cfg));
    if (std::holds_alternative<catalog::BesselBridge>(spec) && !(cfg.t_end < 1.0))
        throw DomainError("bridge simulation requires t_end < 1");
    MCEstimate est = reduce_paths(
        [&](std::uint64_t path, BlockSums& sums) -> double {
            rng::RngStream stream(cfg.master_seed, path);
            const PathRecord rec = simulate_path(spec, cfg, stream, functional);
            sums.clipped += rec.clips;
            if (rec.flagged) {
                ++sums.flagged;
                return std::numeric_limits<double>::quiet_NaN();
            }
            return rec.value;
        },
        cfg);
    est.config.scheme = scheme;
    return est;
}

MCEstimate mc_stream_expectation(
    const std::function<double(rng::RngStream&)>& per_path, const SimConfig& cfg) {
    check_budget(cfg, steps_per_path(cfg));
    return reduce_paths(
        [&](std::uint64_t path, BlockSums& sums) -> double {
            rng::RngStream stream(cfg.master_seed, path);
            const double v = per_path(stream);
            if (!std::isfinite(v)) {
                ++sums.flagged;
                return std::numeric_limits<double>::quiet_NaN();
            }
            return v;
        },
        cfg);
}

PairedReport paired_pathwise(const catalog::ProcessSpec& spec_a,
                             const std::function<double(double)>& map_a,
                             const catalog::ProcessSpec& spec_b,
                             const std::function<double(double)>& map_b,
                             const SimConfig& cfg) {
    const std::uint64_t n_steps = steps_per_path(cfg);
    check_budget(cfg, 2 * n_steps);
    const double dt = cfg.t_end / static_cast<double>(n_steps);
    const double sqrt_dt = std::sqrt(dt);

    struct PathOut {
        double sup = 0.0;
        double terminal = 0.0;
    };
    std::vector<PathOut> outs(cfg.n_paths);
    const double floor_a = state_floor(spec_a);
    const double floor_b = state_floor(spec_b);
    (void)reduce_paths(
        [&](std::uint64_t path, BlockSums&) -> double {
            rng::RngStream stream(cfg.master_seed, path);
            double a = catalog::initial_state(spec_a);
            double b = catalog::initial_state(spec_b);
            double sup = std::abs(map_a(a) - map_b(b));
            for (std::uint64_t i = 0; i < n_steps; ++i) {
                const double t = static_cast<double>(i) * dt;
                const double dw = sqrt_dt * stream.normal();
                const auto ca = catalog::coefficients(spec_a, t, std::max(a, floor_a));
                const auto cb = catalog::coefficients(spec_b, t, std::max(b, floor_b));
                a += ca.drift * dt + ca.diffusion * dw;
                b += cb.drift * dt + cb.diffusion * dw;
                sup = std::max(sup, std::abs(map_a(std::max(a, floor_a)) -
                                             map_b(std::max(b, floor_b))));
            }
            outs[path] = {sup, std::abs(map_a(std::max(a, floor_a)) -
                                        map_b(std::max(b, floor_b)))};
            return 0.0;
        },
        cfg);

    PairedReport rep;
    rep.n_paths = cfg.n_paths;
    double sum_terminal = 0.0;
    for (const PathOut& o : outs) {
        rep.max_sup = std::max(rep.max_sup, o.sup);
        rep.max_terminal = std::max(rep.max_terminal, o.terminal);
        sum_terminal += o.terminal;
    }
    rep.mean_terminal = sum_terminal / static_cast<double>(cfg.n_paths);
    return rep;
}

}  // namespace fkmatch::sim
