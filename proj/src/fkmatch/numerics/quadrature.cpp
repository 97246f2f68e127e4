#include "numerics/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "errors.hpp"

namespace fkmatch::quad {

namespace {

struct SimpsonState {
    const std::function<double(double)>& f;
    int depth_limit;
    bool converged = true;
};

double simpson(double fa, double fm, double fb, double h) {
    return (fa + 4.0 * fm + fb) * (h / 6.0);
}

// Classic adaptive Simpson with the 1/15 Richardson error estimate.
double adapt(SimpsonState& st, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = st.f(lm);
    const double frm = st.f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double err = (left + right - whole) / 15.0;
    if (std::abs(err) <= tol) return left + right + err;
    if (depth >= st.depth_limit) {
        st.converged = false;
        return left + right + err;
    }
    return adapt(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           adapt(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, const QuadratureConfig& cfg) {
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = simpson(fa, fm, fb, b - a);
    const double tol = cfg.abs_tol + cfg.rel_tol * std::abs(whole);
    SimpsonState st{f, cfg.max_subdivisions};
    const double result = adapt(st, a, b, fa, fm, fb, whole, tol, 0);
    if (!st.converged)
        throw NumericalError("quadrature did not converge within the subdivision limit",
                             result);
    return result;
}

GaussLegendreRule make_rule(int n) {
    // Newton iteration on Legendre polynomials; nodes symmetric about 0.
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre_rule(int n) {
    if (n < 1) throw InvalidArgument("gauss_legendre: need n >= 1");
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
    return it->second;
}

double gauss_legendre(const std::function<double(double)>& f, double a,
                      double b, int n) {
    const GaussLegendreRule& rule = gauss_legendre_rule(n);
    const double mid = 0.5 * (a + b);
    const double halfwidth = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        sum += rule.weights[i] * f(mid + halfwidth * rule.nodes[i]);
    return sum * halfwidth;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& cfg) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, cfg);
    if (cfg.method == QuadratureConfig::Method::gauss_legendre)
        return gauss_legendre(f, a, b, cfg.gl_points);
    return adaptive_simpson(f, a, b, cfg);
}

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> f,
                                       double t_max, int cells)
    : f_(std::move(f)), t_max_(t_max) {
    if (!(t_max > 0.0)) throw InvalidArgument("CumulativeIntegral: t_max must be > 0");
    if (cells < 1) cells = 1;
    cell_ = t_max / cells;
    prefix_.resize(cells + 1);
    prefix_[0] = 0.0;
    for (int i = 0; i < cells; ++i)
        prefix_[i + 1] = prefix_[i] + gauss_legendre(f_, i * cell_, (i + 1) * cell_, 5);
}

double CumulativeIntegral::operator()(double u) const {
    if (u <= 0.0) return 0.0;
    if (u > t_max_ * (1.0 + 1e-12))
        throw DomainError("CumulativeIntegral: evaluation beyond t_max");
    u = std::min(u, t_max_);
    const auto idx = static_cast<std::size_t>(u / cell_);
    const std::size_t i = std::min(idx, prefix_.size() - 2);
    const double base = i * cell_;
    return prefix_[i] + gauss_legendre(f_, base, u, 5);
}

}  // namespace fkmatch::quad
