#pragma once

#include <functional>
#include <vector>

namespace fkmatch::quad {

struct QuadratureConfig {
    enum class Method { adaptive_simpson, gauss_legendre };
    Method method = Method::adaptive_simpson;
    int gl_points = 32;  // used by the gauss_legendre method
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 48;  // recursion depth limit for adaptive Simpson
};

// Integrates f over [a, b]. Returns 0 when a == b. Throws NumericalError
// (carrying the best estimate) when adaptive subdivision hits the depth
// limit before the tolerance is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& cfg = {});

// Gauss-Legendre nodes/weights on [-1, 1]; cached per n.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre_rule(int n);

double gauss_legendre(const std::function<double(double)>& f, double a,
                      double b, int n);

// F(u) = integral of f over [0, u], precomputed on a uniform grid with a
// 5-point Gauss panel per cell; evaluation between grid nodes integrates
// the fractional cell with the same panel rule. Accurate to machine
// precision for smooth f and cheap to evaluate many times.
class CumulativeIntegral {
  public:
    CumulativeIntegral(std::function<double(double)> f, double t_max,
                       int cells = 4096);
    double operator()(double u) const;
    double t_max() const { return t_max_; }

  private:
    std::function<double(double)> f_;
    double t_max_;
    double cell_;
    std::vector<double> prefix_;  // prefix_[i] = integral over [0, i*cell_]
};

}  // namespace fkmatch::quad
