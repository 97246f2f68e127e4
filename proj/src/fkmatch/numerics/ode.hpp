#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "errors.hpp"

namespace fkmatch::ode {

// Magnitude beyond which an integration is declared blown up.
inline constexpr double kBlowUpThreshold = 1e12;

struct OdePoint {
    double t;
    double y;
};

// Classical RK4 on y' = rhs(t, y) from t0 to t1 (t1 < t0 integrates
// backward). Throws OdeBlowUp with the last valid (t, y) when the state
// leaves [-kBlowUpThreshold, kBlowUpThreshold] or turns non-finite.
std::vector<OdePoint> rk4_path(const std::function<double(double, double)>& rhs,
                               double y0, double t0, double t1, int n_steps);

double rk4_final(const std::function<double(double, double)>& rhs, double y0,
                 double t0, double t1, int n_steps);

// RK4 for a small fixed-size system; used for flow-plus-integral states.
template <std::size_t N>
std::array<double, N> rk4_system(
    const std::function<std::array<double, N>(double, const std::array<double, N>&)>& rhs,
    std::array<double, N> y, double t0, double t1, int n_steps) {
    if (n_steps < 1) throw InvalidArgument("rk4: n_steps must be >= 1");
    const double h = (t1 - t0) / n_steps;
    double t = t0;
    for (int step = 0; step < n_steps; ++step) {
        const auto k1 = rhs(t, y);
        std::array<double, N> tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        const auto k2 = rhs(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        const auto k3 = rhs(t + 0.5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
        const auto k4 = rhs(t + h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t = t0 + (step + 1) * h;
        for (std::size_t i = 0; i < N; ++i)
            if (!std::isfinite(y[i]) || std::abs(y[i]) > kBlowUpThreshold)
                throw OdeBlowUp("ode state blew up", t, y[i]);
    }
    return y;
}

}  // namespace fkmatch::ode
