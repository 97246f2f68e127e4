#include "numerics/ode.hpp"

namespace fkmatch::ode {

std::vector<OdePoint> rk4_path(const std::function<double(double, double)>& rhs,
                               double y0, double t0, double t1, int n_steps) {
    if (n_steps < 1) throw InvalidArgument("rk4: n_steps must be >= 1");
    std::vector<OdePoint> path;
    path.reserve(static_cast<std::size_t>(n_steps) + 1);
    path.push_back({t0, y0});
    const double h = (t1 - t0) / n_steps;
    double t = t0;
    double y = y0;
    for (int step = 0; step < n_steps; ++step) {
        const double k1 = rhs(t, y);
        const double k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = rhs(t + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t0 + (step + 1) * h;
        if (!std::isfinite(y) || std::abs(y) > kBlowUpThreshold)
            throw OdeBlowUp("ode state blew up", path.back().t, path.back().y);
        path.push_back({t, y});
    }
    return path;
}

double rk4_final(const std::function<double(double, double)>& rhs, double y0,
                 double t0, double t1, int n_steps) {
    if (n_steps < 1) throw InvalidArgument("rk4: n_steps must be >= 1");
    const double h = (t1 - t0) / n_steps;
    double t = t0;
    double y = y0;
    for (int step = 0; step < n_steps; ++step) {
        const double k1 = rhs(t, y);
        const double k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = rhs(t + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t_next = t0 + (step + 1) * h;
        if (!std::isfinite(y) || std::abs(y) > kBlowUpThreshold)
            throw OdeBlowUp("ode state blew up", t, y);
        t = t_next;
    }
    return y;
}

}  // namespace fkmatch::ode
