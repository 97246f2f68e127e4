#pragma once

#include <functional>

namespace fkmatch::roots {

// Brent's method on [lo, hi]; requires f(lo) * f(hi) <= 0, otherwise throws
// InvalidArgument. Stops when the bracket width falls below tol.
double brent(const std::function<double(double)>& f, double lo, double hi,
             double tol = 1e-12, int max_iter = 200);

}  // namespace fkmatch::roots
