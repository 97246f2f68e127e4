#pragma once

namespace fkmatch::special {

// Modified Bessel function of the first kind, order zero, z >= 0.
// Power series below z = 18, asymptotic expansion above; relative error
// below 1e-12 across the switch.
double bessel_i0(double z);

// exp(-z) * I0(z); stays finite for large z where I0 overflows.
double bessel_i0_scaled(double z);

}  // namespace fkmatch::special
