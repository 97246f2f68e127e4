#include "numerics/special.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace fkmatch::special {

namespace {

constexpr double kSeriesCutoff = 18.0;

// I0(z) = sum_k (z^2/4)^k / (k!)^2; positive terms, long double accumulator.
long double i0_series(double z) {
    const long double q = static_cast<long double>(z) * z / 4.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
        if (term < sum * 1e-19L) break;
    }
    return sum;
}

// Asymptotic tail: I0(z) ~ e^z / sqrt(2 pi z) * sum_k u_k,
// u_0 = 1, u_{k+1} = u_k * (2k+1)^2 / (8 z (k+1)).
double i0_asymptotic_scaled(double z) {
    double u = 1.0;
    double sum = 1.0;
    for (int k = 0; k < 40; ++k) {
        const double next = u * (2.0 * k + 1.0) * (2.0 * k + 1.0) /
                            (8.0 * z * (k + 1.0));
        if (next >= u) break;  // past the optimal truncation point
        u = next;
        sum += u;
        if (u < 1e-18 * sum) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

}  // namespace

double bessel_i0(double z) {
    if (!(z >= 0.0)) throw DomainError("bessel_i0: z must be >= 0");
    if (z < kSeriesCutoff) return static_cast<double>(i0_series(z));
    return std::exp(z) * i0_asymptotic_scaled(z);
}

double bessel_i0_scaled(double z) {
    if (!(z >= 0.0)) throw DomainError("bessel_i0_scaled: z must be >= 0");
    if (z < kSeriesCutoff)
        return static_cast<double>(i0_series(z) * std::exp(-static_cast<long double>(z)));
    return i0_asymptotic_scaled(z);
}

}  // namespace fkmatch::special
