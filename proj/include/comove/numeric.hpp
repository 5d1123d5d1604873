#pragma once

#include <cmath>
#include <limits>

#include "comove/errors.hpp"

// Scalar distribution functions used by the test statistics. The incomplete
// beta function is evaluated in-repo with a Lentz continued fraction so the
// library carries no numerics dependency for p-values.

namespace comove {

/// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace detail {

/// Continued-fraction core of the regularized incomplete beta function
/// (modified Lentz algorithm).
inline double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw numerical_error("incomplete beta continued fraction did not converge");
}

} // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw argument_error("incomplete_beta: a and b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)
                          + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    // Use the continued fraction on whichever side converges fast.
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// Right-tail probability of the F(d1, d2) distribution.
inline double f_survival(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0))
        throw argument_error("f_survival: degrees of freedom must be positive");
    if (f <= 0.0) return 1.0;
    if (!std::isfinite(f)) return 0.0;
    return incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

/// Two-sided p-value of a Student-t statistic with df degrees of freedom.
inline double t_two_sided(double t, double df) {
    if (!(df > 0.0)) throw argument_error("t_two_sided: df must be positive");
    if (!std::isfinite(t)) return 0.0;
    return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

} // namespace comove
