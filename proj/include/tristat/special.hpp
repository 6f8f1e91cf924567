#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "tristat/errors.hpp"

namespace tristat {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double log_binom(std::size_t n, std::size_t k) {
    if (k > n) return neg_inf;
    if (k == 0 || k == n) return 0.0;
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// log(1 - exp(x)) for x <= 0, stable near both ends
inline double log1mexp(double x) {
    if (x >= 0.0) return neg_inf;
    if (x > -0.6931471805599453)  // x > -ln 2: 1-e^x is small
        return std::log(-std::expm1(x));
    return std::log1p(-std::exp(x));
}

// regularized upper incomplete gamma Q(a, x); series + Lentz continued fraction
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw InvalidArgument("gamma_q domain");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) by series, Q = 1 - P
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Q(a,x) by continued fraction
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

// chi-squared upper tail
inline double chi2_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return gamma_q(df / 2.0, x / 2.0);
}

// Kolmogorov distribution upper tail Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}
inline double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

}  // namespace tristat
