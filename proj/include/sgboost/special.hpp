#pragma once
#include <cmath>

#include "sgboost/error.hpp"

namespace sgb {

namespace detail {

/// Continued fraction for the incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw numeric_error("reg_incomplete_beta: continued fraction did not converge");
}

} // namespace detail

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation with the convergence-region swap at x > (a+1)/(a+b+2).
/// I_0 = 0, I_1 = 1, and I_x(a,b) = 1 - I_{1-x}(b,a).
inline double reg_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw validation_error("reg_incomplete_beta: a, b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw validation_error("reg_incomplete_beta: x must be in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

/// Regularized lower incomplete gamma P(a, x): series for x < a+1, continued
/// fraction otherwise. This is the CDF of a Gamma(shape a, scale 1) variate.
inline double reg_lower_gamma(double a, double x) {
    if (!(a > 0.0)) throw validation_error("reg_lower_gamma: a must be positive");
    if (!(x >= 0.0)) throw validation_error("reg_lower_gamma: x must be >= 0");
    if (x == 0.0) return 0.0;
    const double lga = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15)
                return sum * std::exp(-x + a * std::log(x) - lga);
        }
        throw numeric_error("reg_lower_gamma: series did not converge");
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15)
            return 1.0 - h * std::exp(-x + a * std::log(x) - lga);
    }
    throw numeric_error("reg_lower_gamma: continued fraction did not converge");
}

/// CDF of Gamma(shape, scale) at x.
inline double gamma_cdf(double shape, double scale, double x) {
    if (!(scale > 0.0)) throw validation_error("gamma_cdf: scale must be positive");
    if (x <= 0.0) return 0.0;
    return reg_lower_gamma(shape, x / scale);
}

} // namespace sgb
