#pragma once

#include <cmath>
#include <limits>

#include "epf/core/error.hpp"

// Distribution functions needed for test decisions and regression inference.

namespace epf {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace detail {

inline double log_gamma(double x) { return std::lgamma(x); }

// Regularized lower incomplete gamma P(a, x), series + continued fraction.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw NumericalError("gamma_p domain");
    if (x == 0.0) return 0.0;
    const double eps = 1e-14;
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * eps) break;
        }
        return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
    // continued fraction for Q(a,x), modified Lentz
    double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    double q = std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
    return 1.0 - q;
}

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    const double eps = 1e-14, tiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

inline double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace detail

inline double chi2_cdf(double x, double dof) {
    if (x <= 0.0) return 0.0;
    return detail::gamma_p(dof / 2.0, x / 2.0);
}

inline double student_t_cdf(double t, double dof) {
    double x = dof / (dof + t * t);
    double p = 0.5 * detail::inc_beta(dof / 2.0, 0.5, x);
    return t > 0.0 ? 1.0 - p : p;
}

// Two-sided p-value for a t statistic.
inline double t_pvalue(double t, double dof) {
    if (!std::isfinite(t)) return std::isnan(t) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    return detail::inc_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

// Upper quantile by bisection; adequate for confidence bounds.
inline double student_t_quantile(double p, double dof) {
    if (p <= 0.0 || p >= 1.0) throw NumericalError("t quantile domain");
    double lo = -1e3, hi = 1e3;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, dof) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace epf
