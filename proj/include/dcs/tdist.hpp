// SPDX-License-Identifier: Apache-2.0
//
// Student-t distribution function through the regularized incomplete beta
// function (continued-fraction evaluation) plus the inverse needed for
// confidence intervals. Self-contained; accuracy target 1e-10.

#pragma once

#include <cmath>
#include <stdexcept>

namespace dcs {

namespace detail {

// Continued fraction for the incomplete beta, modified Lentz method.
inline double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-30;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
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
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("incomplete beta: a and b must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("incomplete beta: x must lie in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_cf(a, b, x) / a;
    }
    return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// P(T <= t) for Student's t with dof degrees of freedom.
inline double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw std::domain_error("student t: dof must be positive");
    if (t == 0.0) return 0.5;
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

// Inverse of student_t_cdf by bisection; p must lie in (0, 1).
inline double student_t_quantile(double p, double dof) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("student t: p must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -student_t_quantile(1.0 - p, dof);
    double lo = 0.0;
    double hi = 1.0;
    while (student_t_cdf(hi, dof) < p && hi < 1e300) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace dcs
