#pragma once

#include <cmath>
#include <limits>

namespace expray {

// Model function for exponential growth, F(t) = e^t - 1, and its inverse.
// One iteration of the map exp(z+kappa) transports the ray potential by F.
// Iterates saturate to +inf above the double exponent range; inverse
// iterates are always finite.

inline constexpr double kPotentialOverflow = 709.782712893384;  // log(DBL_MAX)

inline double F(double t) { return std::expm1(t); }

inline double F_inv(double y) { return std::log1p(y); }

inline bool is_saturated(double t) { return std::isinf(t); }

/// F^{on}(t); negative n applies the inverse. Saturates to +inf, never NaN.
inline double F_iter(double t, long long n) {
    if (n >= 0) {
        for (long long k = 0; k < n; ++k) {
            if (t > kPotentialOverflow) return std::numeric_limits<double>::infinity();
            t = std::expm1(t);
        }
        return t;
    }
    for (long long k = 0; k < -n; ++k) {
        if (std::isinf(t)) return t;  // log1p(inf) stays inf; callers treat as saturated
        t = std::log1p(t);
    }
    return t;
}

/// sum_{k>=1} 1/(F^{ok}(t)+1) = sum_{k>=0} exp(-F^{ok}(t)), truncated at underflow.
inline double tail_reciprocal_sum(double t) {
    double sum = 0.0;
    double level = t;
    for (int k = 0; k < 64; ++k) {
        if (level > 745.0 || std::isinf(level)) break;
        sum += std::exp(-level);
        level = std::expm1(level);
    }
    return sum;
}

/// sum_{k>=1} F^{ok}(x)/(F^{ok}(t)+1) for x < t, each term exp(log F^{ok}(x) - F^{o(k-1)}(t)).
inline double tail_growth_ratio_sum(double x, double t) {
    double sum = 0.0;
    double lx = x;  // F^{o(k-1)}(x)
    double lt = t;  // F^{o(k-1)}(t)
    for (int k = 0; k < 64; ++k) {
        if (std::isinf(lt)) break;
        // log F^{ok}(x) = F^{o(k-1)}(x) + log(1 - e^{-F^{o(k-1)}(x)})
        double log_fx = lx + std::log1p(-std::exp(-lx));
        double log_term = log_fx - lt;
        if (log_term < -745.0) break;
        sum += std::exp(log_term);
        if (lx > kPotentialOverflow) break;
        lx = std::expm1(lx);
        lt = std::expm1(lt);
    }
    return sum;
}

}  // namespace expray
