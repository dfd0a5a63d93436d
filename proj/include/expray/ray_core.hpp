#pragma once

// Scalar-generic pullback core for dynamic rays.
//
// A ray point g_s^kappa(t) is evaluated by seeding with the asymptotic form
//   z_m = F^{om}(t) - kappa + 2 pi i s_{m+1}
// at the first level m where F^{om}(t) >= max(tail_potential(sigma^m s, K), H)
// and pulling back through the inverse branches. The chain is carried in
// correction coordinates c_k := z_k - (F^{ok}(t) - kappa + 2 pi i s_{k+1}),
// which satisfy
//   c_m = 0,   c_k = Log(1 + (c_{k+1} - kappa + 2 pi i s_{k+2} - 1) e^{-F^{ok}(t)})
// so no cancellation against the huge level potentials ever occurs; c_0 is
// the tail remainder itself. Levels whose potential would overflow are never
// materialized: the seed moves to the largest finite level, which is the
// exact analytic limit of deeper seeds.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "expray/address.hpp"
#include "expray/error.hpp"
#include "expray/potential.hpp"

#ifdef EXPRAY_HAVE_QUADMATH
#include <quadmath.h>
#endif

namespace expray::raycore {

template <class R>
struct ops;

template <>
struct ops<double> {
    static double exp(double x) { return std::exp(x); }
    static double expm1(double x) { return std::expm1(x); }
    static double log(double x) { return std::log(x); }
    static double log1p(double x) { return std::log1p(x); }
    static double atan2(double y, double x) { return std::atan2(y, x); }
    static double sqrt(double x) { return std::sqrt(x); }
    static double fabs(double x) { return std::fabs(x); }
    static bool finite(double x) { return std::isfinite(x); }
    static double from_double(double x) { return x; }
    static double to_double(double x) { return x; }
};

template <>
struct ops<long double> {
    static long double exp(long double x) { return std::exp(x); }
    static long double expm1(long double x) { return std::expm1(x); }
    static long double log(long double x) { return std::log(x); }
    static long double log1p(long double x) { return std::log1p(x); }
    static long double atan2(long double y, long double x) { return std::atan2(y, x); }
    static long double sqrt(long double x) { return std::sqrt(x); }
    static long double fabs(long double x) { return std::fabs(x); }
    static bool finite(long double x) { return std::isfinite(x); }
    static long double from_double(double x) { return x; }
    static double to_double(long double x) { return static_cast<double>(x); }
};

#ifdef EXPRAY_HAVE_QUADMATH
template <>
struct ops<__float128> {
    static __float128 exp(__float128 x) { return expq(x); }
    static __float128 expm1(__float128 x) { return expm1q(x); }
    static __float128 log(__float128 x) { return logq(x); }
    static __float128 log1p(__float128 x) { return log1pq(x); }
    static __float128 atan2(__float128 y, __float128 x) { return atan2q(y, x); }
    static __float128 sqrt(__float128 x) { return sqrtq(x); }
    static __float128 fabs(__float128 x) { return fabsq(x); }
    static bool finite(__float128 x) { return finiteq(x) != 0; }
    static __float128 from_double(double x) { return x; }
    static double to_double(__float128 x) { return static_cast<double>(x); }
};
#endif

template <class R>
struct Cx {
    R re{}, im{};
};

template <class R>
inline Cx<R> operator+(Cx<R> a, Cx<R> b) { return {a.re + b.re, a.im + b.im}; }
template <class R>
inline Cx<R> operator-(Cx<R> a, Cx<R> b) { return {a.re - b.re, a.im - b.im}; }
template <class R>
inline Cx<R> operator*(Cx<R> a, Cx<R> b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class R>
inline Cx<R> operator*(R a, Cx<R> b) { return {a * b.re, a * b.im}; }

// Smith's algorithm; safe for denominators near the overflow range.
template <class R>
inline Cx<R> operator/(Cx<R> a, Cx<R> b) {
    if (ops<R>::fabs(b.re) >= ops<R>::fabs(b.im)) {
        const R r = b.im / b.re;
        const R den = b.re + b.im * r;
        return {(a.re + a.im * r) / den, (a.im - a.re * r) / den};
    }
    const R r = b.re / b.im;
    const R den = b.im + b.re * r;
    return {(a.re * r + a.im) / den, (a.im * r - a.re) / den};
}

template <class R>
inline R abs(Cx<R> z) {
    R x = ops<R>::fabs(z.re), y = ops<R>::fabs(z.im);
    if (x < y) std::swap(x, y);
    if (x == R(0)) return R(0);
    const R r = y / x;
    return x * ops<R>::sqrt(R(1) + r * r);
}

/// Principal Log(1 + w) without forming 1 + w when |w| is small.
template <class R>
inline Cx<R> log1p_c(Cx<R> w) {
    const R one = R(1);
    R lr;
    if (ops<R>::fabs(w.re) > R(1e100) || ops<R>::fabs(w.im) > R(1e100)) {
        lr = ops<R>::log(abs(Cx<R>{one + w.re, w.im}));
    } else {
        lr = ops<R>::log1p(w.re * (R(2) + w.re) + w.im * w.im) / R(2);
    }
    return {lr, ops<R>::atan2(w.im, one + w.re)};
}

template <class R>
inline R two_pi() {
    return R(8.0) * ops<R>::atan2(R(1), R(1));
}

template <class R>
struct Chain {
    std::vector<R> pot;     // level potentials F^{ok}(t), k = 0..depth, all finite
    std::vector<Cx<R>> c;   // corrections, c[depth] = 0
    int depth = 0;
};

struct ChainOptions {
    double H = 50.0;       // seed once F^{om}(t) reaches this height
    int extra_depth = 0;   // force additional pullback levels where finite
    int depth_cap = 4096;
    double eps = 1e-12;    // branch-cut refusal distance
};

template <class R>
inline Cx<R> level_point(const Chain<R>& ch, const ExternalAddress& s, Cx<R> kappa, int k) {
    const R tp = two_pi<R>();
    const R sk = ops<R>::from_double(entry_value(s, k + 1));
    return {ch.pot[static_cast<size_t>(k)] - kappa.re + ch.c[static_cast<size_t>(k)].re,
            tp * sk - kappa.im + ch.c[static_cast<size_t>(k)].im};
}

template <class R>
Chain<R> pull_chain(const ExternalAddress& s, Cx<R> kappa, R t, const ChainOptions& opt) {
    const PotentialBounds pb = potential_bounds(s);
    if (!(ops<R>::to_double(t) > pb.t_min))
        raise(Errc::PotentialTooSmall,
              "potential " + std::to_string(ops<R>::to_double(t)) + " not above t_min " +
                  std::to_string(pb.t_min));
    const double K = ops<R>::to_double(abs(kappa));

    Chain<R> ch;
    ch.pot.push_back(t);
    int n = 0;
    for (;;) {
        const double thr = std::max(tail_potential(shift(s, n), K), opt.H);
        const double level = ops<R>::to_double(ch.pot.back());
        if (std::isinf(level) || level >= thr) break;
        if (n >= opt.depth_cap)
            raise(Errc::DepthExceeded, "seed depth exceeds cap; potential too close to t_min");
        const R next = ops<R>::expm1(ch.pot.back());
        if (!ops<R>::finite(next)) break;  // deeper levels saturate; seed here
        ch.pot.push_back(next);
        ++n;
    }
    for (int e = 0; e < opt.extra_depth && n < opt.depth_cap; ++e) {
        const R next = ops<R>::expm1(ch.pot.back());
        if (!ops<R>::finite(next)) break;
        ch.pot.push_back(next);
        ++n;
    }
    ch.depth = n;
    for (int k = 1; k <= n + 1; ++k)
        if (!std::isfinite(entry_value(s, k)))
            raise(Errc::EntryOverflow, "address entry above double range at level " +
                                           std::to_string(k));

    const R tp = two_pi<R>();
    ch.c.assign(static_cast<size_t>(n) + 1, Cx<R>{});
    for (int k = n - 1; k >= 0; --k) {
        const Cx<R> z = level_point(ch, s, kappa, k + 1);
        const double cut = z.re <= R(0) ? std::fabs(ops<R>::to_double(z.im))
                                        : ops<R>::to_double(abs(z));
        if (cut < opt.eps)
            raise(Errc::BranchCut, "pullback level " + std::to_string(k + 1) +
                                       " lies on the negative real axis");
        const R sk2 = ops<R>::from_double(entry_value(s, k + 2));
        const Cx<R> num{ch.c[static_cast<size_t>(k) + 1].re - kappa.re - R(1),
                        ch.c[static_cast<size_t>(k) + 1].im - kappa.im + tp * sk2};
        const R damp = ops<R>::exp(-ch.pot[static_cast<size_t>(k)]);
        ch.c[static_cast<size_t>(k)] = log1p_c(Cx<R>{num.re * damp, num.im * damp});
    }
    return ch;
}

template <class R>
inline Cx<R> ray_point(const Chain<R>& ch, const ExternalAddress& s, Cx<R> kappa) {
    return level_point(ch, s, kappa, 0);
}

/// Truncated derivative product prod_k (F^{ok}(t)+1)/z_k in the stable form
/// 1/(1+x_k); factors at saturated levels are exactly 1 and never appear.
template <class R>
inline Cx<R> ray_derivative(const Chain<R>& ch, const ExternalAddress& s, Cx<R> kappa) {
    const R tp = two_pi<R>();
    Cx<R> prod{R(1), R(0)};
    for (int k = 1; k <= ch.depth; ++k) {
        const R sk = ops<R>::from_double(entry_value(s, k + 1));
        const R den = ch.pot[static_cast<size_t>(k)] + R(1);
        const Cx<R> xk{(ch.c[static_cast<size_t>(k)].re - kappa.re - R(1)) / den,
                       (ch.c[static_cast<size_t>(k)].im - kappa.im + tp * sk) / den};
        prod = prod / Cx<R>{R(1) + xk.re, xk.im};
    }
    return prod;
}

/// Forward-mode d/d kappa along the chain: seed derivative -1, each pullback
/// maps d to d/z - 1.
template <class R>
inline Cx<R> ray_dual(const Chain<R>& ch, const ExternalAddress& s, Cx<R> kappa) {
    Cx<R> d{R(-1), R(0)};
    for (int k = ch.depth - 1; k >= 0; --k)
        d = d / level_point(ch, s, kappa, k + 1) - Cx<R>{R(1), R(0)};
    return d;
}

}  // namespace expray::raycore
