#include "expray/variation.hpp"

#include <algorithm>
#include <cmath>

#include "expray/potential.hpp"
#include "expray/ray.hpp"

namespace expray {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Hermite {
    double t0, dt;
    Complex p0, p1, m0, m1;  // endpoint values and scaled derivatives

    Complex value(double t) const {
        const double u = (t - t0) / dt;
        const double u2 = u * u, u3 = u2 * u;
        return (1 - 3 * u2 + 2 * u3) * p0 + (3 * u2 - 2 * u3) * p1 +
               (u - 2 * u2 + u3) * m0 + (u3 - u2) * m1;
    }
    Complex deriv(double t) const {
        const double u = (t - t0) / dt;
        const double u2 = u * u;
        return ((-6 * u + 6 * u2) * p0 + (6 * u - 6 * u2) * p1 +
                (1 - 4 * u + 3 * u2) * m0 + (3 * u2 - 2 * u) * m1) /
               dt;
    }
};

double integrand(const Hermite& h, double t, const Complex& a) {
    const Complex num = h.deriv(t);
    const Complex den = h.value(t) - a;
    return std::abs(std::imag(num / den)) / kTwoPi;
}

double adaptive_simpson(const Hermite& h, const Complex& a, double lo, double hi, double fl,
                        double fm, double fh, double whole, double tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double flm = integrand(h, 0.5 * (lo + mid), a);
    const double fmh = integrand(h, 0.5 * (mid + hi), a);
    const double left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm);
    const double right = (hi - mid) / 6.0 * (fm + 4.0 * fmh + fh);
    const double sum = left + right;
    if (depth <= 0 || std::abs(sum - whole) <= 15.0 * tol)
        return sum + (sum - whole) / 15.0;
    return adaptive_simpson(h, a, lo, mid, fl, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(h, a, mid, hi, fm, fmh, fh, right, 0.5 * tol, depth - 1);
}

double integrate_interval(const Hermite& h, const Complex& a, double lo, double hi,
                          double rel_tol) {
    const double fl = integrand(h, lo, a);
    const double fm = integrand(h, 0.5 * (lo + hi), a);
    const double fh = integrand(h, hi, a);
    const double whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
    const double tol = std::max(rel_tol * std::abs(whole), 1e-15);
    return adaptive_simpson(h, a, lo, hi, fl, fm, fh, whole, tol, 32);
}

Hermite hermite_for(const SampledCurve& c, size_t i) {
    const double dt = c.params[i + 1] - c.params[i];
    return {c.params[i], dt, c.points[i], c.points[i + 1], dt * c.derivs[i],
            dt * c.derivs[i + 1]};
}

// Beyond the last sample, |Im gamma| <= c_pos and Re(gamma - a) >= t - c0, so
// |Im(gamma'/(gamma-a))| <= d/(t-c0)^2; the remainder integrates to d/(T-c0).
double certified_tail(const SampledCurve& c, const Complex& a) {
    const AdmissibleTail& tail = *c.tail;
    const double t_last = c.params.back();
    const double c0 = std::max(0.0, tail.c_pos + a.real());
    if (!(t_last > c0 + 1.0))
        raise(Errc::DomainError, "tail record unusable: last sample too close to the base scale");
    const double im_gap = tail.c_pos + std::abs(a.imag());
    const double d = tail.c_der + (1.0 + tail.c_der / t_last) * im_gap;
    return d / (t_last - c0) / kTwoPi;
}

}  // namespace

long long winding_number(const SampledCurve& curve, const Complex& a, double eps) {
    const auto& pts = curve.points;
    if (pts.size() < 2) raise(Errc::Undersampled, "need at least two samples");
    if (std::abs(pts.front() - pts.back()) > 1e-9)
        raise(Errc::Undersampled, "curve is not closed");
    for (const Complex& p : pts)
        if (std::abs(p - a) < eps) raise(Errc::TooCloseToBase, "base point meets the samples");
    double total = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double inc = std::arg((pts[i + 1] - a) / (pts[i] - a));
        if (std::abs(inc) > M_PI / 2.0)
            raise(Errc::Undersampled,
                  "argument increment above pi/2 at segment " + std::to_string(i));
        total += inc;
    }
    return std::llround(total / kTwoPi);
}

double variation_number(const SampledCurve& curve, const Complex& a, double rel_tol) {
    const size_t n = curve.params.size();
    if (n < 2 || curve.points.size() != n)
        raise(Errc::Undersampled, "need at least two samples");
    if (curve.derivs.size() != n)
        raise(Errc::MissingDerivatives, "variation needs derivatives at the samples");
    const bool base_is_start = std::abs(curve.points.front() - a) < 1e-9;
    for (size_t i = base_is_start ? 1 : 0; i < n; ++i)
        if (std::abs(curve.points[i] - a) < 1e-9)
            raise(Errc::TooCloseToBase, "base point meets the samples");
    // also refuse a base sitting on the polyline between samples
    for (size_t i = base_is_start ? 1 : 0; i + 1 < n; ++i) {
        const Complex seg = curve.points[i + 1] - curve.points[i];
        const double len2 = std::norm(seg);
        if (len2 == 0.0) continue;
        const double u = std::clamp(
            ((a - curve.points[i]) * std::conj(seg)).real() / len2, 0.0, 1.0);
        if (std::abs(curve.points[i] + u * seg - a) < 1e-9)
            raise(Errc::TooCloseToBase, "base point lies on the sampled curve");
    }

    double total = 0.0;
    for (size_t i = 0; i + 1 < n; ++i) {
        const Hermite h = hermite_for(curve, i);
        double lo = curve.params[i];
        // At the curve's own initial point the integrand extends continuously;
        // start a hair inside to avoid the 0/0 sample.
        if (i == 0 && base_is_start) lo += (curve.params[1] - curve.params[0]) * 1e-7;
        total += integrate_interval(h, a, lo, curve.params[i + 1], rel_tol);
    }
    if (curve.tail) total += certified_tail(curve, a);
    return total;
}

double halfline_variation(const Complex& lambda, const Complex& a, double eps) {
    if (std::abs(lambda) == 0.0) raise(Errc::DomainError, "direction must be nonzero");
    const Complex q = a / lambda;
    if (std::abs(q) < eps) raise(Errc::OnHalfLine, "base point at the origin");
    double theta = std::arg(q);
    if (theta < 0.0) theta += kTwoPi;
    if (std::min(theta, kTwoPi - theta) < eps)
        raise(Errc::OnHalfLine, "base point lies on the half line");
    return std::abs(theta - M_PI) / kTwoPi;
}

// Remainder of the variation integral over (T, infinity) for a ray around a,
// from the tail estimates: |Im gamma'| <= e^{-t/2}, Im gamma pinned to
// 2 pi s1 - Im kappa within the tail remainder bound, Re gamma ~ t.
double ray_variation_tail(const Complex& kappa, const ExternalAddress& s, const Complex& a,
                          double T) {
    const double K = std::abs(kappa);
    const double rb = tail_remainder_bound(s, K, T);
    const double im_gap =
        std::abs(kTwoPi * entry_value(s, 1) - kappa.imag() - a.imag()) + rb;
    const double c0 = std::max(0.0, kappa.real() + rb + a.real());
    if (!(T > c0 + 1.0))
        raise(Errc::DomainError, "tail potential too small for a certified remainder");
    const double e = std::exp(-T / 2.0);
    return (2.0 * e + (1.0 + e) * im_gap) / (T - c0) / kTwoPi;
}

SampledCurve sample_ray_curve(const Complex& kappa, const ExternalAddress& s, double t0,
                              double t_cap, double spatial_step, double H) {
    RayTraceConfig cfg;
    cfg.max_spatial_step = spatial_step;
    cfg.H = H;
    const RayTrace trace = trace_ray(kappa, s, t0, t_cap, cfg);
    if (trace.failure)
        raise(Errc::BranchCut, "ray not defined over the requested range: " +
                                   trace.failure->message);
    SampledCurve curve;
    curve.params.reserve(trace.samples.size());
    for (auto it = trace.samples.rbegin(); it != trace.samples.rend(); ++it) {
        curve.params.push_back(it->t);
        curve.points.push_back(it->z);
        curve.derivs.push_back(ray_derivative_t(kappa, s, it->t, H));
    }
    const double K = std::abs(kappa);
    AdmissibleTail tail;
    tail.c_pos = K + kTwoPi * std::abs(entry_value(s, 1)) + 5.0;
    tail.c_der = t_cap * std::exp(-t_cap / 2.0);
    tail.c_secder = t_cap * t_cap * std::exp(-t_cap / 2.0);
    curve.tail = tail;
    return curve;
}

SampledCurve derivative_curve(const Complex& kappa, const ExternalAddress& s,
                              const std::vector<double>& params, double H) {
    SampledCurve curve;
    curve.params = params;
    for (double t : params) {
        curve.points.push_back(ray_derivative_t(kappa, s, t, H));
        curve.derivs.push_back(ray_second_derivative_t(kappa, s, t, H));
    }
    return curve;
}

RayVariationReport dynamic_ray_variation(const Complex& kappa, const ExternalAddress& s,
                                         double t0, double t_cap, double H) {
    if (!(t_cap > t0)) raise(Errc::DomainError, "need t0 < t_cap");
    const double K = std::abs(kappa);
    if (!(t_cap >= std::max(tail_potential(s, K) + 1.0, derivative_tail_potential(s, K))))
        raise(Errc::PotentialTooSmall, "t_cap must reach the ray tail regime");

    RayVariationReport report;
    report.verified_to = t_cap;

    // Smallest pullback count whose image window satisfies |g''/g'| < e^{-t/2}.
    constexpr int max_levels = 16;
    int n = 0;
    for (;; ++n) {
        if (n > max_levels)
            raise(Errc::DomainError, "contraction criterion not met within the level cap");
        const double lo = F_iter(t0, n);
        if (lo >= t_cap) {
            // nothing left to scan; verified_from > verified_to records that
            report.verified_from = lo;
            break;
        }
        bool ok = true;
        const ExternalAddress sn = shift(s, n);
        const int samples = std::min(4096, std::max(2, static_cast<int>((t_cap - lo) * 64.0)));
        for (int i = 0; i <= samples && ok; ++i) {
            const double t = lo + (t_cap - lo) * i / samples;
            const double margin = std::exp(-t / 2.0);
            if (margin < 1e-10) continue;  // below the finite-difference noise floor
            const Complex d1 = ray_derivative_t(kappa, sn, t, H);
            const Complex d2 = ray_second_derivative_t(kappa, sn, t, H);
            ok = std::abs(d2 / d1) < margin;
        }
        if (ok) {
            report.verified_from = lo;
            break;
        }
    }
    report.contraction_level = n;
    report.bound = std::ldexp(1.0, n);

    SampledCurve curve = sample_ray_curve(kappa, s, t0, t_cap, 0.05, H);
    const Complex base = curve.points.front();
    curve.tail.reset();  // the ray-specific remainder below is much tighter
    report.alpha = variation_number(curve, base) + ray_variation_tail(kappa, s, base, t_cap);
    return report;
}

}  // namespace expray
