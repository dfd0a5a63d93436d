#include "expray/dynamics.hpp"

#include <cmath>

namespace expray {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kExpOverflow = 709.782712893384;

}  // namespace

Complex exp_map(const Complex& kappa, const Complex& z) {
    if (is_overflow(z)) return overflow_point();
    const long double re = static_cast<long double>(z.real()) + kappa.real();
    const long double im = static_cast<long double>(z.imag()) + kappa.imag();
    if (re > kExpOverflow) return overflow_point();
    const long double mag = std::exp(re);
    return {static_cast<double>(mag * std::cos(im)), static_cast<double>(mag * std::sin(im))};
}

OrbitRecord orbit(const Complex& kappa, const Complex& z0, int n_max, double escape_re) {
    OrbitRecord rec;
    Complex z = z0;
    for (int n = 0; n <= n_max; ++n) {
        rec.points.push_back(z);
        if (is_overflow(z) || z.real() > escape_re) {
            rec.escaped = true;
            rec.escape_index = n;
            return rec;
        }
        if (n == n_max) break;
        z = exp_map(kappa, z);
    }
    return rec;
}

long long strip_index(const Complex& kappa, const Complex& z, double eps) {
    const double y = z.imag() + kappa.imag();
    if (!(std::abs(y) < kTwoPi * 4.0e18))
        raise(Errc::DomainError, "strip index exceeds the integer range");
    const double offset = std::remainder(y - M_PI, kTwoPi);
    if (std::abs(offset) < eps)
        raise(Errc::OnBoundary, "point within eps of a strip boundary");
    return std::llround(y / kTwoPi);
}

Complex log_branch(const Complex& kappa, long long j, const Complex& z, double eps) {
    if (branch_cut_distance(z) < eps)
        raise(Errc::BranchCut, "point within eps of the closed negative real axis");
    const long double re = std::log(std::hypot(static_cast<long double>(z.real()),
                                               static_cast<long double>(z.imag())));
    const long double im = std::atan2(static_cast<long double>(z.imag()),
                                      static_cast<long double>(z.real()));
    return {static_cast<double>(re - kappa.real()),
            static_cast<double>(im - kappa.imag() + static_cast<long double>(kTwoPi) * j)};
}

AddressPrefix external_address(const Complex& kappa, const Complex& z, int n, double eps) {
    AddressPrefix out;
    Complex w = z;
    for (int k = 0; k < n; ++k) {
        if (is_overflow(w) || !(std::abs(w.imag() + kappa.imag()) < kTwoPi * 4.0e18)) {
            out.truncated = true;  // the strip label is out of integer reach
            return out;
        }
        out.entries.push_back(strip_index(kappa, w, eps));
        if (k + 1 < n) w = exp_map(kappa, w);
    }
    return out;
}

}  // namespace expray
