#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "expray/error.hpp"

namespace expray {

using Complex = std::complex<double>;

inline Complex overflow_point() {
    return {std::numeric_limits<double>::infinity(), 0.0};
}

inline bool is_overflow(const Complex& z) {
    return !std::isfinite(z.real()) || !std::isfinite(z.imag());
}

/// Distance from z to the closed negative real axis.
inline double branch_cut_distance(const Complex& z) {
    return z.real() <= 0.0 ? std::abs(z.imag()) : std::abs(z);
}

/// The map E_kappa(z) = exp(z + kappa). Overflow of Re(z + kappa) yields the
/// overflow sentinel. Evaluated in extended precision internally so that
/// exp_map(kappa, log_branch(kappa, j, z)) reproduces z to ~1 ulp.
Complex exp_map(const Complex& kappa, const Complex& z);

struct OrbitRecord {
    std::vector<Complex> points;
    bool escaped = false;
    std::optional<int> escape_index;
};

/// Iterates z0 under exp_map until Re exceeds escape_re or n_max steps.
/// escaped=true is a reliable verdict (monotone growth from there on);
/// escaped=false only means "not detected within n_max".
OrbitRecord orbit(const Complex& kappa, const Complex& z0, int n_max, double escape_re = 50.0);

/// Index j of the horizontal strip R_j containing z:
/// -Im(kappa) - pi + 2*pi*j < Im(z) < -Im(kappa) + pi + 2*pi*j.
long long strip_index(const Complex& kappa, const Complex& z, double eps = 1e-12);

/// Inverse branch L_{kappa,j}(z) = Log z - kappa + 2*pi*i*j, principal Log.
Complex log_branch(const Complex& kappa, long long j, const Complex& z, double eps = 1e-12);

struct AddressPrefix {
    std::vector<long long> entries;
    bool truncated = false;  // orbit overflowed before n entries were read
};

/// First n strip labels of the orbit of z. Orbits meeting a strip boundary
/// propagate OnBoundary.
AddressPrefix external_address(const Complex& kappa, const Complex& z, int n, double eps = 1e-12);

}  // namespace expray
