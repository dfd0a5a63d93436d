#pragma once

#include <optional>
#include <vector>

#include "expray/address.hpp"
#include "expray/dynamics.hpp"

namespace expray {

struct RaySample {
    double t = 0.0;
    Complex z;
    std::optional<Complex> dz_dt;
    std::optional<Complex> dz_dkappa;
    std::optional<double> residual;  // |z - (t - kappa + 2 pi i s1)|
    int depth_used = 0;
};

struct RayTraceConfig {
    double max_spatial_step = 0.1;
    double min_dt = 1e-9;
    double H = 50.0;
    bool with_derivatives = false;
    size_t max_samples = 1 << 20;
};

struct BranchCutFailure {
    double t = 0.0;        // potential at which the pullback hit the cut
    std::string message;
};

struct RayTrace {
    ExternalAddress address = ExternalAddress::eventually_periodic({}, {0});
    std::optional<Complex> kappa;          // absent for parameter-plane reuse
    std::vector<RaySample> samples;        // strictly decreasing t
    size_t refinement_steps = 0;
    double max_residual_bound_ratio = 0.0; // residual / tail bound, over tail samples
    std::optional<BranchCutFailure> failure;
};

/// Minimal n with F^{on}(t) >= max(tail_potential(shift(s,n), K), H);
/// saturated iterates count as above any threshold.
int seed_depth(const ExternalAddress& s, double t, double K, double H = 50.0);

/// g_s^kappa(t) by asymptotically seeded pullback. extra_depth forces deeper
/// seeding where the level potentials stay finite (the analytic limit makes
/// deeper saturated seeds identical).
RaySample eval_ray(const Complex& kappa, const ExternalAddress& s, double t, double H = 50.0,
                   int extra_depth = 0);

/// Ray point together with its kappa-derivative (forward mode).
std::pair<Complex, Complex> eval_ray_dual(const Complex& kappa, const ExternalAddress& s,
                                          double t, double H = 50.0);

/// d/dt g_s^kappa(t), the truncated product over pullback levels.
Complex ray_derivative_t(const Complex& kappa, const ExternalAddress& s, double t,
                         double H = 50.0);

/// Central difference of ray_derivative_t; accuracy ~1e-8 at moderate t.
Complex ray_second_derivative_t(const Complex& kappa, const ExternalAddress& s, double t,
                                double H = 50.0);

/// Polyline of the ray over [t_lo, t_hi], refined until consecutive points are
/// within config.max_spatial_step. Samples are ordered by decreasing t and
/// include both endpoints. A branch-cut hit ends the trace early with the
/// offending potential recorded.
RayTrace trace_ray(const Complex& kappa, const ExternalAddress& s, double t_lo, double t_hi,
                   const RayTraceConfig& config = {});

/// 2 e^{-t} (K + 2 pi |s2| + 12): the tail remainder bound at potential t.
double tail_remainder_bound(const ExternalAddress& s, double K, double t);

/// Potential above which the derivative estimates |g'-1| < e^{-t/2} and
/// |g''| < e^{-t/2} are guaranteed: the factor sums of the derivative product
/// stay below e^{-t/2}/4 once e^{t/2} dominates 4(3K + 2 pi e^{t_s*} + 12)
/// (one extra e for the second derivative) and the summation estimates apply.
double derivative_tail_potential(const ExternalAddress& s, double K);

}  // namespace expray
