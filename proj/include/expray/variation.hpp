#pragma once

#include <optional>
#include <vector>

#include "expray/address.hpp"
#include "expray/dynamics.hpp"

namespace expray {

/// Asserts, for t beyond the last sample: |gamma(t) - t| <= c_pos,
/// |gamma'(t) - 1| <= c_der / t and |gamma''(t)| <= c_secder / t^2.
struct AdmissibleTail {
    double c_pos = 0.0;
    double c_der = 0.0;
    double c_secder = 0.0;
};

struct SampledCurve {
    std::vector<double> params;   // strictly increasing
    std::vector<Complex> points;  // gamma(t_i)
    std::vector<Complex> derivs;  // gamma'(t_i)
    std::optional<AdmissibleTail> tail;
};

/// Winding number of a closed sampled curve around a: sum of principal-branch
/// argument increments, rounded. Refuses undersampled curves (any increment
/// above pi/2) and bases within eps of the samples.
long long winding_number(const SampledCurve& curve, const Complex& a, double eps = 1e-9);

/// Variation number (1/2pi) int |Im(gamma'/(gamma-a))| dt over the sampled
/// range (cubic Hermite model between samples, adaptive bisection quadrature),
/// plus a certified O(1/t) remainder when the tail record is present.
/// a may coincide with the initial point; the integrand stays bounded there.
double variation_number(const SampledCurve& curve, const Complex& a, double rel_tol = 1e-6);

/// Closed form for the half line s -> lambda*s: |arg(a/lambda) - pi| / 2pi
/// with the argument taken in [0, 2pi].
double halfline_variation(const Complex& lambda, const Complex& a, double eps = 1e-12);

struct RayVariationReport {
    double alpha = 0.0;        // measured variation of the ray over (t0, infinity)
    int contraction_level = 0; // N: pullbacks until |g''/g'| < e^{-t/2} holds on the grid
    double bound = 1.0;        // 2^N
    // grid window on which the contraction hypothesis was checked;
    // verified_from > verified_to means the window was already empty
    double verified_from = 0.0;
    double verified_to = 0.0;
};

/// Variation number of the dynamic ray g_s^kappa restricted to (t0, infinity),
/// around its own initial point, against the 2^N pullback bound.
RayVariationReport dynamic_ray_variation(const Complex& kappa, const ExternalAddress& s,
                                         double t0, double t_cap, double H = 50.0);

/// Samples the ray on [t0, t_cap] with derivatives and an admissibility tail;
/// ascending parameters, ready for variation_number.
SampledCurve sample_ray_curve(const Complex& kappa, const ExternalAddress& s, double t0,
                              double t_cap, double spatial_step = 0.05, double H = 50.0);

/// The curve t -> gamma'(t) with second derivatives, for bounds that compare a
/// curve's variation with its derivative's variation around 0.
SampledCurve derivative_curve(const Complex& kappa, const ExternalAddress& s,
                              const std::vector<double>& params, double H = 50.0);

/// Certified remainder of the ray variation integral over (T, infinity).
double ray_variation_tail(const Complex& kappa, const ExternalAddress& s, const Complex& a,
                          double T);

}  // namespace expray
