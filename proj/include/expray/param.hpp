#pragma once

#include <optional>
#include <string>
#include <vector>

#include "expray/address.hpp"
#include "expray/dynamics.hpp"

namespace expray {

struct NewtonConfig {
    double residual_tol = 1e-12;
    int max_iters = 50;
    double min_derivative = 1e-8;
    double H = 50.0;
};

struct NewtonResult {
    Complex kappa;
    int iters = 0;
    double residual = 0.0;
};

struct ParamSample {
    double t = 0.0;
    Complex kappa;
    double residual = 0.0;
    int newton_iters = 0;
    bool tail_bound_ok = true;   // |kappa - t - 2 pi i s1| < 5 where the tail regime applies
    bool radius_bound_ok = true; // |kappa| < 2 pi t
};

struct ParamTraceConfig {
    NewtonConfig newton;
    double max_kappa_step = 0.1;
    double min_dt = 1e-9;
    double initial_dt = 0.1;
    double grow_factor = 1.25;   // applied after 3 consecutive accepted steps
    int max_halvings = 40;
    std::vector<double> checkpoints;  // potentials the trace must land on exactly
};

struct ParamTrace {
    ExternalAddress address = ExternalAddress::eventually_periodic({}, {0});
    std::vector<ParamSample> samples;  // strictly decreasing t
    bool stopped_early = false;
    std::string stop_reason;
};

/// Solves g_s^kappa(t) = 0 for kappa by Newton iteration with the forward-mode
/// kappa-derivative. Throws NoConvergence, SmallDerivative, or DomainError.
NewtonResult newton_solve(const ExternalAddress& s, double t, const Complex& kappa0,
                          const NewtonConfig& cfg = {});

/// Asymptotic starting point t + 2 pi i s1, valid once t >= 20 + 2 t_s*.
Complex tail_seed(const ExternalAddress& s, double t);

/// Continuation of the parameter ray G_s from t_start down to t_end:
/// linear-extrapolation predictor, Newton corrector, adaptive step.
ParamTrace trace_parameter_ray(const ExternalAddress& s, double t_start, double t_end,
                               const ParamTraceConfig& cfg = {},
                               std::optional<ParamSample> anchor = std::nullopt);

struct VerifyViolation {
    size_t sample_index = 0;
    char check = '?';  // 'a'..'f'
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyViolation> violations;
    size_t samples_checked = 0;
    size_t informational_radius_misses = 0;  // |kappa| <= 2t misses for t >= 30, not violations
    bool pass() const { return violations.empty(); }
};

/// Per-sample checks: (a) tail asymptotic distance < 5, (b) the tightened
/// 2e^{-t}(2 pi t + 2 pi |s2| + 12) bound, (c) |kappa| < 2 pi t, (d) |kappa| <= 2t
/// informational for t >= 30, (e) singular orbit escapes, (f) its external
/// address prefix matches s.
VerifyReport verify_trace(const ParamTrace& trace);

}  // namespace expray
