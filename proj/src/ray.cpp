#include "expray/ray.hpp"

#include <algorithm>
#include <cmath>

#include "expray/potential.hpp"
#include "expray/ray_core.hpp"

namespace expray {

namespace {

using raycore::Chain;
using raycore::ChainOptions;
using raycore::Cx;

Cx<double> to_cx(const Complex& z) { return {z.real(), z.imag()}; }
Complex from_cx(const Cx<double>& z) { return {z.re, z.im}; }

Chain<double> chain_for(const Complex& kappa, const ExternalAddress& s, double t, double H,
                        int extra_depth) {
    ChainOptions opt;
    opt.H = H;
    opt.extra_depth = extra_depth;
    return raycore::pull_chain<double>(s, to_cx(kappa), t, opt);
}

}  // namespace

double tail_remainder_bound(const ExternalAddress& s, double K, double t) {
    return 2.0 * std::exp(-t) * (K + 2.0 * M_PI * std::abs(entry_value(s, 2)) + 12.0);
}

double derivative_tail_potential(const ExternalAddress& s, double K) {
    const double t_star = potential_bounds(s).t_star;
    const double product_tail =
        2.0 + 2.0 * std::log(12.0 * K + 8.0 * M_PI * std::exp(t_star) + 50.0);
    return std::max({tail_potential(s, K), 2.0 * t_star + 5.0, product_tail});
}

int seed_depth(const ExternalAddress& s, double t, double K, double H) {
    const PotentialBounds pb = potential_bounds(s);
    if (!(t > pb.t_min))
        raise(Errc::PotentialTooSmall, "potential not above t_min");
    constexpr int cap = 4096;
    double level = t;
    for (int n = 0;; ++n) {
        const double thr = std::max(tail_potential(shift(s, n), K), H);
        if (std::isinf(level) || level >= thr) return n;
        if (n >= cap)
            raise(Errc::DepthExceeded, "seed depth exceeds cap; potential too close to t_min");
        level = F(level);
    }
}

RaySample eval_ray(const Complex& kappa, const ExternalAddress& s, double t, double H,
                   int extra_depth) {
    const auto ch = chain_for(kappa, s, t, H, extra_depth);
    RaySample out;
    out.t = t;
    out.z = from_cx(raycore::ray_point(ch, s, to_cx(kappa)));
    out.residual = raycore::abs(ch.c.front());
    out.depth_used = ch.depth;
    return out;
}

std::pair<Complex, Complex> eval_ray_dual(const Complex& kappa, const ExternalAddress& s,
                                          double t, double H) {
    const auto ch = chain_for(kappa, s, t, H, 0);
    return {from_cx(raycore::ray_point(ch, s, to_cx(kappa))),
            from_cx(raycore::ray_dual(ch, s, to_cx(kappa)))};
}

Complex ray_derivative_t(const Complex& kappa, const ExternalAddress& s, double t, double H) {
    const auto ch = chain_for(kappa, s, t, H, 0);
    return from_cx(raycore::ray_derivative(ch, s, to_cx(kappa)));
}

Complex ray_second_derivative_t(const Complex& kappa, const ExternalAddress& s, double t,
                                double H) {
    const double h = 1e-5 * std::max(1.0, std::abs(t));
    const Complex hi = ray_derivative_t(kappa, s, t + h, H);
    const Complex lo = ray_derivative_t(kappa, s, t - h, H);
    return (hi - lo) / (2.0 * h);
}

RayTrace trace_ray(const Complex& kappa, const ExternalAddress& s, double t_lo, double t_hi,
                   const RayTraceConfig& config) {
    RayTrace trace;
    trace.address = s;
    trace.kappa = kappa;
    const PotentialBounds pb = potential_bounds(s);
    if (!(pb.t_min < t_lo && t_lo < t_hi))
        raise(Errc::PotentialTooSmall, "need t_min < t_lo < t_hi");

    const double K = std::abs(kappa);
    const double t_tail = tail_potential(s, K);

    auto sample_at = [&](double t) {
        RaySample smp = eval_ray(kappa, s, t, config.H);
        if (config.with_derivatives) {
            smp.dz_dt = ray_derivative_t(kappa, s, t, config.H);
            smp.dz_dkappa = eval_ray_dual(kappa, s, t, config.H).second;
        }
        return smp;
    };

    // Bisect [t_lo, t_hi] depth-first from the top so samples come out in
    // strictly decreasing t; stop a segment once its endpoints are close.
    std::vector<RaySample> acc;
    double attempted_t = t_hi;
    auto probe = [&](double t) {
        attempted_t = t;
        return sample_at(t);
    };
    auto refine = [&](auto&& self, const RaySample& hi, const RaySample& lo) -> void {
        const double gap = std::abs(hi.z - lo.z);
        if (gap <= config.max_spatial_step || hi.t - lo.t <= config.min_dt ||
            acc.size() >= config.max_samples) {
            acc.push_back(lo);
            return;
        }
        ++trace.refinement_steps;
        const RaySample mid = probe(0.5 * (hi.t + lo.t));
        self(self, hi, mid);
        self(self, mid, lo);
    };
    try {
        const RaySample top = probe(t_hi);
        acc.push_back(top);
        const RaySample bottom = probe(t_lo);
        refine(refine, top, bottom);
    } catch (const Error& e) {
        if (e.code() != Errc::BranchCut) throw;
        trace.failure = BranchCutFailure{attempted_t, e.what()};
    }
    trace.samples = std::move(acc);

    for (const auto& smp : trace.samples) {
        if (smp.t >= t_tail && smp.residual) {
            const double bound = tail_remainder_bound(s, K, smp.t);
            if (bound > 0.0)
                trace.max_residual_bound_ratio =
                    std::max(trace.max_residual_bound_ratio, *smp.residual / bound);
        }
    }
    return trace;
}

}  // namespace expray
