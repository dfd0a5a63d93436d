#include "expray/param.hpp"

#include <algorithm>
#include <cmath>

#include "expray/potential.hpp"
#include "expray/ray.hpp"

namespace expray {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

ParamSample make_sample(const ExternalAddress& s, double t, const NewtonResult& nr) {
    ParamSample smp;
    smp.t = t;
    smp.kappa = nr.kappa;
    smp.residual = nr.residual;
    smp.newton_iters = nr.iters;
    const double tail_from = 20.0 + 2.0 * potential_bounds(s).t_star;
    if (t >= tail_from)
        smp.tail_bound_ok =
            std::abs(nr.kappa - Complex{t, kTwoPi * entry_value(s, 1)}) < 5.0;
    smp.radius_bound_ok = std::abs(nr.kappa) < kTwoPi * t;
    return smp;
}

}  // namespace

NewtonResult newton_solve(const ExternalAddress& s, double t, const Complex& kappa0,
                          const NewtonConfig& cfg) {
    Complex kappa = kappa0;
    for (int iter = 0; iter <= cfg.max_iters; ++iter) {
        Complex g, dg;
        try {
            std::tie(g, dg) = eval_ray_dual(kappa, s, t, cfg.H);
        } catch (const Error& e) {
            raise(Errc::DomainError, std::string("ray undefined at iterate: ") + e.what());
        }
        const double res = std::abs(g);
        if (res <= cfg.residual_tol) return {kappa, iter, res};
        if (iter == cfg.max_iters) break;
        if (std::abs(dg) < cfg.min_derivative)
            raise(Errc::SmallDerivative, "kappa-derivative below threshold");
        kappa -= g / dg;
    }
    raise(Errc::NoConvergence,
          "no root within " + std::to_string(cfg.max_iters) + " iterations");
}

Complex tail_seed(const ExternalAddress& s, double t) {
    const double t_tail = 20.0 + 2.0 * potential_bounds(s).t_star;
    if (t < t_tail)
        raise(Errc::PotentialTooSmall,
              "tail seed needs t >= " + std::to_string(t_tail));
    return {t, kTwoPi * entry_value(s, 1)};
}

ParamTrace trace_parameter_ray(const ExternalAddress& s, double t_start, double t_end,
                               const ParamTraceConfig& cfg, std::optional<ParamSample> anchor) {
    ParamTrace trace;
    trace.address = s;
    const PotentialBounds pb = potential_bounds(s);
    if (!(t_end > pb.t_min) || !(t_start > t_end))
        raise(Errc::PotentialTooSmall, "need t_min < t_end < t_start");

    std::vector<double> checkpoints = cfg.checkpoints;
    std::sort(checkpoints.begin(), checkpoints.end(), std::greater<>());

    if (anchor) {
        trace.samples.push_back(*anchor);
    } else {
        const NewtonResult first = newton_solve(s, t_start, tail_seed(s, t_start), cfg.newton);
        trace.samples.push_back(make_sample(s, t_start, first));
    }

    double dt = cfg.initial_dt;
    int consecutive_ok = 0;
    int halvings = 0;
    while (trace.samples.back().t > t_end) {
        const ParamSample& last = trace.samples.back();
        if (dt < cfg.min_dt) {
            trace.stopped_early = true;
            trace.stop_reason = "step size underflow at t=" + std::to_string(last.t);
            break;
        }
        double t_next = std::max(last.t - dt, t_end);
        for (double cp : checkpoints)
            if (cp < last.t - 1e-15 && cp > t_next) t_next = cp;

        // linear extrapolation from the last two accepted samples
        Complex prediction = last.kappa;
        if (trace.samples.size() >= 2) {
            const ParamSample& prev = trace.samples[trace.samples.size() - 2];
            const double span = last.t - prev.t;
            if (span != 0.0)
                prediction += (last.kappa - prev.kappa) * ((t_next - last.t) / span);
        }

        bool accepted = false;
        try {
            const NewtonResult nr = newton_solve(s, t_next, prediction, cfg.newton);
            if (std::abs(nr.kappa - last.kappa) <= cfg.max_kappa_step) {
                trace.samples.push_back(make_sample(s, t_next, nr));
                accepted = true;
            }
        } catch (const Error& e) {
            if (e.code() != Errc::NoConvergence && e.code() != Errc::DomainError &&
                e.code() != Errc::SmallDerivative && e.code() != Errc::DepthExceeded)
                throw;
        }

        if (accepted) {
            halvings = 0;
            if (++consecutive_ok >= 3) {
                dt *= cfg.grow_factor;
                consecutive_ok = 0;
            }
        } else {
            consecutive_ok = 0;
            dt *= 0.5;
            if (++halvings > cfg.max_halvings) {
                trace.stopped_early = true;
                trace.stop_reason =
                    "no accepted step after repeated halvings at t=" + std::to_string(last.t);
                break;
            }
        }
    }
    return trace;
}

VerifyReport verify_trace(const ParamTrace& trace) {
    VerifyReport report;
    const ExternalAddress& s = trace.address;
    const double t_star = potential_bounds(s).t_star;
    const double tail_from = 20.0 + 2.0 * t_star;
    const double s1 = entry_value(s, 1);
    const double s2 = entry_value(s, 2);

    for (size_t i = 0; i < trace.samples.size(); ++i) {
        const ParamSample& smp = trace.samples[i];
        report.samples_checked++;
        const double dist = std::abs(smp.kappa - Complex{smp.t, kTwoPi * s1});
        if (smp.t >= tail_from) {
            if (!(dist < 5.0))
                report.violations.push_back(
                    {i, 'a', "tail distance " + std::to_string(dist) + " >= 5"});
            const double tight =
                2.0 * std::exp(-smp.t) * (kTwoPi * smp.t + kTwoPi * std::abs(s2) + 12.0);
            if (!(dist <= tight))
                report.violations.push_back(
                    {i, 'b', "tail distance " + std::to_string(dist) + " above " +
                                 std::to_string(tight)});
        }
        if (!(std::abs(smp.kappa) < kTwoPi * smp.t))
            report.violations.push_back(
                {i, 'c', "|kappa| = " + std::to_string(std::abs(smp.kappa)) +
                             " not below 2 pi t = " + std::to_string(kTwoPi * smp.t)});
        if (smp.t >= 30.0 && !(std::abs(smp.kappa) <= 2.0 * smp.t))
            report.informational_radius_misses++;

        const OrbitRecord orb = orbit(smp.kappa, Complex{0.0, 0.0}, 256, 50.0);
        if (!orb.escaped) {
            report.violations.push_back({i, 'e', "singular orbit did not escape"});
        } else {
            // compare strip labels while the orbit stays small enough that the
            // labels are numerically reliable
            try {
                Complex z{0.0, 0.0};
                for (long long k = 1; k <= 24 && std::abs(z) < 1e9; ++k) {
                    if (strip_index(smp.kappa, z) != entry(s, k)) {
                        report.violations.push_back(
                            {i, 'f', "orbit address differs from s at position " +
                                         std::to_string(k)});
                        break;
                    }
                    z = exp_map(smp.kappa, z);
                }
            } catch (const Error& e) {
                report.violations.push_back(
                    {i, 'f', std::string("orbit address unreadable: ") + e.what()});
            }
        }
    }
    return report;
}

}  // namespace expray
