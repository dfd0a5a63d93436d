#include "expray/selfcheck.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <vector>

#include "expray/address.hpp"
#include "expray/dynamics.hpp"
#include "expray/param.hpp"
#include "expray/potential.hpp"
#include "expray/ray.hpp"
#include "expray/render.hpp"
#include "expray/variation.hpp"

namespace expray {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Suite {
    std::ostream& out;
    int violations = 0;

    void run(const char* name, const std::function<int()>& body) {
        int bad = 0;
        try {
            bad = body();
        } catch (const std::exception& e) {
            out << "FAIL " << name << " (exception: " << e.what() << ")\n";
            ++violations;
            return;
        }
        if (bad == 0)
            out << "ok   " << name << "\n";
        else
            out << "FAIL " << name << " (" << bad << " violations)\n";
        violations += bad;
    }
};

ExternalAddress random_address(std::mt19937_64& rng, int max_entry = 3) {
    std::uniform_int_distribution<int> len(1, 3), pre_len(0, 2), ent(-max_entry, max_entry);
    std::vector<long long> pre, per;
    const int np = pre_len(rng);
    for (int i = 0; i < np; ++i) pre.push_back(ent(rng));
    const int q = len(rng);
    for (int i = 0; i < q; ++i) per.push_back(ent(rng));
    return ExternalAddress::eventually_periodic(pre, per);
}

Complex random_kappa(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(-radius, radius);
    for (;;) {
        const Complex k{u(rng), u(rng)};
        if (std::abs(k) <= radius) return k;
    }
}

}  // namespace

int run_selfcheck(const SelfcheckOptions& options, std::ostream& out) {
    Suite suite{out};
    std::mt19937_64 rng(options.seed);
    const int n = std::max(4, options.samples);

    suite.run("model function inverse round trip", [&] {
        int bad = 0;
        for (int i = 0; i <= 700; ++i) {
            const double t = static_cast<double>(i);
            const double back = F_inv(F(t));
            if (std::abs(back - t) > 1e-14 * std::max(1.0, t)) ++bad;
        }
        return bad;
    });

    suite.run("tail summation estimates", [&] {
        int bad = 0;
        for (double x = 0.0; x <= 10.0; x += 0.5)
            for (double t = 2 * x + 5; t <= 2 * x + 50; t += 4.5) {
                if (!(tail_reciprocal_sum(t) < 3.0 * std::exp(-t))) ++bad;
                if (!(tail_growth_ratio_sum(x, t) < (std::exp(x) + 1.0) * std::exp(-t))) ++bad;
            }
        return bad;
    });

    suite.run("shift transports the potential majorant", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const ExternalAddress s = random_address(rng, 6);
            const double base = potential_bounds(s).t_star;
            for (long long k = 1; k <= 5; ++k)
                if (potential_bounds(shift(s, k)).t_star > F_iter(base, k) + 1e-12) ++bad;
        }
        return bad;
    });

    suite.run("entry/shift coherence", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const ExternalAddress s = random_address(rng, 40);
            for (long long sh = 0; sh <= 20; sh += 5) {
                const ExternalAddress shifted = shift(s, sh);
                for (long long k = 1; k <= 100; k += 7)
                    if (entry(shifted, k) != entry(s, k + sh)) ++bad;
            }
        }
        return bad;
    });

    suite.run("lexicographic order is total", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const ExternalAddress a = random_address(rng), b = random_address(rng),
                                  c = random_address(rng);
            const auto ab = lex_compare(a, b), ba = lex_compare(b, a);
            if (ab == Ordering::Less && ba != Ordering::Greater) ++bad;
            if (ab == Ordering::Equal && ba != Ordering::Equal) ++bad;
            if (lex_compare(a, b) != Ordering::Greater && lex_compare(b, c) != Ordering::Greater &&
                lex_compare(a, c) == Ordering::Greater) {
                // a <= b and b <= c must give a <= c
                ++bad;
            }
        }
        return bad;
    });

    suite.run("address literal round trip", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const ExternalAddress s = random_address(rng, 9);
            if (!(parse_address(format_address(s)) == s)) ++bad;
        }
        if (!(parse_address("gen x=1.25 y=2") ==
              parse_address(format_address(parse_address("gen x=1.25 y=2")))))
            ++bad;
        return bad;
    });

    suite.run("inverse branch left identity", [&] {
        int bad = 0;
        std::uniform_real_distribution<double> mag(-6.0, 300.0), ang(-3.0, 3.0);
        std::uniform_int_distribution<long long> branch(-10, 10);
        for (int i = 0; i < n * 4; ++i) {
            const Complex kappa = random_kappa(rng, 4.0);
            const double r = std::pow(10.0, mag(rng));
            const Complex z = std::polar(r, ang(rng));
            const long long j = branch(rng);
            const Complex w = log_branch(kappa, j, z);
            if (std::abs(exp_map(kappa, w) - z) > 1e-13 * std::abs(z)) ++bad;
            if (strip_index(kappa, w) != j) ++bad;
        }
        return bad;
    });

    suite.run("address translation by 2 pi i k", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const Complex kappa = random_kappa(rng, 2.0);
            const Complex z{0.4 * (i % 5) - 1.0, 0.5 * (i % 7) - 1.4};
            // compare the prefix on which the orbit stays far from overflow,
            // where strip labels are numerically stable
            size_t stable = 0;
            Complex w = z;
            while (stable < 4 && std::abs(w) < 1e6) {
                ++stable;
                w = exp_map(kappa, w);
            }
            for (int k = -3; k <= 3; ++k) {
                try {
                    const auto base = external_address(kappa, z, 4);
                    const auto moved = external_address(kappa + Complex{0, kTwoPi * k}, z, 4);
                    const size_t m =
                        std::min({base.entries.size(), moved.entries.size(), stable});
                    for (size_t q = 0; q < m; ++q)
                        if (moved.entries[q] != base.entries[q] + k) ++bad;
                } catch (const Error&) {
                    // orbit met a strip boundary; not a violation
                }
            }
        }
        return bad;
    });

    suite.run("escape verdict is monotone in the threshold", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const Complex kappa = random_kappa(rng, 3.0);
            const OrbitRecord at50 = orbit(kappa, {0.0, 0.0}, 64, 50.0);
            if (!at50.escaped) continue;
            for (double thr = 60.0; thr <= 100.0; thr += 20.0)
                if (!orbit(kappa, {0.0, 0.0}, 128, thr).escaped) ++bad;
        }
        return bad;
    });

    suite.run("semiconjugacy along ray tails", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const ExternalAddress s = random_address(rng);
            const Complex kappa = random_kappa(rng, 3.0);
            const double t =
                tail_potential(s, std::abs(kappa)) + 0.3 + (i % 13) * 0.5;  // keep F(t) moderate
            if (F(t) > 1e5) continue;
            const Complex lhs = exp_map(kappa, eval_ray(kappa, s, t).z);
            const Complex rhs = eval_ray(kappa, shift(s, 1), F(t)).z;
            if (std::abs(lhs - rhs) > 1e-9) ++bad;
        }
        return bad;
    });

    suite.run("tail remainder bound", [&] {
        int bad = 0;
        for (int i = 0; i < n * 4; ++i) {
            const ExternalAddress s = random_address(rng);
            const Complex kappa = random_kappa(rng, 5.0);
            const double K = std::abs(kappa);
            std::uniform_real_distribution<double> du(0.05, 20.0);
            const double t = tail_potential(s, K) + du(rng);
            const RaySample smp = eval_ray(kappa, s, t);
            const double bound = tail_remainder_bound(s, K, t);
            if (!(*smp.residual <= bound && *smp.residual < 5.0)) ++bad;
        }
        return bad;
    });

    suite.run("deeper seeding moves the value below 2^-k", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const ExternalAddress s = random_address(rng);
            const Complex kappa = random_kappa(rng, 3.0);
            const double t = tail_potential(s, std::abs(kappa)) + 1.0 + (i % 7);
            const Complex base = eval_ray(kappa, s, t).z;
            for (int k = 1; k <= 10; ++k)
                if (!(std::abs(eval_ray(kappa, s, t, 50.0, k).z - base) <= std::ldexp(1.0, -k)))
                    ++bad;
        }
        return bad;
    });

    suite.run("potential derivative against central differences", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const ExternalAddress s = random_address(rng);
            const Complex kappa = random_kappa(rng, 3.0);
            const double t =
                derivative_tail_potential(s, std::abs(kappa)) + 0.5 + (i % 9) * 0.7;
            const Complex an = ray_derivative_t(kappa, s, t);
            const double h = 1e-5 * std::max(1.0, t);
            const Complex fd = (eval_ray(kappa, s, t + h).z - eval_ray(kappa, s, t - h).z) /
                               (2.0 * h);
            if (std::abs(an - fd) > 1e-6 * std::abs(an)) ++bad;
            if (!(std::abs(an - 1.0) < std::exp(-t / 2.0))) ++bad;
            // differentiate the semiconjugacy: g_s'(t) * g_{sigma s}(F(t)) relation
            const Complex lhs = an * eval_ray(kappa, shift(s, 1), F(t)).z;
            const Complex rhs =
                ray_derivative_t(kappa, shift(s, 1), F(t)) * (F(t) + 1.0);
            if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(rhs))) ++bad;
        }
        return bad;
    });

    suite.run("second derivative bounds on tails", [&] {
        int bad = 0;
        for (int i = 0; i < n; ++i) {
            const ExternalAddress s = random_address(rng);
            const Complex kappa = random_kappa(rng, 3.0);
            const double t =
                derivative_tail_potential(s, std::abs(kappa)) + 0.5 + (i % 9) * 0.7;
            const Complex d2 = ray_second_derivative_t(kappa, s, t);
            const Complex d1 = ray_derivative_t(kappa, s, t);
            if (!(std::abs(d2) < std::exp(-t / 2.0))) ++bad;
            if (!(std::abs(d2 / d1) < std::exp(-t / 2.0))) ++bad;
        }
        return bad;
    });

    suite.run("parameter ray tail solve and checks", [&] {
        int bad = 0;
        for (long long s1 = -2; s1 <= 2; ++s1) {
            const ExternalAddress s =
                ExternalAddress::eventually_periodic({s1}, {0});
            const NewtonResult nr = newton_solve(s, 30.0, tail_seed(s, 30.0));
            if (nr.iters > 6) ++bad;
            const double dist = std::abs(nr.kappa - Complex{30.0, kTwoPi * s1});
            if (!(dist <= 2.0 * std::exp(-30.0) * (kTwoPi * 30.0 + 12.0))) ++bad;
        }
        ParamTraceConfig cfg;
        const ParamTrace trace =
            trace_parameter_ray(ExternalAddress::eventually_periodic({}, {0}), 32.0, 8.0, cfg);
        if (trace.stopped_early) ++bad;
        const VerifyReport report = verify_trace(trace);
        bad += static_cast<int>(report.violations.size());
        return bad;
    });

    suite.run("half line variation closed form", [&] {
        int bad = 0;
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int i = 0; i < n; ++i) {
            const Complex lambda{u(rng), u(rng)};
            const Complex a{u(rng), u(rng)};
            if (std::abs(lambda) < 0.1 || std::abs(a) < 0.1) continue;
            double expected;
            try {
                double theta = std::arg(a / lambda);
                if (theta < 0) theta += kTwoPi;
                if (std::min(theta, kTwoPi - theta) < 1e-9) continue;
                expected = std::abs(theta - M_PI) / kTwoPi;
            } catch (...) {
                continue;
            }
            if (std::abs(halfline_variation(lambda, a) - expected) > 1e-15) ++bad;
        }
        return bad;
    });

    suite.run("winding number of the unit circle", [&] {
        int bad = 0;
        SampledCurve circle;
        for (int i = 0; i <= 256; ++i) {
            const double th = kTwoPi * i / 256.0;
            circle.params.push_back(th);
            circle.points.push_back(std::polar(1.0, th));
            circle.derivs.push_back(Complex{0, 1} * std::polar(1.0, th));
        }
        if (winding_number(circle, {0, 0}) != 1) ++bad;
        if (winding_number(circle, {3, 0}) != 0) ++bad;
        return bad;
    });

    suite.run("renderer determinism and escape monotonicity", [&] {
        int bad = 0;
        ImageSpec spec;
        spec.center = {-1.0, 0.0};
        spec.width_units = 8.0;
        spec.width_px = 64;
        spec.height_px = 64;
        spec.max_iter = 64;
        const Image a = render_parameter_plane(spec, {});
        const Image b = render_parameter_plane(spec, {});
        if (ppm_bytes(a) != ppm_bytes(b)) ++bad;
        const EscapeField lo = escape_field_parameter(spec);
        ImageSpec doubled = spec;
        doubled.max_iter = 128;
        const EscapeField hi = escape_field_parameter(doubled);
        for (size_t i = 0; i < lo.iters.size(); ++i)
            if (lo.iters[i] >= 0 && hi.iters[i] < 0) ++bad;
        return bad;
    });

    return suite.violations;
}

}  // namespace expray
