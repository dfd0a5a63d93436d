#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "expray/potential.hpp"
#include "expray/ray.hpp"
#include "test_support.hpp"

using namespace expray;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TEST_CASE("seed depth against direct iteration") {
    const auto zero = parse_address("|0");
    CHECK(seed_depth(zero, 200.0, 10.0) == 0);
    // oracle: iterate F directly until the threshold is reached
    auto oracle = [&](double t, double K) {
        const double thr = std::max(2.0 * std::log(K + 3.0), 50.0);
        int n = 0;
        while (t < thr) {
            t = F(t);
            ++n;
        }
        return n;
    };
    CHECK(seed_depth(zero, 1.0, 10.0) == oracle(1.0, 10.0));
    CHECK(seed_depth(zero, 1.0, 10.0) == 3);
    CHECK(seed_depth(zero, 0.05, 1.0) == oracle(0.05, 1.0));
    CHECK_THROWS_AS(seed_depth(zero, 0.0, 1.0), Error);
    CHECK_THROWS_AS(seed_depth(ExternalAddress::generated(2.0, 1.0), 1.5, 1.0), Error);
}

TEST_CASE("ray point at a tail potential") {
    const auto zero = parse_address("|0");
    const RaySample smp = eval_ray({-2, 0}, zero, 25.0);
    CHECK(std::abs(smp.z - Complex{27, 0}) < 3e-10);
    CHECK(*smp.residual <= 2.0 * std::exp(-25.0) * (2.0 + 0.0 + 12.0));
    // oracle: re-evaluate with a deeper pullback chain
    const RaySample deep = eval_ray({-2, 0}, zero, 25.0, 50.0, 5);
    CHECK(std::abs(smp.z - deep.z) < 1e-12);
}

TEST_CASE("real parameters give real rays at the zero address") {
    const auto zero = parse_address("|0");
    for (double t : {0.5, 1.0, 5.0, 17.0, 80.0}) {
        CHECK(eval_ray({-2, 0}, zero, t).z.imag() == 0.0);
        CHECK(eval_ray({-1.5, 0}, zero, t).z.imag() == 0.0);
    }
    // an escaping real parameter still carries the ray above its own potential
    for (double t : {2.0, 5.0, 17.0, 80.0})
        CHECK(eval_ray({0.7, 0}, zero, t).z.imag() == 0.0);
    // ... but below it the pullback runs into the singular value
    CHECK_THROWS_AS(eval_ray({0.7, 0}, zero, 0.5), Error);
}

TEST_CASE("semiconjugacy at moderate potentials") {
    std::mt19937_64 rng(37);
    int tested = 0;
    for (const auto& smp : testsup::tail_samples(300, 41)) {
        if (F(smp.t) > 1e5) continue;  // keep the comparison within double resolution
        ++tested;
        const Complex lhs = exp_map(smp.kappa, eval_ray(smp.kappa, smp.s, smp.t).z);
        const Complex rhs = eval_ray(smp.kappa, shift(smp.s, 1), F(smp.t)).z;
        CHECK(std::abs(lhs - rhs) <= 1e-9);
    }
    CHECK(tested > 50);
}

TEST_CASE("tail remainder bound holds with room") {
    for (const auto& smp : testsup::tail_samples(200, 43)) {
        const RaySample r = eval_ray(smp.kappa, smp.s, smp.t);
        const double bound = tail_remainder_bound(smp.s, std::abs(smp.kappa), smp.t);
        CHECK(*r.residual <= bound);
        CHECK(*r.residual < 5.0);
    }
}

TEST_CASE("extra pullback depth moves the value by less than 2^-k") {
    for (const auto& smp : testsup::tail_samples(40, 47)) {
        const Complex base = eval_ray(smp.kappa, smp.s, smp.t).z;
        for (int k = 1; k <= 10; ++k) {
            const Complex deeper = eval_ray(smp.kappa, smp.s, smp.t, 50.0, k).z;
            CHECK(std::abs(deeper - base) <= std::ldexp(1.0, -k));
        }
    }
}

TEST_CASE("kappa derivative matches finite differences") {
    // near-asymptotic regime: derivative approaches -1
    {
        const auto [z, dk] = eval_ray_dual({0.5, 0.5}, parse_address("|0"), 30.0);
        CHECK(std::abs(dk + 1.0) < 0.01);
    }
    const Complex kappa{-2, 1};
    const auto s = parse_address("|0");
    const auto [z, dk] = eval_ray_dual(kappa, s, 5.0);
    const Complex h{1e-6, 0};
    const Complex fd = (eval_ray(kappa + h, s, 5.0).z - eval_ray(kappa - h, s, 5.0).z) / 2e-6;
    CHECK(std::abs(dk - fd) <= 1e-6 * std::abs(dk));
}

TEST_CASE("kappa derivative integrates to the value difference") {
    // oracle: integrate dz/dkappa along a short segment of parameters
    const auto s = parse_address("1|0");
    const Complex a{-1.5, 0.8}, b{-1.3, 0.9};
    const double t = 6.0;
    const int steps = 400;
    Complex integral{0, 0};
    for (int i = 0; i < steps; ++i) {
        const Complex mid = a + (b - a) * ((i + 0.5) / steps);
        integral += eval_ray_dual(mid, s, t).second * ((b - a) / static_cast<double>(steps));
    }
    const Complex dz = eval_ray(b, s, t).z - eval_ray(a, s, t).z;
    CHECK(std::abs(integral - dz) < 1e-8);
}

TEST_CASE("potential derivative: finite differences, tail size, chain rule") {
    const Complex kappa{-2, 0};
    const auto s = parse_address("|0");
    const Complex an = ray_derivative_t(kappa, s, 5.0);
    const double h = 1e-5;
    const Complex fd = (eval_ray(kappa, s, 5.0 + h).z - eval_ray(kappa, s, 5.0 - h).z) / (2 * h);
    CHECK(std::abs(an - fd) <= 1e-6 * std::abs(an));

    int in_regime = 0;
    for (const auto& smp : testsup::tail_samples(120, 53)) {
        if (smp.t < derivative_tail_potential(smp.s, std::abs(smp.kappa))) continue;
        ++in_regime;
        CHECK(std::abs(ray_derivative_t(smp.kappa, smp.s, smp.t) - 1.0) <
              std::exp(-smp.t / 2.0));
    }
    CHECK(in_regime > 40);

    // differentiate the semiconjugacy: g_s'(t) * g_{sigma s}(F(t)) = g_{sigma s}'(F(t)) * (F(t)+1)
    for (const auto& smp : testsup::tail_samples(40, 59)) {
        if (F(smp.t) > 1e8) continue;
        const Complex lhs =
            ray_derivative_t(smp.kappa, smp.s, smp.t) *
            eval_ray(smp.kappa, shift(smp.s, 1), F(smp.t)).z;
        const Complex rhs =
            ray_derivative_t(smp.kappa, shift(smp.s, 1), F(smp.t)) * (F(smp.t) + 1.0);
        CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("both derivatives agree with central differences on tail samples") {
    int count = 0;
    for (const auto& smp : testsup::tail_samples(50, 61)) {
        ++count;
        const double h = 1e-5 * std::max(1.0, smp.t);
        const Complex dt_an = ray_derivative_t(smp.kappa, smp.s, smp.t);
        const Complex dt_fd =
            (eval_ray(smp.kappa, smp.s, smp.t + h).z - eval_ray(smp.kappa, smp.s, smp.t - h).z) /
            (2 * h);
        CHECK(std::abs(dt_an - dt_fd) <= 1e-6 * std::abs(dt_an));

        const Complex dk_an = eval_ray_dual(smp.kappa, smp.s, smp.t).second;
        const Complex step{1e-6, 0};
        const Complex dk_fd =
            (eval_ray(smp.kappa + step, smp.s, smp.t).z -
             eval_ray(smp.kappa - step, smp.s, smp.t).z) /
            2e-6;
        CHECK(std::abs(dk_an - dk_fd) <= 1e-6 * std::abs(dk_an));
    }
    CHECK(count == 50);
}

TEST_CASE("second derivative: bounds, symmetry, integral consistency") {
    for (const auto& smp : testsup::tail_samples(50, 67)) {
        if (smp.t < derivative_tail_potential(smp.s, std::abs(smp.kappa))) continue;
        const Complex d2 = ray_second_derivative_t(smp.kappa, smp.s, smp.t);
        const Complex d1 = ray_derivative_t(smp.kappa, smp.s, smp.t);
        CHECK(std::abs(d2) < std::exp(-smp.t / 2.0));
        CHECK(std::abs(d2 / d1) < std::exp(-smp.t / 2.0));
    }

    CHECK(ray_second_derivative_t({-2, 0}, parse_address("|0"), 4.0).imag() == 0.0);

    // oracle: Simpson quadrature of the second derivative over [t, t+1]
    const Complex kappa{-2, 0};
    const auto s = parse_address("|0");
    const double t = 4.0;
    const int panels = 64;
    Complex integral{0, 0};
    for (int i = 0; i < panels; ++i) {
        const double a = t + static_cast<double>(i) / panels;
        const double b = t + static_cast<double>(i + 1) / panels;
        integral += (ray_second_derivative_t(kappa, s, a) +
                     4.0 * ray_second_derivative_t(kappa, s, 0.5 * (a + b)) +
                     ray_second_derivative_t(kappa, s, b)) *
                    ((b - a) / 6.0);
    }
    const Complex change = ray_derivative_t(kappa, s, t + 1.0) - ray_derivative_t(kappa, s, t);
    CHECK(std::abs(integral - change) < 1e-5);
}

TEST_CASE("orbit asymptotics of ray points") {
    for (double t : {2.0, 3.0, 4.5, 6.0}) {
        const Complex kappa{0.4, 0.9};
        const auto s = parse_address("|1 0");
        Complex z = eval_ray(kappa, s, t).z;
        for (int n = 1; F_iter(t, n - 1) <= 1e15; ++n) {
            const double level = F_iter(t, n - 1);
            const Complex expected =
                Complex{level, 0} - kappa + Complex{0, kTwoPi * entry_value(s, n)};
            CHECK(std::abs(z - expected) <= 10.0 * F_iter(t, -n));
            z = exp_map(kappa, z);
        }
    }
}

TEST_CASE("trace of a real ray") {
    const auto zero = parse_address("|0");
    const RayTrace trace = trace_ray({-2, 0}, zero, 1.0, 30.0);
    CHECK_FALSE(trace.failure.has_value());
    REQUIRE(trace.samples.size() >= 2);
    CHECK(trace.samples.front().t == 30.0);
    CHECK(trace.samples.back().t == 1.0);
    const double lo = trace.samples.back().z.real(), hi = trace.samples.front().z.real();
    for (size_t i = 0; i < trace.samples.size(); ++i) {
        const RaySample& smp = trace.samples[i];
        CHECK(smp.z.imag() == 0.0);
        CHECK(smp.z.real() >= lo - 0.2);
        CHECK(smp.z.real() <= hi + 0.2);
        if (i) {
            CHECK(smp.t < trace.samples[i - 1].t);
            CHECK(std::abs(smp.z - trace.samples[i - 1].z) <= 0.1 + 1e-12);
        }
    }
}

TEST_CASE("trace diagnostics bound the residuals") {
    const RayTrace trace = trace_ray({-2, 0}, parse_address("|0"), 1.0, 30.0);
    CHECK(trace.max_residual_bound_ratio <= 1.0);
    CHECK(trace.refinement_steps > 0);
}

TEST_CASE("semiconjugacy along a trace") {
    const Complex kappa{0.3, 0.7};
    const auto s = parse_address("|1 0");
    const RayTrace trace = trace_ray(kappa, s, 1.0, 11.0);
    REQUIRE_FALSE(trace.failure.has_value());
    const auto shifted = shift(s, 1);
    for (const RaySample& smp : trace.samples) {
        const Complex lhs = exp_map(kappa, smp.z);
        const Complex rhs = eval_ray(kappa, shifted, F(smp.t)).z;
        CHECK(std::abs(lhs - rhs) <= 1e-8);
    }
}

TEST_CASE("vertical order of dynamic rays matches the lexicographic order") {
    const Complex kappa{0.3, 0.7};
    // separations decided at the first or second entry, tested at t = 6
    std::vector<ExternalAddress> fam = {
        parse_address("|0"),  parse_address("1|0"), parse_address("|1"),
        parse_address("|-1"), parse_address("|2"),  parse_address("-1|1"),
    };
    std::sort(fam.begin(), fam.end(), [](const auto& a, const auto& b) {
        return lex_compare(a, b) == Ordering::Less;
    });
    double prev = -1e300;
    for (const auto& s : fam) {
        const double im = eval_ray(kappa, s, 6.0).z.imag();
        CHECK(im > prev);
        prev = im;
    }
    // third-entry separation is still visible at a low potential
    const double a = eval_ray(kappa, parse_address("1 0|0"), 2.5).z.imag();
    const double b = eval_ray(kappa, parse_address("1 0|1"), 2.5).z.imag();
    CHECK(a < b);
}

TEST_CASE("rays at fast addresses evaluate above their minimal potential") {
    const auto fast = ExternalAddress::generated(0.5, 1.0);
    const Complex kappa{0.2, 0.4};
    const RaySample smp = eval_ray(kappa, fast, 1.0);
    CHECK(std::isfinite(smp.z.real()));
    const Complex lhs = exp_map(kappa, smp.z);
    const Complex rhs = eval_ray(kappa, shift(fast, 1), F(1.0)).z;
    CHECK(std::abs(lhs - rhs) <= 1e-9);
    CHECK_THROWS_AS(eval_ray(kappa, fast, 0.4), Error);  // below growth_x
}

TEST_CASE("traces can carry derivatives") {
    RayTraceConfig cfg;
    cfg.with_derivatives = true;
    const RayTrace trace = trace_ray({-2, 0}, parse_address("|0"), 2.0, 8.0, cfg);
    for (const RaySample& smp : trace.samples) {
        REQUIRE(smp.dz_dt.has_value());
        REQUIRE(smp.dz_dkappa.has_value());
        CHECK(std::abs(*smp.dz_dt - ray_derivative_t({-2, 0}, trace.address, smp.t)) == 0.0);
    }
}

TEST_CASE("branch cut failures return the partial trace") {
    // pulling back through entry 0 forces the level-1 point near the negative
    // real axis when kappa sits far to the right
    const auto s = parse_address("|0");
    RayTraceConfig cfg;
    bool failed_somewhere = false;
    for (double re = 6.0; re <= 30.0; re += 1.0) {
        const RayTrace trace = trace_ray({re, M_PI}, s, 0.2, 6.0, cfg);
        if (trace.failure) {
            failed_somewhere = true;
            for (const RaySample& smp : trace.samples) CHECK(smp.t > trace.failure->t);
        }
    }
    (void)failed_somewhere;  // geometry-dependent; the contract above is what matters
}
