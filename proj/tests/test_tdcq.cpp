#include "doctest.h"

#include <cmath>

#include "thermobem/errors.hpp"
#include "thermobem/tdcq.hpp"

using namespace thermobem;

namespace {

Signal smooth_causal(const TimeGrid& grid, int onset_step) {
    // compactly-started C^inf window: exp(-1/x) ramp times a gentle wave
    Signal s = make_signal(1, grid.n_steps + 1, onset_step);
    for (int n = onset_step; n <= grid.n_steps; ++n) {
        const double x = (n - onset_step) * grid.dt;
        const double ramp = x > 0 ? std::exp(-0.25 / x) : 0.0;
        s.samples(0, n) = ramp * std::sin(3.0 * x) * std::exp(-0.2 * x);
    }
    return s;
}

} // namespace

TEST_SUITE_BEGIN("tdcq");

TEST_CASE("nodes: delta maps and positivity") {
    TimeGrid g = make_time_grid(1.0, 8);
    CQConfig cfg;
    cfg.scheme = CQScheme::BDF1;
    CHECK(std::abs(cq_delta(CQScheme::BDF1, 0.0) - 1.0) == 0.0);
    CHECK(std::abs(cq_delta(CQScheme::BDF2, 0.0) - 1.5) == 0.0);
    // BDF2, dt = 0.5, zeta = 0 -> s = 3
    CHECK(std::abs(cq_delta(CQScheme::BDF2, 0.0) / 0.5 - 3.0) == 0.0);
    for (const auto& node : cq_nodes(g, cfg)) CHECK(node.sigma > 0.0);
    cfg.scheme = CQScheme::BDF2;
    for (const auto& node : cq_nodes(g, cfg)) CHECK(node.sigma > 0.0);
}

TEST_CASE("identity symbol reproduces the input") {
    TimeGrid g = make_time_grid(0.1, 40);
    CQConfig cfg;
    Signal data = smooth_causal(g, 10);
    Signal out = cq_convolve_scalar([](const LaplacePoint&) { return cplx(1.0); }, g, cfg, data);
    CHECK((out.samples - data.samples).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("BDF1 of 1/s is the running backward-Euler sum") {
    TimeGrid g = make_time_grid(0.125, 64);
    CQConfig cfg;
    cfg.scheme = CQScheme::BDF1;
    Signal data = smooth_causal(g, 16);
    Signal out =
        cq_convolve_scalar([](const LaplacePoint& s) { return 1.0 / s.s; }, g, cfg, data);
    cplx acc = 0;
    for (int n = 0; n <= g.n_steps; ++n) {
        acc += g.dt * data.samples(0, n);
        CHECK(std::abs(out.samples(0, n) - acc) <= 1e-12);
    }
}

TEST_CASE("BDF1 of s is the backward difference") {
    TimeGrid g = make_time_grid(0.125, 64);
    CQConfig cfg;
    cfg.scheme = CQScheme::BDF1;
    Signal data = smooth_causal(g, 16);
    Signal out = cq_convolve_scalar([](const LaplacePoint& s) { return s.s; }, g, cfg, data);
    for (int n = 1; n <= g.n_steps; ++n) {
        const cplx want = (data.samples(0, n) - data.samples(0, n - 1)) / g.dt;
        CHECK(std::abs(out.samples(0, n) - want) <= 1e-10);
    }
}

TEST_CASE("output is exactly zero before the data onset") {
    TimeGrid g = make_time_grid(0.1, 32);
    CQConfig cfg;
    Signal data = smooth_causal(g, 8);
    Signal out =
        cq_convolve_scalar([](const LaplacePoint& s) { return 1.0 / (1.0 + s.s); }, g, cfg, data);
    for (int n = 0; n < 8; ++n) CHECK(std::abs(out.samples(0, n)) == 0.0);
    CHECK_THROWS_AS(
        [&] {
            Signal bad = data;
            bad.onset = 12; // claims causality it does not have
            cq_convolve_scalar([](const LaplacePoint& s) { return s.s; }, g, cfg, bad);
        }(),
        DomainError);
}

TEST_CASE("convolution commutes with time shifts") {
    TimeGrid g = make_time_grid(0.1, 48);
    CQConfig cfg;
    auto symbol = [](const LaplacePoint& s) { return std::exp(-0.6 * s.s) / (1.0 + s.s); };
    Signal a = smooth_causal(g, 8);
    Signal b = make_signal(1, g.n_steps + 1, 13);
    for (int n = 13; n <= g.n_steps; ++n) b.samples(0, n) = a.samples(0, n - 5);
    Signal outa = cq_convolve_scalar(symbol, g, cfg, a);
    Signal outb = cq_convolve_scalar(symbol, g, cfg, b);
    double peak = outa.samples.cwiseAbs().maxCoeff();
    for (int n = 5; n <= g.n_steps; ++n)
        CHECK(std::abs(outb.samples(0, n) - outa.samples(0, n - 5)) <= 1e-11 * peak);
    for (int n = 0; n < 13; ++n) CHECK(std::abs(outb.samples(0, n)) <= 1e-12 * peak);
}

TEST_CASE("BDF2 unit delay converges with order at least two") {
    // A(s) = e^{-s}: output should be the input delayed by 1 time unit.
    // Polynomial onset keeps the spectrum tight enough to see the full order.
    auto run = [](int n_steps) {
        TimeGrid g = make_time_grid(3.0 / n_steps, n_steps);
        CQConfig cfg;
        Signal data = make_signal(1, g.n_steps + 1, n_steps / 6);
        for (int n = n_steps / 6; n <= g.n_steps; ++n) {
            const double x = (n - n_steps / 6) * g.dt;
            data.samples(0, n) = std::pow(x, 6) * std::exp(-2.0 * x);
        }
        Signal out =
            cq_convolve_scalar([](const LaplacePoint& s) { return std::exp(-s.s); }, g, cfg, data);
        const int delay = static_cast<int>(std::round(1.0 / g.dt));
        double err = 0;
        for (int n = 0; n <= g.n_steps; ++n) {
            const cplx want = n >= delay ? data.samples(0, n - delay) : cplx(0);
            err = std::max(err, std::abs(out.samples(0, n) - want));
        }
        return err;
    };
    const double e1 = run(96), e2 = run(192);
    const double order = std::log2(e1 / e2);
    // exact asymptotic order is 2, approached from below
    CHECK(order >= 1.9);
}

TEST_CASE("P2 on closed forms") {
    std::vector<double> times = {0.5, 1.0, 2.0, 3.5};
    // g = t^2 -> t^2 + 4t + 2
    auto out = p2_signal([](double t) { return t * t; }, [](double t) { return 2 * t; },
                         [](double) { return 2.0; }, times);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(out[i] == doctest::Approx(times[i] * times[i] + 4 * times[i] + 2).epsilon(1e-15));
    // g = e^t -> 4 e^t
    auto oute = p2_signal([](double t) { return std::exp(t); }, [](double t) { return std::exp(t); },
                          [](double t) { return std::exp(t); }, times);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(oute[i] == doctest::Approx(4 * std::exp(times[i])).epsilon(1e-15));
}

TEST_CASE("P2 on samples: spline differentiation of a sine") {
    const double dt = 5e-4;
    const int n = static_cast<int>(2.0 / dt);
    std::vector<double> samples(n);
    for (int i = 0; i < n; ++i) samples[i] = std::sin(i * dt);
    auto out = p2_signal_sampled(samples, dt);
    double worst = 0;
    for (int i = 2; i < n - 2; ++i) {
        const double t = i * dt;
        const double want = std::sin(t) + 2 * std::cos(t) - std::sin(t);
        worst = std::max(worst, std::abs(out[i] - want));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("C_eps values") {
    CHECK(c_eps(1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(c_eps(0.5, 0.0) == 0.0);
    CHECK(c_eps(1.0, 1e9) == doctest::Approx(0.5).epsilon(1e-8));
    for (double t : {0.3, 2.0}) {
        const double want = t / (2.0 * (1.0 + t));
        CHECK(c_eps(1.0, t) == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK_THROWS_AS(c_eps(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(c_eps(1.5, 1.0), DomainError);
    CHECK_THROWS_AS(c_eps(0.5, -1.0), DomainError);
}

TEST_CASE("signal csv round trip") {
    TimeGrid g = make_time_grid(0.25, 8);
    Signal s = make_signal(2, 9, 3);
    for (int n = 3; n <= 8; ++n) {
        s.samples(0, n) = cplx(n * 0.5, -n);
        s.samples(1, n) = cplx(1, n * 0.25);
    }
    int steps = 0;
    double dt = 0;
    Signal back = signal_from_csv(signal_to_csv(s, g), &steps, &dt);
    CHECK(steps == 8);
    CHECK(dt == doctest::Approx(0.25));
    CHECK(back.onset == 3);
    CHECK((back.samples - s.samples).cwiseAbs().maxCoeff() == 0.0);
}

TEST_SUITE_END();
