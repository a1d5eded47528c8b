#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "swingbench/cpss.hpp"
#include "swingbench/rng.hpp"

using namespace swingbench;

TEST_CASE("tustin: equal time constants give a pass-through") {
    const BiquadCoeffs c = tustin_first_order(1.0, 0.08, 1.0, 0.08, 0.01);
    // y[k] = b0 x[k] + b1 x[k-1] - a1 y[k-1] must reproduce x exactly
    double y_prev = 0.0, x_prev = 0.0;
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
        const double x = rng.uniform(-1.0, 1.0);
        const double y = c.b0 * x + c.b1 * x_prev - c.a1 * y_prev;
        CHECK(y == Catch::Approx(x).margin(1e-12));
        x_prev = x;
        y_prev = y;
    }
}

TEST_CASE("tustin: washout has exactly zero DC gain") {
    const BiquadCoeffs c = tustin_first_order(0.0, 10.0, 1.0, 10.0, 0.01);
    // DC gain = (b0 + b1) / (1 + a1)
    CHECK(c.b0 + c.b1 == 0.0);
}

TEST_CASE("tustin: coefficients match the hand-applied bilinear formula") {
    // (1 + 0.08 s)/(1 + 0.02 s), s <- 2(z-1)/(0.01 (z+1)), k = 200:
    // b0 = (1 + 0.08*200)/(1 + 0.02*200) = 17/5, b1 = (1-16)/5, a1 = (1-4)/5
    const BiquadCoeffs c = tustin_first_order(1.0, 0.08, 1.0, 0.02, 0.01);
    CHECK(c.b0 == Catch::Approx(17.0 / 5.0).margin(1e-15));
    CHECK(c.b1 == Catch::Approx(-3.0).margin(1e-15));
    CHECK(c.a1 == Catch::Approx(-0.6).margin(1e-15));
}

TEST_CASE("tustin rejects degenerate sections") {
    CHECK_THROWS(tustin_first_order(1.0, 0.08, 1.0, 0.0, 0.01));
    CHECK_THROWS(tustin_first_order(1.0, 0.08, 1.0, -0.02, 0.01));
    CHECK_THROWS(tustin_first_order(1.0, 0.08, 1.0, 0.02, 0.0));
}

TEST_CASE("zero input gives zero output forever") {
    Cpss cpss(CpssParams{});
    CpssState st = cpss.reset();
    for (int k = 0; k < 1000; ++k) CHECK(cpss.step(st, 0.0) == 0.0);
}

TEST_CASE("washout rejects a constant input") {
    CpssParams p;
    Cpss cpss(p);
    CpssState st = cpss.reset();
    const double c = 1e-3;
    double u = 0.0;
    // the washout transient decays as exp(-t/Tw); 20 time constants push it
    // far below the 1e-6 relative floor
    const long n = std::lround(20.0 * p.tw / p.h_c);
    for (long k = 0; k < n; ++k) u = cpss.step(st, c);
    CHECK(std::abs(u) < 1e-6 * p.k_gain * c);
}

namespace {

// Continuous-time cascade integrated at a step 1000x finer than h_c; an
// independent oracle for the discrete filters.
struct ContinuousCascade {
    CpssParams p;
    double x_wo = 0.0, x_ll1 = 0.0, x_ll2 = 0.0;

    // washout output y = u - x_wo; lead-lag y = (Tn/Td) u + (1 - Tn/Td) x
    double output(double u) const {
        const double y0 = u - x_wo;
        const double y1 = (p.t1 / p.t2) * y0 + (1.0 - p.t1 / p.t2) * x_ll1;
        const double y2 = (p.t3 / p.t4) * y1 + (1.0 - p.t3 / p.t4) * x_ll2;
        return p.k_gain * y2;
    }

    void advance(double u, double h) {
        auto rates = [&](double a, double b, double c_) {
            const double y0 = u - a;
            const double y1 = (p.t1 / p.t2) * y0 + (1.0 - p.t1 / p.t2) * b;
            return std::array<double, 3>{(u - a) / p.tw, (y0 - b) / p.t2,
                                         (y1 - c_) / p.t4};
        };
        const auto k1 = rates(x_wo, x_ll1, x_ll2);
        const auto k2 = rates(x_wo + h / 2 * k1[0], x_ll1 + h / 2 * k1[1],
                              x_ll2 + h / 2 * k1[2]);
        const auto k3 = rates(x_wo + h / 2 * k2[0], x_ll1 + h / 2 * k2[1],
                              x_ll2 + h / 2 * k2[2]);
        const auto k4 = rates(x_wo + h * k3[0], x_ll1 + h * k3[1], x_ll2 + h * k3[2]);
        x_wo += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        x_ll1 += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        x_ll2 += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
    }
};

} // namespace

TEST_CASE("step response matches the continuous cascade") {
    CpssParams p;
    const double c = 1e-4; // small enough that nothing saturates
    Cpss cpss(p);
    CpssState st = cpss.reset();
    ContinuousCascade ref{p};
    const double h_fine = p.h_c / 1000.0;
    double peak = 0.0;
    std::vector<double> discrete, continuous;
    for (int k = 0; k * p.h_c <= 1.0 + 1e-12; ++k) {
        discrete.push_back(cpss.step(st, c));
        continuous.push_back(ref.output(c));
        peak = std::max(peak, std::abs(continuous.back()));
        for (int i = 0; i < 1000; ++i) ref.advance(c, h_fine);
    }
    REQUIRE(peak > 0.0);
    // Tustin averages across the t=0 discontinuity, so the first few samples
    // straddle the continuous jump; the mismatch decays with the fast lead-lag
    // pole (T2 = 20 ms) and is within 2% of the peak from sample 5 on.
    for (std::size_t k = 5; k < discrete.size(); ++k) {
        INFO("sample " << k);
        CHECK(std::abs(discrete[k] - continuous[k]) < 0.02 * peak);
    }
}

TEST_CASE("output is clamped to u_max for any input") {
    CpssParams p;
    Cpss cpss(p);
    CpssState st = cpss.reset();
    Rng rng(17);
    for (int k = 0; k < 5000; ++k) {
        const double u = cpss.step(st, rng.uniform(-0.5, 0.5));
        CHECK(std::abs(u) <= p.u_max);
    }
}

TEST_CASE("linear below saturation") {
    CpssParams p;
    Cpss c1(p), c2(p);
    CpssState s1 = c1.reset(), s2 = c2.reset();
    Rng rng(23);
    const double a = 3.0;
    for (int k = 0; k < 500; ++k) {
        const double x = rng.uniform(-1e-5, 1e-5);
        const double y1 = c1.step(s1, x);
        const double y2 = c2.step(s2, a * x);
        CHECK(y2 == Catch::Approx(a * y1).margin(1e-12));
    }
}

TEST_CASE("lead-lag pair provides phase lead at 1 Hz") {
    CpssParams p;
    const BiquadCoeffs ll1 = tustin_first_order(1.0, p.t1, 1.0, p.t2, p.h_c);
    const BiquadCoeffs ll2 = tustin_first_order(1.0, p.t3, 1.0, p.t4, p.h_c);
    const std::complex<double> z =
        std::exp(std::complex<double>(0.0, 2.0 * std::numbers::pi * 1.0 * p.h_c));
    auto freq = [&](const BiquadCoeffs& c) {
        return (c.b0 + c.b1 / z) / (1.0 + c.a1 / z);
    };
    const double phase = std::arg(freq(ll1) * freq(ll2));
    CHECK(phase > 0.0);
}

TEST_CASE("reset returns to the zero-state trajectory") {
    CpssParams p;
    Cpss cpss(p);
    CpssState st = cpss.reset();
    CpssState st2 = cpss.reset();
    CHECK(st.x == st2.x);
    CHECK(st.y == st2.y);
    // saturate, reset, then compare against a fresh instance
    for (int k = 0; k < 100; ++k) cpss.step(st, 0.5);
    st = cpss.reset();
    Cpss fresh(p);
    CpssState stf = fresh.reset();
    Rng rng(29);
    for (int k = 0; k < 200; ++k) {
        const double x = rng.uniform(-1e-4, 1e-4);
        CHECK(cpss.step(st, x) == fresh.step(stf, x));
    }
}

TEST_CASE("params validation") {
    CpssParams p;
    p.h_c = 0.1; // too slow for t2 = t4 = 0.02 poles
    CHECK_THROWS(p.validate());
}
