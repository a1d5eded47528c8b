#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "swingbench/plant.hpp"
#include "swingbench/scenario.hpp"
#include "swingbench/sim.hpp"

using namespace swingbench;

TEST_CASE("algebraic outputs: zero angle gives zero power") {
    GeneratorParams gp;
    NetworkParams np;
    PlantState s;
    s.delta = 0.0;
    s.eqp = 1.0;
    const AlgebraicOutputs out = algebraic_outputs(s, gp, np, 1.0);
    CHECK(out.iq_cur == 0.0);
    CHECK(out.pe == 0.0);
}

TEST_CASE("algebraic outputs: bolted fault zeroes quadrature current") {
    GeneratorParams gp;
    NetworkParams np;
    gp.xdp = 0.3;
    np.xe = 0.2; // xdp + xe = 0.5
    PlantState s;
    s.delta = 0.3;
    s.eqp = 1.0;
    const AlgebraicOutputs out = algebraic_outputs(s, gp, np, 0.0);
    CHECK(out.id_cur == Catch::Approx(2.0));
    CHECK(out.iq_cur == 0.0);
    CHECK(out.pe == 0.0);
}

TEST_CASE("algebraic outputs: hand evaluation at delta = pi/2") {
    GeneratorParams gp;
    gp.xdp = 0.3;
    gp.xq = 0.3;
    gp.xd = 1.0;
    NetworkParams np;
    np.xe = 0.2; // xdp + xe = xq + xe = 0.5
    PlantState s;
    s.delta = std::numbers::pi / 2;
    s.eqp = 1.0;
    const AlgebraicOutputs out = algebraic_outputs(s, gp, np, 1.0);
    CHECK(out.id_cur == Catch::Approx(2.0).margin(1e-12));
    CHECK(out.iq_cur == Catch::Approx(2.0).margin(1e-12));
    CHECK(out.pe == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("algebraic outputs reject non-finite state") {
    GeneratorParams gp;
    NetworkParams np;
    PlantState s;
    s.delta = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(algebraic_outputs(s, gp, np, 1.0));
}

TEST_CASE("derivatives vanish at the solved equilibrium") {
    GeneratorParams gp;
    NetworkParams np;
    const Equilibrium eq = init_equilibrium(gp, np, 0.8, 1.0);
    const PlantRates r = derivatives(eq.state, eq.inputs, gp, np, np.v_inf);
    CHECK(std::abs(r.d_delta) < 1e-9);
    CHECK(std::abs(r.d_omega) < 1e-9);
    CHECK(std::abs(r.d_eqp) < 1e-9);
    CHECK(std::abs(r.d_efd) < 1e-9);
}

TEST_CASE("rotor angle rate is the speed deviation times omega_base") {
    GeneratorParams gp;
    gp.d_damping = 0.0;
    NetworkParams np;
    const Equilibrium eq = init_equilibrium(gp, np, 0.8, 1.0);
    PlantState s = eq.state;
    s.omega = 1.01;
    const PlantRates r = derivatives(s, eq.inputs, gp, np, np.v_inf);
    CHECK(r.d_delta == Catch::Approx(0.01 * gp.omega_base));
}

TEST_CASE("exciter rate follows the AVR error") {
    GeneratorParams gp; // ka = 200, ta = 0.02
    NetworkParams np;
    const Equilibrium eq = init_equilibrium(gp, np, 0.8, 1.0);
    PlantInputs in = eq.inputs;
    in.vref += 0.01;
    const PlantRates r = derivatives(eq.state, in, gp, np, np.v_inf);
    CHECK(r.d_efd == Catch::Approx(200.0 * 0.01 / 0.02).epsilon(1e-6));
}

TEST_CASE("anti-windup zeroes the field rate at the clamp") {
    GeneratorParams gp;
    NetworkParams np;
    const Equilibrium eq = init_equilibrium(gp, np, 0.8, 1.0);
    PlantState s = eq.state;
    s.efd = gp.efd_max;
    PlantInputs in = eq.inputs;
    in.vref += 1.0; // drives the rate hard positive
    const PlantRates r = derivatives(s, in, gp, np, np.v_inf);
    CHECK(r.d_efd == 0.0);
    in.vref -= 2.0; // now hard negative: the clamp must release
    const PlantRates r2 = derivatives(s, in, gp, np, np.v_inf);
    CHECK(r2.d_efd < 0.0);
}

TEST_CASE("rk4 leaves the equilibrium fixed") {
    GeneratorParams gp;
    NetworkParams np;
    const Equilibrium eq = init_equilibrium(gp, np, 0.8, 1.0);
    PlantState s = eq.state;
    for (int i = 0; i < 100; ++i) s = rk4_step(s, eq.inputs, gp, np, np.v_inf, 1e-3);
    CHECK(std::abs(s.delta - eq.state.delta) < 1e-12);
    CHECK(std::abs(s.omega - 1.0) < 1e-12);
    CHECK(std::abs(s.eqp - eq.state.eqp) < 1e-12);
    CHECK(std::abs(s.efd - eq.state.efd) < 1e-12);
}

TEST_CASE("rk4 rejects non-positive step") {
    GeneratorParams gp;
    NetworkParams np;
    PlantState s;
    PlantInputs in;
    CHECK_THROWS(rk4_step(s, in, gp, np, 1.0, 0.0));
}

namespace {

// Integrates 1 s of post-fault motion at step h and reports the final state
// distance from a much finer reference run.
double rk4_error_at(double h) {
    GeneratorParams gp;
    NetworkParams np;
    const Equilibrium eq = init_equilibrium(gp, np, 0.8, 1.0);
    auto run = [&](double step) {
        PlantState s = eq.state;
        s.omega = 1.002; // small kick
        const long n = std::lround(1.0 / step);
        for (long i = 0; i < n; ++i) s = rk4_step(s, eq.inputs, gp, np, np.v_inf, step);
        return s;
    };
    const PlantState ref = run(h / 16);
    const PlantState got = run(h);
    return std::sqrt(std::pow(got.delta - ref.delta, 2) +
                     std::pow(got.omega - ref.omega, 2) +
                     std::pow(got.eqp - ref.eqp, 2) +
                     std::pow(got.efd - ref.efd, 2));
}

} // namespace

TEST_CASE("rk4 shows 4th-order convergence") {
    const double e_coarse = rk4_error_at(2e-3);
    const double e_fine = rk4_error_at(1e-3);
    REQUIRE(e_fine > 0.0);
    const double ratio = e_coarse / e_fine;
    INFO("convergence ratio " << ratio);
    CHECK(ratio >= 8.0);
    CHECK(ratio <= 32.0);
}

TEST_CASE("init_equilibrium: zero power means zero angle for a round rotor") {
    GeneratorParams gp;
    gp.xq = gp.xdp; // symmetric: no reluctance power
    NetworkParams np;
    const Equilibrium eq = init_equilibrium(gp, np, 0.0, 1.0);
    CHECK(std::abs(eq.state.delta) < 1e-8);
    const AlgebraicOutputs alg = algebraic_outputs(eq.state, gp, np, np.v_inf);
    CHECK(alg.vt == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("init_equilibrium satisfies its own residuals and holds for 10 s") {
    GeneratorParams gp;
    NetworkParams np;
    const Equilibrium eq = init_equilibrium(gp, np, 0.8, 1.0);
    const AlgebraicOutputs alg = algebraic_outputs(eq.state, gp, np, np.v_inf);
    CHECK(std::abs(alg.pe - 0.8) < 1e-10);
    CHECK(std::abs(alg.vt - 1.0) < 1e-10);

    Scenario sc;
    sc.name = "flat";
    sc.pe0 = 0.8;
    sc.t_end = 10.0;
    SimTiming timing;
    const TimeSeries ts = simulate(gp, np, timing, sc, no_control);
    double max_dw = 0.0, max_dd = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        max_dw = std::max(max_dw, std::abs(ts.omega[i] - 1.0));
        max_dd = std::max(max_dd, std::abs(ts.delta[i] - ts.delta[0]));
    }
    CHECK(max_dw < 1e-9);
    CHECK(max_dd < 1e-9);
}

TEST_CASE("init_equilibrium fails loudly beyond the static power limit") {
    GeneratorParams gp;
    NetworkParams np;
    bool failed = false;
    for (double pe0 = 1.0; pe0 < 6.0; pe0 += 0.5) {
        try {
            init_equilibrium(gp, np, pe0, 1.0);
        } catch (const std::exception&) {
            failed = true;
            break;
        }
    }
    CHECK(failed);
}

TEST_CASE("bus_voltage applies fault windows start-inclusive end-exclusive") {
    NetworkParams np;
    std::vector<FaultEvent> faults = {{0.2, 0.5, -1.0}};
    CHECK(bus_voltage(np, 1.0, {}) == np.v_inf);
    CHECK(bus_voltage(np, 0.4, faults) == np.v_fault);
    CHECK(bus_voltage(np, 0.2, faults) == np.v_fault);
    CHECK(bus_voltage(np, 0.7000001, faults) == np.v_inf);
    faults[0].v_fault = 0.25; // per-event override
    CHECK(bus_voltage(np, 0.4, faults) == 0.25);
}

TEST_CASE("parameter validation rejects nonsense") {
    GeneratorParams gp;
    gp.xdp = 2.0; // > xd
    CHECK_THROWS(gp.validate());
    NetworkParams np;
    np.v_fault = 1.5; // >= v_inf
    CHECK_THROWS(np.validate());
}
