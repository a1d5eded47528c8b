#pragma once

// Fixed-step closed-loop simulation: the plant integrates at h, the
// stabilizer is sampled every h_c with zero-order hold in between.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "swingbench/config.hpp"
#include "swingbench/excitation.hpp"
#include "swingbench/plant.hpp"
#include "swingbench/scenario.hpp"
#include "swingbench/timeseries.hpp"

namespace swingbench {

/// Called once per control sample k at time t with the measured speed;
/// returns the stabilizer signal held until the next sample.
using ControlFn = std::function<double(long k, double t, double omega)>;

inline double no_control(long, double, double) { return 0.0; }

struct SimOptions {
    bool stop_on_desync = true; // truncate the trace when |delta| > pi
};

inline TimeSeries simulate(const GeneratorParams& gp, const NetworkParams& np,
                           const SimTiming& timing, const Scenario& sc,
                           const ControlFn& control,
                           const SimOptions& opts = {}) {
    gp.validate();
    np.validate();
    timing.validate();
    sc.validate();
    const Equilibrium eq = init_equilibrium(gp, np, sc.pe0, sc.vt0);
    PlantState state = eq.state;
    const double pm0 = eq.inputs.pm;
    const double vref = eq.inputs.vref;
    const int sub = timing.substeps();
    const long n_steps = std::lround(sc.t_end / timing.h);

    TimeSeries ts;
    ts.dt = timing.h_c;
    double upss = 0.0;
    for (long i = 0; i <= n_steps; ++i) {
        const double t = static_cast<double>(i) * timing.h;
        const double v_bus = bus_voltage(np, t, sc.faults);
        PlantInputs in;
        in.pm = mechanical_power(pm0, t, sc.load_steps);
        in.vref = vref;
        if (i % sub == 0) {
            const long k = i / sub;
            upss = control(k, t, state.omega);
            const AlgebraicOutputs alg = algebraic_outputs(state, gp, np, v_bus);
            ts.push(t, state.delta, state.omega, state.eqp, state.efd, alg.vt,
                    alg.pe, upss);
        }
        in.upss = upss;
        if (i == n_steps) break;
        state = rk4_step(state, in, gp, np, v_bus, timing.h);
        if (opts.stop_on_desync && std::abs(state.delta) > std::numbers::pi) {
            ts.truncated = true;
            break;
        }
    }
    return ts;
}

/// Drives the plant open loop with the multisine as the stabilizer signal
/// (CPSS disabled) to produce identifier training data.
inline TimeSeries generate_training_run(const GeneratorParams& gp,
                                        const NetworkParams& np,
                                        const SimTiming& timing,
                                        const ExcitationConfig& ex,
                                        double pe0 = 0.8, double vt0 = 1.0) {
    const Multisine sig(ex, timing.h_c);
    Scenario sc;
    sc.name = "excitation";
    sc.pe0 = pe0;
    sc.vt0 = vt0;
    sc.t_end = ex.duration;
    for (int i = 0; i < ex.n_faults; ++i) {
        FaultEvent f;
        f.t_start = ex.duration * (i + 0.5) / ex.n_faults;
        f.duration = ex.fault_duration;
        f.v_fault = ex.fault_v;
        sc.faults.push_back(f);
    }
    Rng dither_rng(ex.seed ^ 0xd1b54a32d192ed03ULL);
    TimeSeries ts = simulate(gp, np, timing, sc, [&](long, double t, double) {
        return sig(t) + dither_rng.uniform(-ex.dither, ex.dither);
    });
    if (ts.truncated)
        throw std::runtime_error(
            "excitation run lost synchronism; reduce excitation.amplitude");
    for (double w : ts.omega)
        if (std::abs(w - 1.0) >= 0.02)
            throw std::runtime_error(
                "excitation run exceeded |omega-1| < 0.02; reduce excitation.amplitude");
    return ts;
}

} // namespace swingbench
