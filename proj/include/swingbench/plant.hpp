#pragma once

// One-axis (flux-decay) synchronous machine behind an external reactance to
// an infinite bus, with a first-order static exciter. Four states:
// rotor angle delta [rad], speed omega [p.u.], transient EMF eqp [p.u.],
// field voltage efd [p.u.].

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "swingbench/format.hpp"

namespace swingbench {

struct GeneratorParams {
    double h_inertia = 3.5;   // H [s]
    double d_damping = 3.0;   // D [p.u. torque / p.u. speed]
    double xd = 1.81;         // d-axis synchronous reactance [p.u.]
    double xdp = 0.3;         // d-axis transient reactance [p.u.]
    double xq = 1.76;         // q-axis synchronous reactance [p.u.]
    double td0p = 8.0;        // open-circuit transient time constant [s]
    double ka = 200.0;        // exciter gain
    double ta = 0.02;         // exciter time constant [s]
    double efd_min = -6.0;
    double efd_max = 6.0;
    double omega_base = 2.0 * std::numbers::pi * 50.0; // [rad/s]

    void validate() const {
        if (!(h_inertia > 0)) throw std::invalid_argument("h_inertia must be > 0");
        if (!(td0p > 0)) throw std::invalid_argument("td0p must be > 0");
        if (!(ta > 0)) throw std::invalid_argument("ta must be > 0");
        if (!(xdp > 0 && xdp < xd)) throw std::invalid_argument("need 0 < xdp < xd");
        if (!(xq > 0)) throw std::invalid_argument("xq must be > 0");
        if (!(efd_min < efd_max)) throw std::invalid_argument("efd_min must be < efd_max");
        if (!(omega_base > 0)) throw std::invalid_argument("omega_base must be > 0");
    }
};

struct NetworkParams {
    double xe = 0.5;       // external (line) reactance [p.u.]
    double v_inf = 1.0;    // infinite-bus voltage [p.u.]
    double v_fault = 0.7;  // retained bus voltage during a fault [p.u.]

    void validate() const {
        if (!(xe > 0)) throw std::invalid_argument("xe must be > 0");
        if (!(v_inf > 0)) throw std::invalid_argument("v_inf must be > 0");
        if (!(v_fault >= 0 && v_fault < v_inf))
            throw std::invalid_argument("need 0 <= v_fault < v_inf");
    }
};

struct PlantState {
    double delta = 0.0;
    double omega = 1.0;
    double eqp = 1.0;
    double efd = 1.0;

    bool finite() const {
        return std::isfinite(delta) && std::isfinite(omega) &&
               std::isfinite(eqp) && std::isfinite(efd);
    }
};

struct PlantInputs {
    double pm = 0.0;    // mechanical power [p.u.]
    double vref = 1.0;  // AVR reference [p.u.]
    double upss = 0.0;  // stabilizer signal [p.u.]
};

struct AlgebraicOutputs {
    double id_cur = 0.0;
    double iq_cur = 0.0;
    double pe = 0.0;
    double vt = 0.0;
};

inline AlgebraicOutputs algebraic_outputs(const PlantState& s,
                                          const GeneratorParams& gp,
                                          const NetworkParams& np,
                                          double v_bus) {
    if (!s.finite())
        throw std::runtime_error("algebraic_outputs: non-finite plant state");
    if (!(v_bus >= 0))
        throw std::runtime_error("algebraic_outputs: negative bus voltage");
    AlgebraicOutputs out;
    out.id_cur = (s.eqp - v_bus * std::cos(s.delta)) / (gp.xdp + np.xe);
    out.iq_cur = v_bus * std::sin(s.delta) / (gp.xq + np.xe);
    out.pe = s.eqp * out.iq_cur + (gp.xq - gp.xdp) * out.id_cur * out.iq_cur;
    const double vq = s.eqp - gp.xdp * out.id_cur;
    const double vd = gp.xq * out.iq_cur;
    out.vt = std::hypot(vd, vq);
    return out;
}

struct PlantRates {
    double d_delta = 0.0;
    double d_omega = 0.0;
    double d_eqp = 0.0;
    double d_efd = 0.0;
};

inline PlantRates derivatives(const PlantState& s, const PlantInputs& in,
                              const GeneratorParams& gp, const NetworkParams& np,
                              double v_bus) {
    const AlgebraicOutputs alg = algebraic_outputs(s, gp, np, v_bus);
    PlantRates r;
    r.d_delta = gp.omega_base * (s.omega - 1.0);
    r.d_omega = (in.pm - alg.pe - gp.d_damping * (s.omega - 1.0)) / (2.0 * gp.h_inertia);
    r.d_eqp = (s.efd - s.eqp - (gp.xd - gp.xdp) * alg.id_cur) / gp.td0p;
    r.d_efd = (gp.ka * (in.vref - alg.vt + in.upss) - s.efd) / gp.ta;
    // Anti-windup: hold the field voltage when clamped and pushing outward.
    if ((s.efd >= gp.efd_max && r.d_efd > 0) || (s.efd <= gp.efd_min && r.d_efd < 0))
        r.d_efd = 0.0;
    return r;
}

inline PlantState rk4_step(const PlantState& s, const PlantInputs& in,
                           const GeneratorParams& gp, const NetworkParams& np,
                           double v_bus, double h) {
    if (!(h > 0)) throw std::invalid_argument("rk4_step: h must be > 0");
    auto advance = [](const PlantState& base, const PlantRates& r, double dt) {
        PlantState n = base;
        n.delta += dt * r.d_delta;
        n.omega += dt * r.d_omega;
        n.eqp += dt * r.d_eqp;
        n.efd += dt * r.d_efd;
        return n;
    };
    const PlantRates k1 = derivatives(s, in, gp, np, v_bus);
    const PlantRates k2 = derivatives(advance(s, k1, h / 2), in, gp, np, v_bus);
    const PlantRates k3 = derivatives(advance(s, k2, h / 2), in, gp, np, v_bus);
    const PlantRates k4 = derivatives(advance(s, k3, h), in, gp, np, v_bus);
    PlantState next = s;
    next.delta += h / 6 * (k1.d_delta + 2 * k2.d_delta + 2 * k3.d_delta + k4.d_delta);
    next.omega += h / 6 * (k1.d_omega + 2 * k2.d_omega + 2 * k3.d_omega + k4.d_omega);
    next.eqp += h / 6 * (k1.d_eqp + 2 * k2.d_eqp + 2 * k3.d_eqp + k4.d_eqp);
    next.efd += h / 6 * (k1.d_efd + 2 * k2.d_efd + 2 * k3.d_efd + k4.d_efd);
    if (next.efd > gp.efd_max) next.efd = gp.efd_max;
    if (next.efd < gp.efd_min) next.efd = gp.efd_min;
    if (!next.finite())
        throw std::runtime_error("rk4_step: state became non-finite");
    return next;
}

struct Equilibrium {
    PlantState state;
    PlantInputs inputs;
};

/// Solves for the steady state delivering electrical power pe0 at terminal
/// voltage vt0, then backs out the field voltage and AVR reference.
/// Newton iteration on (delta, eqp) with residuals (pe - pe0, vt - vt0).
inline Equilibrium init_equilibrium(const GeneratorParams& gp, const NetworkParams& np,
                                    double pe0, double vt0) {
    if (!(vt0 > 0)) throw std::invalid_argument("init_equilibrium: vt0 must be > 0");
    double delta = 0.5;
    double eqp = 1.0;
    const double tol = 1e-10;
    const int max_iter = 50;
    auto residual = [&](double d, double e, double& r0, double& r1) {
        PlantState s;
        s.delta = d;
        s.eqp = e;
        const AlgebraicOutputs alg = algebraic_outputs(s, gp, np, np.v_inf);
        r0 = alg.pe - pe0;
        r1 = alg.vt - vt0;
    };
    bool converged = false;
    double r0 = 0.0, r1 = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        residual(delta, eqp, r0, r1);
        if (std::abs(r0) < tol && std::abs(r1) < tol) {
            converged = true;
            break;
        }
        const double eps = 1e-8;
        double r0d, r1d, r0e, r1e;
        residual(delta + eps, eqp, r0d, r1d);
        residual(delta, eqp + eps, r0e, r1e);
        const double j00 = (r0d - r0) / eps, j01 = (r0e - r0) / eps;
        const double j10 = (r1d - r1) / eps, j11 = (r1e - r1) / eps;
        const double det = j00 * j11 - j01 * j10;
        if (!(std::abs(det) > 1e-14))
            throw std::runtime_error("init_equilibrium: singular Jacobian");
        delta -= (j11 * r0 - j01 * r1) / det;
        eqp -= (-j10 * r0 + j00 * r1) / det;
        if (!std::isfinite(delta) || !std::isfinite(eqp))
            throw std::runtime_error("init_equilibrium: Newton diverged");
    }
    if (!converged) {
        const double norm = std::hypot(r0, r1);
        throw std::runtime_error(
            "init_equilibrium: Newton did not converge, residual norm " +
            format_double(norm));
    }
    Equilibrium eq;
    eq.state.delta = delta;
    eq.state.omega = 1.0;
    eq.state.eqp = eqp;
    const AlgebraicOutputs alg = algebraic_outputs(eq.state, gp, np, np.v_inf);
    eq.state.efd = eqp + (gp.xd - gp.xdp) * alg.id_cur;
    if (eq.state.efd < gp.efd_min || eq.state.efd > gp.efd_max)
        throw std::runtime_error("init_equilibrium: operating point needs efd outside limits");
    eq.inputs.pm = pe0;
    eq.inputs.vref = vt0 + eq.state.efd / gp.ka;
    eq.inputs.upss = 0.0;
    return eq;
}

} // namespace swingbench
