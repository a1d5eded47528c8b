#pragma once

// Small-signal analysis: numeric linearization of the 4-state plant at an
// operating point and the dominant oscillatory mode.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>
#include <stdexcept>

#include "swingbench/plant.hpp"

namespace swingbench {

/// Central-difference Jacobian of the open-loop (upss = 0) state derivatives
/// at the given state. Row/column order: delta, omega, eqp, efd.
inline Eigen::Matrix4d linearize(const PlantState& s0, const PlantInputs& in,
                                 const GeneratorParams& gp, const NetworkParams& np,
                                 double perturbation = 1e-6) {
    auto rates = [&](const PlantState& s) {
        const PlantRates r = derivatives(s, in, gp, np, np.v_inf);
        return Eigen::Vector4d(r.d_delta, r.d_omega, r.d_eqp, r.d_efd);
    };
    auto nudge = [](PlantState s, int i, double d) {
        switch (i) {
            case 0: s.delta += d; break;
            case 1: s.omega += d; break;
            case 2: s.eqp += d; break;
            default: s.efd += d; break;
        }
        return s;
    };
    Eigen::Matrix4d jac;
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector4d hi = rates(nudge(s0, i, perturbation));
        const Eigen::Vector4d lo = rates(nudge(s0, i, -perturbation));
        jac.col(i) = (hi - lo) / (2.0 * perturbation);
    }
    return jac;
}

struct DominantMode {
    double real = 0.0;    // [1/s]
    double imag = 0.0;    // [rad/s]
    double freq_hz = 0.0; // imag / 2 pi
};

/// The oscillatory eigenvalue pair with the largest real part.
inline DominantMode dominant_oscillatory_mode(const Eigen::Matrix4d& jac) {
    Eigen::EigenSolver<Eigen::Matrix4d> solver(jac);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dominant_oscillatory_mode: eigensolver failed");
    DominantMode best;
    bool found = false;
    for (int i = 0; i < 4; ++i) {
        const std::complex<double> ev = solver.eigenvalues()[i];
        if (ev.imag() <= 1e-9) continue;
        if (!found || ev.real() > best.real) {
            best.real = ev.real();
            best.imag = ev.imag();
            found = true;
        }
    }
    if (!found)
        throw std::runtime_error("dominant_oscillatory_mode: no oscillatory pair");
    best.freq_hz = best.imag / (2.0 * std::numbers::pi);
    return best;
}

} // namespace swingbench
