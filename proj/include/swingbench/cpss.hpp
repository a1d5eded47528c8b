#pragma once

// Conventional power system stabilizer: gain, washout, two lead-lag stages,
// output limiter. Runs as discrete-time first-order sections at the
// stabilizer sample period (bilinear transform, no prewarping).

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace swingbench {

struct CpssParams {
    double k_gain = 15.0;
    double tw = 10.0;   // washout time constant [s]
    double t1 = 0.08;   // lead-lag 1 numerator [s]
    double t2 = 0.02;   // lead-lag 1 denominator [s]
    double t3 = 0.08;   // lead-lag 2 numerator [s]
    double t4 = 0.02;   // lead-lag 2 denominator [s]
    double u_max = 0.1; // output limit [p.u.]
    double h_c = 0.01;  // sample period [s]

    void validate() const {
        if (!(tw > 0 && t1 > 0 && t2 > 0 && t3 > 0 && t4 > 0))
            throw std::invalid_argument("cpss time constants must be > 0");
        if (!(u_max > 0)) throw std::invalid_argument("u_max must be > 0");
        if (!(h_c > 0)) throw std::invalid_argument("h_c must be > 0");
        if (!(h_c < 2.0 * std::min(t2, t4)))
            throw std::invalid_argument("h_c too large for lead-lag poles");
    }
};

/// Discrete first-order section y[k] = b0*x[k] + b1*x[k-1] - a1*y[k-1].
struct BiquadCoeffs {
    double b0 = 0.0;
    double b1 = 0.0;
    double a1 = 0.0;
};

/// Bilinear transform of (b0_c + b1_c s) / (a0_c + a1_c s) with
/// s <- 2(z-1)/(h_c (z+1)).
inline BiquadCoeffs tustin_first_order(double b0_c, double b1_c,
                                       double a0_c, double a1_c, double h_c) {
    if (!(a1_c > 0))
        throw std::invalid_argument("tustin_first_order: unstable or degenerate section");
    if (!(h_c > 0)) throw std::invalid_argument("tustin_first_order: h_c must be > 0");
    const double k = 2.0 / h_c;
    const double den = a0_c + a1_c * k;
    if (std::abs(den) < 1e-300)
        throw std::invalid_argument("tustin_first_order: degenerate denominator");
    BiquadCoeffs c;
    c.b0 = (b0_c + b1_c * k) / den;
    c.b1 = (b0_c - b1_c * k) / den;
    c.a1 = (a0_c - a1_c * k) / den;
    return c;
}

struct CpssState {
    std::array<double, 3> y{}; // previous output of each section
    std::array<double, 3> x{}; // previous input of each section
};

class Cpss {
public:
    explicit Cpss(const CpssParams& p) : params_(p) {
        p.validate();
        sections_[0] = tustin_first_order(0.0, p.tw, 1.0, p.tw, p.h_c); // washout
        sections_[1] = tustin_first_order(1.0, p.t1, 1.0, p.t2, p.h_c);
        sections_[2] = tustin_first_order(1.0, p.t3, 1.0, p.t4, p.h_c);
    }

    const CpssParams& params() const { return params_; }

    CpssState reset() const { return CpssState{}; }

    /// One sample of the cascade: washout -> lead-lag -> lead-lag -> gain -> clamp.
    double step(CpssState& st, double d_omega) const {
        double v = d_omega;
        for (int i = 0; i < 3; ++i) {
            const BiquadCoeffs& c = sections_[i];
            const double y = c.b0 * v + c.b1 * st.x[i] - c.a1 * st.y[i];
            st.x[i] = v;
            st.y[i] = y;
            v = y;
        }
        return std::clamp(params_.k_gain * v, -params_.u_max, params_.u_max);
    }

private:
    CpssParams params_;
    std::array<BiquadCoeffs, 3> sections_;
};

} // namespace swingbench
