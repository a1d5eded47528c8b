#pragma once

// Identification excitation: a multisine with log-spaced frequencies across
// the local-oscillation band, normalized so its peak over the control-sample
// grid equals the configured amplitude.

#include <cmath>
#include <numbers>
#include <vector>

#include "swingbench/config.hpp"
#include "swingbench/rng.hpp"

namespace swingbench {

class Multisine {
public:
    Multisine(const ExcitationConfig& cfg, double h_c) : cfg_(cfg) {
        cfg.validate();
        freqs_.resize(cfg.n_sines);
        phases_.resize(cfg.n_sines);
        const double lf0 = std::log(cfg.f_min);
        const double lf1 = std::log(cfg.f_max);
        for (int i = 0; i < cfg.n_sines; ++i) {
            const double frac = cfg.n_sines == 1 ? 0.0
                                                 : static_cast<double>(i) / (cfg.n_sines - 1);
            freqs_[i] = std::exp(lf0 + frac * (lf1 - lf0));
        }
        Rng rng(cfg.seed);
        for (double& p : phases_) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
        // normalize the raw sum's peak over the sampled grid to the amplitude
        double peak = 0.0;
        for (double t = 0.0; t <= cfg.duration + h_c / 2; t += h_c)
            peak = std::max(peak, std::abs(raw(t)));
        scale_ = peak > 0 ? cfg.amplitude / peak : 0.0;
    }

    double operator()(double t) const { return scale_ * raw(t); }

    const std::vector<double>& frequencies() const { return freqs_; }
    const ExcitationConfig& config() const { return cfg_; }

private:
    double raw(double t) const {
        double s = 0.0;
        for (std::size_t i = 0; i < freqs_.size(); ++i)
            s += std::sin(2.0 * std::numbers::pi * freqs_[i] * t + phases_[i]);
        return s;
    }

    ExcitationConfig cfg_;
    std::vector<double> freqs_;
    std::vector<double> phases_;
    double scale_ = 1.0;
};

} // namespace swingbench
