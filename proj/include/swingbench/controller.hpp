#pragma once

// Neural controller: maps tapped speed deviations to the stabilizer signal
// through a tanh-bounded output stage. Trained in closed loop: the speed
// error predicted by the frozen identifier is back-propagated through the
// identifier (unrolled over a short horizon) to the stabilizer-signal
// inputs, then through the controller.

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "swingbench/config.hpp"
#include "swingbench/format.hpp"
#include "swingbench/identifier.hpp"
#include "swingbench/metrics.hpp"
#include "swingbench/mlp.hpp"
#include "swingbench/rng.hpp"
#include "swingbench/sim.hpp"
#include "swingbench/tapped.hpp"

namespace swingbench {

inline std::vector<LayerSpec> controller_layers(const ControllerConfig& cfg) {
    std::vector<LayerSpec> specs;
    int prev = cfg.n_c;
    for (int h : cfg.hidden) {
        specs.push_back({prev, h, Activation::Tanh});
        prev = h;
    }
    specs.push_back({prev, 1, Activation::Linear});
    return specs;
}

/// upss = u_max * tanh(raw controller output); strictly inside (-u_max, u_max).
inline double nc_output(const Mlp& nc, const std::vector<double>& speed_taps,
                        const ControllerConfig& cfg, double* raw_out = nullptr) {
    const double raw = forward(nc, speed_taps)[0];
    if (raw_out) *raw_out = raw;
    return cfg.u_max * std::tanh(raw);
}

/// dJ/du(k): forward the identifier, take the Eq-style one-step cost against
/// the desired speed, and back-propagate to the newest stabilizer tap.
inline double controller_input_error(const Mlp& ni, const TappedDelays& taps,
                                     const IdentifierConfig& cfg_id,
                                     const ControllerConfig& cfg_nc) {
    ForwardCache cache;
    const double y = forward(ni, taps.input_vector(), &cache)[0];
    const double omega_hat = 1.0 + y / cfg_id.scale_w;
    const double output_error = (omega_hat - cfg_nc.w_d) * cfg_id.scale_w;
    const GradientBundle g = backward(ni, cache, {output_error});
    return g.input_grad[0]; // newest u tap is first by layout
}

inline void accumulate_gradients(GradientBundle& acc, const GradientBundle& g) {
    if (acc.weight_grads.empty()) {
        acc = g;
        return;
    }
    for (std::size_t l = 0; l < acc.weight_grads.size(); ++l) {
        for (std::size_t j = 0; j < acc.weight_grads[l].size(); ++j)
            acc.weight_grads[l][j] += g.weight_grads[l][j];
        for (std::size_t j = 0; j < acc.bias_grads[l].size(); ++j)
            acc.bias_grads[l][j] += g.bias_grads[l][j];
    }
}

struct UnrollResult {
    GradientBundle grad;     // controller weight gradients, summed over copies
    double first_cost = 0.0; // one-step cost 1/2 e^2 at the real sample
};

/// Back-propagation through time over the frozen identifier. From the current
/// tap history (u(k) already applied), the identifier and the controller
/// policy are unrolled `cfg_nc.horizon` control steps; the cost is the sum of
/// 1/2 (scaled speed error)^2 along the prediction, and its gradient is
/// accumulated into the controller weights of every unrolled copy plus the
/// real step k. horizon = 1 reduces to the plain one-step rule. The unroll is
/// cut short if the prediction leaves the identifier's trust region.
///
/// `u_hist` / `w_hist` are newest-first; w values are pre-scaled. `u_hist`
/// needs n_u entries, `w_hist` max(n_w, n_c).
inline UnrollResult bptt_gradient(const Mlp& ni, const Mlp& nc,
                                  const std::vector<double>& u_hist,
                                  const std::vector<double>& w_hist,
                                  const ForwardCache& nc_cache_k, double raw_k,
                                  const IdentifierConfig& cfg_id,
                                  const ControllerConfig& cfg_nc) {
    const int n_u = cfg_id.n_u, n_w = cfg_id.n_w, n_c = cfg_nc.n_c;
    const int H = cfg_nc.horizon;
    const double target = (cfg_nc.w_d - 1.0) * cfg_id.scale_w;
    // Beyond the closed-loop divergence bound the identifier is extrapolating;
    // truncate rather than back-propagate through fiction.
    const double w_trust = 0.1 * cfg_id.scale_w;

    // Times are relative to the real sample k: uv[t] = u(k+t) for t >= 1,
    // wv[t] = scaled dw(k+t) for t >= 1; history covers t <= 0.
    std::vector<double> uv(H, 0.0), raws(H, 0.0), wv(H + 1, 0.0);
    uv[0] = u_hist[0];
    raws[0] = raw_k;
    auto get_u = [&](int t) { return t >= 1 ? uv[t] : u_hist[-t]; };
    auto get_w = [&](int t) {
        return t >= 1 ? wv[t] : w_hist[static_cast<std::size_t>(-t)];
    };
    std::vector<ForwardCache> ni_caches(H + 1), nc_caches(H);
    int h_eff = 0;
    for (int h = 1; h <= H; ++h) {
        std::vector<double> in;
        in.reserve(n_u + n_w);
        for (int j = 0; j < n_u; ++j) in.push_back(get_u(h - 1 - j));
        for (int j = 0; j < n_w; ++j) in.push_back(get_w(h - 1 - j));
        wv[h] = forward(ni, in, &ni_caches[h])[0];
        if (!std::isfinite(wv[h]) || std::abs(wv[h]) > w_trust) break;
        h_eff = h;
        if (h < H) {
            std::vector<double> cin;
            cin.reserve(n_c);
            for (int j = 0; j < n_c; ++j) cin.push_back(get_w(h - j));
            raws[h] = forward(nc, cin, &nc_caches[h])[0];
            uv[h] = cfg_nc.u_max * std::tanh(raws[h]);
        }
    }
    UnrollResult out;
    if (h_eff >= 1) {
        const double e1 = wv[1] - target;
        out.first_cost = 0.5 * e1 * e1;
    }
    std::vector<double> gw(h_eff + 1, 0.0), gu(h_eff, 0.0);
    for (int h = 1; h <= h_eff; ++h) gw[h] = wv[h] - target;
    for (int h = h_eff; h >= 1; --h) {
        const GradientBundle gi = backward(ni, ni_caches[h], {gw[h]});
        for (int j = 0; j < n_u; ++j) {
            const int t = h - 1 - j;
            if (t >= 0 && t < h_eff) gu[t] += gi.input_grad[j];
        }
        for (int j = 0; j < n_w; ++j) {
            const int t = h - 1 - j;
            if (t >= 1) gw[t] += gi.input_grad[n_u + j];
        }
        const int t = h - 1;
        if (t >= 1) {
            const double th = std::tanh(raws[t]);
            const GradientBundle gc = backward(
                nc, nc_caches[t], {gu[t] * cfg_nc.u_max * (1.0 - th * th)});
            accumulate_gradients(out.grad, gc);
            for (int j = 0; j < n_c; ++j) {
                const int tt = t - j;
                if (tt >= 1) gw[tt] += gc.input_grad[j];
            }
        }
    }
    const double th0 = std::tanh(raw_k);
    const double dout0 =
        (h_eff >= 1 ? gu[0] : 0.0) * cfg_nc.u_max * (1.0 - th0 * th0);
    accumulate_gradients(out.grad, backward(nc, nc_cache_k, {dout0}));
    return out;
}

struct EpisodeReport {
    int episode = 0;
    double itae = 0.0;
    double peak_dw = 0.0;
    double mean_cost = 0.0;  // mean one-step cost over the episode
    double val_score = -1.0; // worst validation ITAE ratio; -1 when not evaluated
    bool aborted = false;
};

inline void write_episode_report_csv(const std::vector<EpisodeReport>& reports,
                                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "episode,itae,peak_dw,mean_cost,val_score,aborted\n";
    for (const auto& r : reports)
        out << r.episode << ',' << format_double(r.itae) << ','
            << format_double(r.peak_dw) << ',' << format_double(r.mean_cost) << ','
            << format_double(r.val_score) << ',' << (r.aborted ? 1 : 0) << "\n";
}

/// Closed-loop stabilizer around a trained controller network.
class AnnStabilizer {
public:
    AnnStabilizer(Mlp nc, const ControllerConfig& cfg)
        : nc_(std::move(nc)), cfg_(cfg), taps_(cfg.n_c) {
        if (nc_.input_size() != cfg.n_c)
            throw std::invalid_argument("AnnStabilizer: network input size != n_c");
    }

    /// Output is zero until the delay line fills.
    double step(double d_omega, double scale_w) {
        taps_.push(d_omega * scale_w);
        if (!taps_.ready()) return 0.0;
        return nc_output(nc_, taps_.taps(), cfg_);
    }

    void reset() { taps_.reset(); }
    const Mlp& net() const { return nc_; }

private:
    Mlp nc_;
    ControllerConfig cfg_;
    DelayLine taps_;
};

struct TrainedController {
    Mlp net;
    std::vector<EpisodeReport> reports;
};

struct TrainingScenarioFamily {
    double fault_start_min = 0.2, fault_start_max = 1.0;
    double duration_min = 0.1, duration_max = 0.5;
    double v_fault_min = 0.4, v_fault_max = 0.7;
    double pe0_min = 0.8, pe0_max = 0.8;
    // Optional randomization beyond the fault family: initial loading spread
    // and a post-fault load step. Both are off by default.
    double load_step_prob = 0.0;
    double load_frac_min = 0.05, load_frac_max = 0.15;
    double load_delay_min = 2.0, load_delay_max = 3.0; // after the fault clears
};

/// Held-out scenario used to pick the best weights during training. `itae_ref`
/// is the acceptable ITAE for the scenario; the selection score of a
/// checkpoint is the worst itae / itae_ref over all validation cases.
struct ValidationCase {
    Scenario scenario;
    double itae_ref = 1.0;
};

/// Worst ITAE ratio of a controller over the validation set. A truncated
/// (desynchronized) run scores infinity.
inline double validation_score(const Mlp& nc, const GeneratorParams& gp,
                               const NetworkParams& np, const SimTiming& timing,
                               const IdentifierConfig& cfg_id,
                               const ControllerConfig& cfg_nc,
                               const std::vector<ValidationCase>& cases) {
    double worst = 0.0;
    for (const auto& vc : cases) {
        AnnStabilizer stab(nc, cfg_nc);
        const TimeSeries ts =
            simulate(gp, np, timing, vc.scenario, [&](long, double, double omega) {
                return stab.step(omega - 1.0, cfg_id.scale_w);
            });
        if (ts.truncated) return std::numeric_limits<double>::infinity();
        const Metrics m = compute_metrics(ts, vc.scenario.first_event_time());
        worst = std::max(worst, m.itae / vc.itae_ref);
    }
    return worst;
}

/// Episodic closed-loop training against the frozen identifier. Each episode
/// draws a fault (and possibly a load step) from the family, runs the plant
/// with the current controller, and applies one clipped SGD step per control
/// sample. A diverging episode is rolled back and retried at half the learning
/// rate; three consecutive divergences fail the run. When a validation set is
/// given, every surviving checkpoint is scored on it and the best one is
/// returned instead of the final weights.
inline TrainedController train_controller(const Mlp& ni, const GeneratorParams& gp,
                                          const NetworkParams& np,
                                          const SimTiming& timing,
                                          const IdentifierConfig& cfg_id,
                                          const ControllerConfig& cfg_nc,
                                          const TrainingScenarioFamily& family = {},
                                          const std::vector<ValidationCase>& validation = {}) {
    cfg_nc.validate();
    if (ni.input_size() != cfg_id.n_u + cfg_id.n_w)
        throw std::invalid_argument("train_controller: identifier shape mismatch");
    TrainedController out;
    out.net = mlp_init(controller_layers(cfg_nc), cfg_nc.seed);
    Rng scen_rng(cfg_nc.seed ^ 0x5851f42d4c957f2dULL);
    Mlp best = out.net;
    double best_score = std::numeric_limits<double>::infinity();
    int consecutive_aborts = 0;
    double eta_scale = 1.0;
    for (int episode = 0; episode < cfg_nc.episodes; ++episode) {
        Scenario sc;
        sc.name = "train";
        sc.pe0 = scen_rng.uniform(family.pe0_min, family.pe0_max);
        FaultEvent f;
        f.t_start = scen_rng.uniform(family.fault_start_min, family.fault_start_max);
        f.duration = scen_rng.uniform(family.duration_min, family.duration_max);
        f.v_fault = scen_rng.uniform(family.v_fault_min, family.v_fault_max);
        sc.faults = {f};
        // Draw the optional load step unconditionally to keep the episode
        // stream aligned across family settings.
        const double load_roll = scen_rng.uniform();
        const double load_frac =
            scen_rng.uniform(family.load_frac_min, family.load_frac_max);
        const double load_delay =
            scen_rng.uniform(family.load_delay_min, family.load_delay_max);
        double last_event = f.t_start + f.duration;
        // Cap the stepped load at 1.0 p.u.; beyond that the operating point
        // has no post-step equilibrium and the episode cannot be survived.
        const double frac_cap = 1.0 / sc.pe0 - 1.0;
        if (load_roll < family.load_step_prob && frac_cap > 0.01) {
            LoadStepEvent ls;
            ls.t = f.t_start + f.duration + load_delay;
            ls.fraction = std::min(load_frac, frac_cap);
            sc.load_steps = {ls};
            last_event = ls.t;
        }
        sc.t_end = std::max(cfg_nc.episode_length, last_event + 2.0);

        const Mlp snapshot = out.net;
        const double eta =
            cfg_nc.eta_c / (1.0 + cfg_nc.eta_c_decay * episode) * eta_scale;
        TappedDelays ni_taps(cfg_id.n_u, cfg_id.n_w);
        DelayLine nc_taps(cfg_nc.n_c);
        const std::size_t w_hist_len =
            static_cast<std::size_t>(std::max(cfg_id.n_w, cfg_nc.n_c));
        std::deque<double> w_hist; // newest first, scaled
        bool diverged = false;
        double cost_sum = 0.0;
        long cost_n = 0;
        auto control = [&](long, double, double omega) {
            const double dw = omega - 1.0;
            if (std::abs(dw) > 0.1) {
                diverged = true;
                return 0.0;
            }
            nc_taps.push(dw * cfg_id.scale_w);
            w_hist.push_front(dw * cfg_id.scale_w);
            if (w_hist.size() > w_hist_len) w_hist.pop_back();
            double u = 0.0;
            double raw = 0.0;
            ForwardCache nc_cache;
            const bool active = nc_taps.ready();
            if (active) {
                raw = forward(out.net, nc_taps.taps(), &nc_cache)[0];
                u = cfg_nc.u_max * std::tanh(raw);
            }
            ni_taps.push(u, dw * cfg_id.scale_w);
            if (active && ni_taps.ready() && w_hist.size() == w_hist_len) {
                const std::vector<double> iv = ni_taps.input_vector();
                const std::vector<double> u_hist(iv.begin(),
                                                 iv.begin() + cfg_id.n_u);
                const std::vector<double> wh(w_hist.begin(), w_hist.end());
                const UnrollResult ur = bptt_gradient(
                    ni, out.net, u_hist, wh, nc_cache, raw, cfg_id, cfg_nc);
                cost_sum += ur.first_cost;
                ++cost_n;
                if (eta > 0) sgd_update(out.net, ur.grad, eta, cfg_nc.clip);
            }
            return u;
        };
        TimeSeries ts = simulate(gp, np, timing, sc, control);
        EpisodeReport rep;
        rep.episode = episode;
        if (diverged || ts.truncated) {
            out.net = snapshot;
            eta_scale *= 0.5;
            rep.aborted = true;
            out.reports.push_back(rep);
            if (++consecutive_aborts >= 3)
                throw std::runtime_error(
                    "train_controller: three consecutive diverging episodes "
                    "(last at episode " + std::to_string(episode) + ")");
            continue;
        }
        consecutive_aborts = 0;
        const Metrics m = compute_metrics(ts, f.t_start);
        rep.itae = m.itae;
        rep.peak_dw = m.peak_dw;
        rep.mean_cost = cost_n ? cost_sum / static_cast<double>(cost_n) : 0.0;
        if (!validation.empty()) {
            rep.val_score = validation_score(out.net, gp, np, timing, cfg_id,
                                             cfg_nc, validation);
            if (rep.val_score < best_score) {
                best_score = rep.val_score;
                best = out.net;
            }
        }
        out.reports.push_back(rep);
    }
    if (!validation.empty()) out.net = best;
    return out;
}

} // namespace swingbench
