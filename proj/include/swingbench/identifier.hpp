#pragma once

// Neural identifier: one-step-ahead predictor of rotor speed from tapped
// delays of the stabilizer signal and the (scaled) speed deviation. Trained
// offline with mini-batch SGD on excitation data; the cost per sample is
// J = 1/2 (prediction - target)^2 in scaled units.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "swingbench/config.hpp"
#include "swingbench/cpss.hpp"
#include "swingbench/format.hpp"
#include "swingbench/mlp.hpp"
#include "swingbench/rng.hpp"
#include "swingbench/sim.hpp"
#include "swingbench/tapped.hpp"
#include "swingbench/timeseries.hpp"

namespace swingbench {

struct IdDataset {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets; // scaled next-step speed deviation
    std::string provenance;

    std::size_t size() const { return inputs.size(); }
};

inline std::vector<LayerSpec> identifier_layers(const IdentifierConfig& cfg) {
    std::vector<LayerSpec> specs;
    int prev = cfg.n_u + cfg.n_w;
    for (int h : cfg.hidden) {
        specs.push_back({prev, h, Activation::Tanh});
        prev = h;
    }
    specs.push_back({prev, 1, Activation::Linear});
    return specs;
}

/// Time windows [start, end] to drop from a dataset, e.g. the fault-on spans
/// of the excitation run: the bus voltage is not an identifier input, so
/// samples straddling a voltage discontinuity are unpredictable noise that
/// corrupts the learned stabilizer-signal sensitivity.
inline std::vector<std::pair<double, double>> excitation_fault_windows(
    const ExcitationConfig& ex, const SimTiming& timing, int max_tap) {
    std::vector<std::pair<double, double>> out;
    const double pad = (max_tap + 1) * timing.h_c;
    for (int i = 0; i < ex.n_faults; ++i) {
        const double start = ex.duration * (i + 0.5) / ex.n_faults;
        out.emplace_back(start - timing.h_c, start + ex.fault_duration + pad);
    }
    return out;
}

/// One row per sample k that has full tap history and a next sample:
/// input [u(k)..u(k-n_u+1), s*dw(k)..s*dw(k-n_w+1)], target s*dw(k+1).
/// Samples whose tap window or target touches an excluded span are dropped.
inline IdDataset build_dataset(
    const TimeSeries& run, const IdentifierConfig& cfg,
    const std::vector<std::pair<double, double>>& exclude = {}) {
    cfg.validate();
    const long n = static_cast<long>(run.size());
    const long first_k = std::max(cfg.n_u, cfg.n_w) - 1;
    if (n <= first_k + 1)
        throw std::runtime_error("build_dataset: run too short for the configured taps");
    IdDataset data;
    for (long k = first_k; k + 1 < n; ++k) {
        const double t_hi = run.t[k + 1];
        bool skip = false;
        for (const auto& [a, b] : exclude)
            if (t_hi >= a && run.t[k - first_k] <= b) skip = true;
        if (skip) continue;
        std::vector<double> row;
        row.reserve(cfg.n_u + cfg.n_w);
        for (int j = 0; j < cfg.n_u; ++j) row.push_back(run.upss[k - j]);
        for (int j = 0; j < cfg.n_w; ++j)
            row.push_back((run.omega[k - j] - 1.0) * cfg.scale_w);
        data.inputs.push_back(std::move(row));
        data.targets.push_back((run.omega[k + 1] - 1.0) * cfg.scale_w);
    }
    return data;
}

struct TrainReport {
    std::vector<double> epoch_cost; // mean J per epoch
    double final_rmse = 0.0;        // scaled units, over the training set
};

struct TrainedIdentifier {
    Mlp net;
    TrainReport report;
};

inline double dataset_mean_cost(const Mlp& net, const IdDataset& data) {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double y = forward(net, data.inputs[i])[0];
        const double e = y - data.targets[i];
        sum += 0.5 * e * e;
    }
    return sum / static_cast<double>(data.size());
}

inline TrainedIdentifier train_identifier(const IdDataset& data,
                                          const IdentifierConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("train_identifier: empty dataset");
    TrainedIdentifier out;
    out.net = mlp_init(identifier_layers(cfg), cfg.seed);
    // Separate stream for the shuffle so init and ordering are independent.
    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double eta = cfg.eta / (1.0 + cfg.eta_decay * epoch);
        shuffle(order, shuffle_rng);
        double epoch_cost = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            GradientBundle acc;
            bool first = true;
            for (std::size_t idx = start; idx < stop; ++idx) {
                const std::size_t i = order[idx];
                ForwardCache cache;
                const double y = forward(out.net, data.inputs[i], &cache)[0];
                const double e = y - data.targets[i];
                epoch_cost += 0.5 * e * e;
                GradientBundle g = backward(out.net, cache, {e});
                if (first) {
                    acc = std::move(g);
                    first = false;
                } else {
                    for (std::size_t l = 0; l < acc.weight_grads.size(); ++l) {
                        for (std::size_t j = 0; j < acc.weight_grads[l].size(); ++j)
                            acc.weight_grads[l][j] += g.weight_grads[l][j];
                        for (std::size_t j = 0; j < acc.bias_grads[l].size(); ++j)
                            acc.bias_grads[l][j] += g.bias_grads[l][j];
                    }
                }
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (auto& wl : acc.weight_grads)
                for (double& v : wl) v *= inv;
            for (auto& bl : acc.bias_grads)
                for (double& v : bl) v *= inv;
            sgd_update(out.net, acc, eta, cfg.clip);
        }
        out.report.epoch_cost.push_back(epoch_cost / static_cast<double>(data.size()));
        // Divergence guard: cost grew 10x over the last five epochs.
        const std::size_t e = out.report.epoch_cost.size();
        if (e >= 6 && out.report.epoch_cost[e - 1] >
                          10.0 * out.report.epoch_cost[e - 6])
            throw std::runtime_error(
                "train_identifier: diverged at epoch " + std::to_string(epoch) +
                " (mean cost " + format_double(out.report.epoch_cost[e - 1]) + ")");
    }
    out.report.final_rmse = std::sqrt(2.0 * dataset_mean_cost(out.net, data));
    return out;
}

/// One-step-ahead speed prediction in p.u.: 1 + NI(taps)/scale_w.
inline double predict_one_step(const Mlp& ni, const TappedDelays& taps,
                               const IdentifierConfig& cfg) {
    return 1.0 + forward(ni, taps.input_vector())[0] / cfg.scale_w;
}

struct ValidationResult {
    double rmse = 0.0; // one-step prediction error [p.u.]
    std::vector<double> t;
    std::vector<double> omega;
    std::vector<double> omega_hat;
};

inline void write_validation_csv(const ValidationResult& v, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "t,omega_pu,omega_hat_pu\n";
    for (std::size_t i = 0; i < v.t.size(); ++i)
        out << format_double(v.t[i]) << ',' << format_double(v.omega[i]) << ','
            << format_double(v.omega_hat[i]) << "\n";
}

/// Runs the plant with the CPSS active and records the NI's one-step
/// predictions alongside the measured speed.
inline ValidationResult validate_identifier(const Mlp& ni, const Scenario& sc,
                                            const GeneratorParams& gp,
                                            const NetworkParams& np,
                                            const SimTiming& timing,
                                            const CpssParams& cpss_params,
                                            const IdentifierConfig& cfg) {
    Cpss cpss(cpss_params);
    CpssState cst = cpss.reset();
    TappedDelays taps(cfg.n_u, cfg.n_w);
    ValidationResult res;
    bool have_pred = false;
    double pred_next = 0.0;
    auto control = [&](long, double t, double omega) {
        if (have_pred) {
            res.t.push_back(t);
            res.omega.push_back(omega);
            res.omega_hat.push_back(pred_next);
        }
        const double dw = omega - 1.0;
        const double u = cpss.step(cst, dw);
        taps.push(u, dw * cfg.scale_w);
        if (taps.ready()) {
            pred_next = predict_one_step(ni, taps, cfg);
            have_pred = true;
        }
        return u;
    };
    simulate(gp, np, timing, sc, control);
    double sum = 0.0;
    for (std::size_t i = 0; i < res.t.size(); ++i) {
        const double e = res.omega_hat[i] - res.omega[i];
        sum += e * e;
    }
    res.rmse = res.t.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(res.t.size()));
    return res;
}

// Dataset CSV: u taps newest-first, then dw taps newest-first, then target.
inline void write_dataset_csv(const IdDataset& data, const IdentifierConfig& cfg,
                              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (int j = 0; j < cfg.n_u; ++j)
        out << "u_k" << (j ? std::to_string(j) : "") << ",";
    for (int j = 0; j < cfg.n_w; ++j)
        out << "dw_k" << (j ? std::to_string(j) : "") << ",";
    out << "target_dw_next\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.inputs[i]) out << format_double(v) << ',';
        out << format_double(data.targets[i]) << "\n";
    }
}

inline IdDataset read_dataset_csv(const std::string& path, const IdentifierConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    IdDataset data;
    data.provenance = path;
    const int n_cols = cfg.n_u + cfg.n_w + 1;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(row, tok, ',')) vals.push_back(parse_double(tok));
        if (static_cast<int>(vals.size()) != n_cols)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected " + std::to_string(n_cols) + " columns");
        data.targets.push_back(vals.back());
        vals.pop_back();
        data.inputs.push_back(std::move(vals));
    }
    return data;
}

} // namespace swingbench
