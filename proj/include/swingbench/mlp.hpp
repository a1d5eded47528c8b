#pragma once

// Minimal feedforward network: dense layers with tanh or linear activation,
// exact reverse-mode gradients for weights, biases and inputs, plain SGD
// with gradient-norm clipping, and a text serialization format.

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swingbench/format.hpp"
#include "swingbench/rng.hpp"

namespace swingbench {

enum class Activation { Tanh, Linear };

struct LayerSpec {
    int fan_in = 1;
    int fan_out = 1;
    Activation activation = Activation::Tanh;
};

struct Mlp {
    std::vector<LayerSpec> layers;
    // weights[l] is row-major fan_out x fan_in; biases[l] has fan_out entries.
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int input_size() const { return layers.front().fan_in; }
    int output_size() const { return layers.back().fan_out; }

    bool finite() const {
        for (const auto& w : weights)
            for (double v : w)
                if (!std::isfinite(v)) return false;
        for (const auto& b : biases)
            for (double v : b)
                if (!std::isfinite(v)) return false;
        return true;
    }
};

struct ForwardCache {
    std::vector<double> input;
    std::vector<std::vector<double>> activations; // post-activation, per layer
    std::vector<std::vector<double>> preacts;     // pre-activation, per layer
};

struct GradientBundle {
    std::vector<std::vector<double>> weight_grads;
    std::vector<std::vector<double>> bias_grads;
    std::vector<double> input_grad;

    double norm() const {
        double s = 0.0;
        for (const auto& g : weight_grads)
            for (double v : g) s += v * v;
        for (const auto& g : bias_grads)
            for (double v : g) s += v * v;
        return std::sqrt(s);
    }
};

/// Glorot-uniform weights, zero biases, from the documented deterministic RNG.
inline Mlp mlp_init(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    if (specs.empty()) throw std::invalid_argument("mlp_init: no layers");
    for (std::size_t l = 0; l + 1 < specs.size(); ++l)
        if (specs[l].fan_out != specs[l + 1].fan_in)
            throw std::invalid_argument("mlp_init: layer dimensions do not chain");
    for (const auto& s : specs)
        if (s.fan_in < 1 || s.fan_out < 1)
            throw std::invalid_argument("mlp_init: fan_in/fan_out must be >= 1");
    Mlp net;
    net.layers = specs;
    Rng rng(seed);
    for (const auto& s : specs) {
        const double bound = std::sqrt(6.0 / (s.fan_in + s.fan_out));
        std::vector<double> w(static_cast<std::size_t>(s.fan_out) * s.fan_in);
        for (double& v : w) v = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(s.fan_out, 0.0);
    }
    return net;
}

inline std::vector<double> forward(const Mlp& net, const std::vector<double>& input,
                                   ForwardCache* cache = nullptr) {
    if (static_cast<int>(input.size()) != net.input_size())
        throw std::invalid_argument("forward: input length mismatch");
    if (cache) {
        cache->input = input;
        cache->activations.clear();
        cache->preacts.clear();
    }
    std::vector<double> x = input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const LayerSpec& spec = net.layers[l];
        std::vector<double> z(spec.fan_out);
        for (int i = 0; i < spec.fan_out; ++i) {
            double acc = net.biases[l][i];
            const double* row = &net.weights[l][static_cast<std::size_t>(i) * spec.fan_in];
            for (int j = 0; j < spec.fan_in; ++j) acc += row[j] * x[j];
            z[i] = acc;
        }
        std::vector<double> a(spec.fan_out);
        if (spec.activation == Activation::Tanh)
            for (int i = 0; i < spec.fan_out; ++i) a[i] = std::tanh(z[i]);
        else
            a = z;
        if (cache) {
            cache->preacts.push_back(z);
            cache->activations.push_back(a);
        }
        x = std::move(a);
    }
    return x;
}

/// Reverse-mode gradients of a scalar cost J given dJ/d(output).
inline GradientBundle backward(const Mlp& net, const ForwardCache& cache,
                               const std::vector<double>& output_error) {
    if (cache.activations.size() != net.layers.size())
        throw std::invalid_argument("backward: cache does not match network");
    if (static_cast<int>(output_error.size()) != net.output_size())
        throw std::invalid_argument("backward: output_error length mismatch");
    GradientBundle g;
    g.weight_grads.resize(net.layers.size());
    g.bias_grads.resize(net.layers.size());
    std::vector<double> delta = output_error; // dJ/d(activation) of current layer
    for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
        const LayerSpec& spec = net.layers[l];
        // dJ/dz
        std::vector<double> dz(spec.fan_out);
        if (spec.activation == Activation::Tanh) {
            for (int i = 0; i < spec.fan_out; ++i) {
                const double a = cache.activations[l][i];
                dz[i] = delta[i] * (1.0 - a * a);
            }
        } else {
            dz = delta;
        }
        const std::vector<double>& in =
            (l == 0) ? cache.input : cache.activations[l - 1];
        std::vector<double> wg(static_cast<std::size_t>(spec.fan_out) * spec.fan_in);
        for (int i = 0; i < spec.fan_out; ++i)
            for (int j = 0; j < spec.fan_in; ++j)
                wg[static_cast<std::size_t>(i) * spec.fan_in + j] = dz[i] * in[j];
        g.weight_grads[l] = std::move(wg);
        g.bias_grads[l] = dz;
        std::vector<double> prev(spec.fan_in, 0.0);
        for (int i = 0; i < spec.fan_out; ++i) {
            const double* row = &net.weights[l][static_cast<std::size_t>(i) * spec.fan_in];
            for (int j = 0; j < spec.fan_in; ++j) prev[j] += row[j] * dz[i];
        }
        delta = std::move(prev);
    }
    g.input_grad = delta;
    return g;
}

struct SgdStats {
    std::size_t skipped_updates = 0;
};

/// In-place SGD step with global gradient-norm clipping. Non-finite
/// gradients skip the update and bump the counter.
inline void sgd_update(Mlp& net, const GradientBundle& grads, double eta,
                       double clip, SgdStats* stats = nullptr) {
    if (!(eta > 0)) throw std::invalid_argument("sgd_update: eta must be > 0");
    double norm2 = 0.0;
    for (const auto& g : grads.weight_grads)
        for (double v : g) norm2 += v * v;
    for (const auto& g : grads.bias_grads)
        for (double v : g) norm2 += v * v;
    if (!std::isfinite(norm2)) {
        if (stats) ++stats->skipped_updates;
        return;
    }
    const double norm = std::sqrt(norm2);
    const double scale = (clip > 0 && norm > clip) ? clip / norm : 1.0;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].size(); ++i)
            net.weights[l][i] -= eta * scale * grads.weight_grads[l][i];
        for (std::size_t i = 0; i < net.biases[l].size(); ++i)
            net.biases[l][i] -= eta * scale * grads.bias_grads[l][i];
    }
}

inline const char* activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "linear";
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "linear") return Activation::Linear;
    throw std::runtime_error("unknown activation '" + name + "'");
}

// Weights file, text, LF line endings:
//   MLPV1 <n_layers>
//   LAYER <fan_in> <fan_out> <tanh|linear>
//   <fan_in weight values> <bias>     (one line per output unit)
inline void save_weights(const Mlp& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_weights: cannot open " + path);
    out << "MLPV1 " << net.layers.size() << "\n";
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const LayerSpec& spec = net.layers[l];
        out << "LAYER " << spec.fan_in << " " << spec.fan_out << " "
            << activation_name(spec.activation) << "\n";
        for (int i = 0; i < spec.fan_out; ++i) {
            for (int j = 0; j < spec.fan_in; ++j)
                out << format_double(
                           net.weights[l][static_cast<std::size_t>(i) * spec.fan_in + j])
                    << " ";
            out << format_double(net.biases[l][i]) << "\n";
        }
    }
    if (!out) throw std::runtime_error("save_weights: write failed for " + path);
}

inline Mlp load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_weights: cannot open " + path);
    auto fail = [&](int line_no, const std::string& why) -> void {
        throw std::runtime_error("load_weights: " + path + ":" +
                                 std::to_string(line_no) + ": " + why);
    };
    int line_no = 0;
    std::string line;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
        return true;
    };
    if (!next_line()) fail(1, "empty file");
    std::istringstream hdr(line);
    std::string magic;
    long n_layers = 0;
    if (!(hdr >> magic >> n_layers) || magic != "MLPV1" || n_layers < 1)
        fail(line_no, "expected 'MLPV1 <n_layers>'");
    Mlp net;
    for (long l = 0; l < n_layers; ++l) {
        if (!next_line()) fail(line_no + 1, "truncated file, expected LAYER");
        std::istringstream lh(line);
        std::string kw, act;
        long fan_in = 0, fan_out = 0;
        if (!(lh >> kw >> fan_in >> fan_out >> act) || kw != "LAYER" ||
            fan_in < 1 || fan_out < 1)
            fail(line_no, "expected 'LAYER <fan_in> <fan_out> <activation>'");
        LayerSpec spec;
        spec.fan_in = static_cast<int>(fan_in);
        spec.fan_out = static_cast<int>(fan_out);
        spec.activation = activation_from_name(act);
        if (!net.layers.empty() && net.layers.back().fan_out != spec.fan_in)
            fail(line_no, "layer dimensions do not chain");
        std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
        std::vector<double> b(fan_out);
        for (long i = 0; i < fan_out; ++i) {
            if (!next_line()) fail(line_no + 1, "truncated file, expected weight row");
            std::istringstream row(line);
            std::string tok;
            for (long j = 0; j < fan_in; ++j) {
                if (!(row >> tok)) fail(line_no, "short weight row");
                w[static_cast<std::size_t>(i) * fan_in + j] = parse_double(tok);
            }
            if (!(row >> tok)) fail(line_no, "missing bias");
            b[i] = parse_double(tok);
            if (row >> tok) fail(line_no, "trailing values on weight row");
        }
        net.layers.push_back(spec);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

} // namespace swingbench
