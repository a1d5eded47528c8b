#pragma once

// Line-based configuration: `section.key = value`, `#` comments, UTF-8.
// Unknown keys are rejected so typos fail loudly. Every command echoes the
// resolved configuration into its metadata sidecar.

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swingbench/cpss.hpp"
#include "swingbench/format.hpp"
#include "swingbench/plant.hpp"

namespace swingbench {

struct IdentifierConfig {
    int n_u = 3;            // stabilizer-signal taps
    int n_w = 3;            // speed-deviation taps
    std::vector<int> hidden = {16};
    double scale_w = 100.0; // speed-deviation input scale
    double eta = 0.05;
    double eta_decay = 0.01; // eta(epoch) = eta / (1 + eta_decay * epoch)
    int epochs = 800;
    int batch = 32;
    double clip = 1.0;
    std::uint64_t seed = 7;

    void validate() const {
        if (n_u < 1 || n_w < 1)
            throw std::invalid_argument("identifier taps must be >= 1");
        if (!(scale_w > 0)) throw std::invalid_argument("scale_w must be > 0");
        if (batch < 1) throw std::invalid_argument("batch must be >= 1");
        if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    }
};

struct ControllerConfig {
    int n_c = 3; // speed-deviation taps into the controller
    std::vector<int> hidden = {8};
    double u_max = 0.1;
    double w_d = 1.0; // desired speed [p.u.]
    double eta_c = 0.2;
    double eta_c_decay = 0.01; // eta(episode) = eta_c / (1 + eta_c_decay * episode)
    double clip = 1.0;
    // Prediction horizon (control steps) unrolled through the frozen
    // identifier when back-propagating the speed error to the controller.
    // horizon = 1 is the plain one-step rule; it cannot see past the
    // exciter–field lag (~0.2 s), so its updates lack the phase lead a
    // stabilizer needs. The default covers that lag.
    int horizon = 20;
    int episodes = 80;
    double episode_length = 8.0; // [s]
    std::uint64_t seed = 11;

    void validate() const {
        if (n_c < 1) throw std::invalid_argument("n_c must be >= 1");
        if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
        if (!(u_max > 0)) throw std::invalid_argument("controller u_max must be > 0");
        if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
        if (!(episode_length > 0))
            throw std::invalid_argument("episode_length must be > 0");
    }
};

struct ExcitationConfig {
    int n_sines = 12;
    double f_min = 0.3;  // [Hz]
    double f_max = 3.5;  // [Hz]
    double amplitude = 0.03; // multisine peak [p.u.]
    // White dither held over each control sample, added to the multisine. It
    // decorrelates u(k) from the state history so the identifier's learned
    // sensitivity to u(k) is the causal one, not a correlation artifact.
    double dither = 0.05;    // uniform +/- amplitude [p.u.]
    double duration = 60.0;  // [s]
    // Mild, evenly spaced voltage dips during the run. They put transient
    // (post-fault ringdown) states into the identification data, which the
    // multisine alone never visits; without them the identifier's stabilizer
    // sensitivity extrapolates with the wrong sign exactly where the
    // controller trains.
    int n_faults = 4;
    double fault_duration = 0.15; // [s]
    double fault_v = 0.85;        // retained bus voltage [p.u.]
    std::uint64_t seed = 42;

    void validate() const {
        if (n_sines < 1) throw std::invalid_argument("n_sines must be >= 1");
        if (!(f_min > 0 && f_min < f_max))
            throw std::invalid_argument("need 0 < f_min < f_max");
        if (!(amplitude >= 0)) throw std::invalid_argument("amplitude must be >= 0");
        if (dither < 0) throw std::invalid_argument("dither must be >= 0");
        if (n_faults < 0) throw std::invalid_argument("n_faults must be >= 0");
        if (n_faults > 0 && !(fault_duration > 0))
            throw std::invalid_argument("fault_duration must be > 0");
        if (!(fault_v >= 0)) throw std::invalid_argument("fault_v must be >= 0");
        if (!(duration >= 10.0 / f_min))
            throw std::invalid_argument("duration must cover >= 10 periods of f_min");
    }
};

struct SimTiming {
    double h = 1e-3;   // integration step [s]
    double h_c = 1e-2; // stabilizer sample period [s]

    void validate() const {
        if (!(h > 0 && h_c > 0)) throw std::invalid_argument("steps must be > 0");
        const double ratio = h_c / h;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1)
            throw std::invalid_argument("h_c must be an integer multiple of h");
    }

    int substeps() const { return static_cast<int>(std::round(h_c / h)); }
};

struct SimConfig {
    GeneratorParams plant;
    NetworkParams network;
    CpssParams cpss;
    IdentifierConfig identifier;
    ControllerConfig controller;
    ExcitationConfig excitation;
    SimTiming timing;
    double scenario_pe0 = -1.0;  // < 0 means no override
    double scenario_vt0 = -1.0;
    double scenario_t_end = -1.0;
    std::uint64_t seed = 1;

    void validate() const {
        plant.validate();
        network.validate();
        cpss.validate();
        identifier.validate();
        controller.validate();
        excitation.validate();
        timing.validate();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) throw std::runtime_error("empty entry in list '" + s + "'");
        out.push_back(static_cast<int>(parse_long(tok)));
    }
    if (out.empty()) throw std::runtime_error("empty list");
    return out;
}

inline std::string format_int_list(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

} // namespace detail

class ConfigSchema {
public:
    using Setter = std::function<void(SimConfig&, const std::string&)>;
    using Getter = std::function<std::string(const SimConfig&)>;

    ConfigSchema() {
        reg_d("plant.h_inertia", [](SimConfig& c) -> double& { return c.plant.h_inertia; });
        reg_d("plant.d_damping", [](SimConfig& c) -> double& { return c.plant.d_damping; });
        reg_d("plant.xd", [](SimConfig& c) -> double& { return c.plant.xd; });
        reg_d("plant.xdp", [](SimConfig& c) -> double& { return c.plant.xdp; });
        reg_d("plant.xq", [](SimConfig& c) -> double& { return c.plant.xq; });
        reg_d("plant.td0p", [](SimConfig& c) -> double& { return c.plant.td0p; });
        reg_d("plant.ka", [](SimConfig& c) -> double& { return c.plant.ka; });
        reg_d("plant.ta", [](SimConfig& c) -> double& { return c.plant.ta; });
        reg_d("plant.efd_min", [](SimConfig& c) -> double& { return c.plant.efd_min; });
        reg_d("plant.efd_max", [](SimConfig& c) -> double& { return c.plant.efd_max; });
        reg_d("plant.omega_base", [](SimConfig& c) -> double& { return c.plant.omega_base; });
        reg_d("network.xe", [](SimConfig& c) -> double& { return c.network.xe; });
        reg_d("network.v_inf", [](SimConfig& c) -> double& { return c.network.v_inf; });
        reg_d("network.v_fault", [](SimConfig& c) -> double& { return c.network.v_fault; });
        reg_d("cpss.k_gain", [](SimConfig& c) -> double& { return c.cpss.k_gain; });
        reg_d("cpss.tw", [](SimConfig& c) -> double& { return c.cpss.tw; });
        reg_d("cpss.t1", [](SimConfig& c) -> double& { return c.cpss.t1; });
        reg_d("cpss.t2", [](SimConfig& c) -> double& { return c.cpss.t2; });
        reg_d("cpss.t3", [](SimConfig& c) -> double& { return c.cpss.t3; });
        reg_d("cpss.t4", [](SimConfig& c) -> double& { return c.cpss.t4; });
        reg_d("cpss.u_max", [](SimConfig& c) -> double& { return c.cpss.u_max; });
        reg_i("identifier.n_u", [](SimConfig& c) -> int& { return c.identifier.n_u; });
        reg_i("identifier.n_w", [](SimConfig& c) -> int& { return c.identifier.n_w; });
        reg_list("identifier.hidden",
                 [](SimConfig& c) -> std::vector<int>& { return c.identifier.hidden; });
        reg_d("identifier.scale_w", [](SimConfig& c) -> double& { return c.identifier.scale_w; });
        reg_d("identifier.eta", [](SimConfig& c) -> double& { return c.identifier.eta; });
        reg_d("identifier.eta_decay",
              [](SimConfig& c) -> double& { return c.identifier.eta_decay; });
        reg_i("identifier.epochs", [](SimConfig& c) -> int& { return c.identifier.epochs; });
        reg_i("identifier.batch", [](SimConfig& c) -> int& { return c.identifier.batch; });
        reg_d("identifier.clip", [](SimConfig& c) -> double& { return c.identifier.clip; });
        reg_u("identifier.seed", [](SimConfig& c) -> std::uint64_t& { return c.identifier.seed; });
        reg_i("controller.n_c", [](SimConfig& c) -> int& { return c.controller.n_c; });
        reg_list("controller.hidden",
                 [](SimConfig& c) -> std::vector<int>& { return c.controller.hidden; });
        reg_d("controller.u_max", [](SimConfig& c) -> double& { return c.controller.u_max; });
        reg_d("controller.w_d", [](SimConfig& c) -> double& { return c.controller.w_d; });
        reg_d("controller.eta_c", [](SimConfig& c) -> double& { return c.controller.eta_c; });
        reg_d("controller.eta_c_decay",
              [](SimConfig& c) -> double& { return c.controller.eta_c_decay; });
        reg_i("controller.horizon",
              [](SimConfig& c) -> int& { return c.controller.horizon; });
        reg_d("controller.clip", [](SimConfig& c) -> double& { return c.controller.clip; });
        reg_i("controller.episodes", [](SimConfig& c) -> int& { return c.controller.episodes; });
        reg_d("controller.episode_length",
              [](SimConfig& c) -> double& { return c.controller.episode_length; });
        reg_u("controller.seed", [](SimConfig& c) -> std::uint64_t& { return c.controller.seed; });
        reg_i("excitation.n_sines", [](SimConfig& c) -> int& { return c.excitation.n_sines; });
        reg_d("excitation.f_min", [](SimConfig& c) -> double& { return c.excitation.f_min; });
        reg_d("excitation.f_max", [](SimConfig& c) -> double& { return c.excitation.f_max; });
        reg_d("excitation.amplitude",
              [](SimConfig& c) -> double& { return c.excitation.amplitude; });
        reg_d("excitation.dither",
              [](SimConfig& c) -> double& { return c.excitation.dither; });
        reg_i("excitation.n_faults",
              [](SimConfig& c) -> int& { return c.excitation.n_faults; });
        reg_d("excitation.fault_duration",
              [](SimConfig& c) -> double& { return c.excitation.fault_duration; });
        reg_d("excitation.fault_v",
              [](SimConfig& c) -> double& { return c.excitation.fault_v; });
        reg_d("excitation.duration",
              [](SimConfig& c) -> double& { return c.excitation.duration; });
        reg_u("excitation.seed", [](SimConfig& c) -> std::uint64_t& { return c.excitation.seed; });
        reg_d("sim.h", [](SimConfig& c) -> double& { return c.timing.h; });
        reg_d("sim.h_c", [](SimConfig& c) -> double& { return c.timing.h_c; });
        reg_d("scenario.pe0", [](SimConfig& c) -> double& { return c.scenario_pe0; });
        reg_d("scenario.vt0", [](SimConfig& c) -> double& { return c.scenario_vt0; });
        reg_d("scenario.t_end", [](SimConfig& c) -> double& { return c.scenario_t_end; });
        reg_u("seed", [](SimConfig& c) -> std::uint64_t& { return c.seed; });
    }

    void set(SimConfig& cfg, const std::string& key, const std::string& value) const {
        auto it = setters_.find(key);
        if (it == setters_.end())
            throw std::runtime_error("unknown config key '" + key + "'");
        it->second(cfg, value);
    }

    /// Full resolved configuration, one `key = value` per line, sorted by key.
    std::string echo(const SimConfig& cfg) const {
        std::string out;
        for (const auto& [key, get] : getters_)
            out += key + " = " + get(cfg) + "\n";
        return out;
    }

private:
    template <typename Ref>
    void reg_d(const std::string& key, Ref ref) {
        setters_[key] = [ref](SimConfig& c, const std::string& v) { ref(c) = parse_double(v); };
        getters_[key] = [ref](const SimConfig& c) {
            return format_double(ref(const_cast<SimConfig&>(c)));
        };
    }
    template <typename Ref>
    void reg_i(const std::string& key, Ref ref) {
        setters_[key] = [ref](SimConfig& c, const std::string& v) {
            ref(c) = static_cast<int>(parse_long(v));
        };
        getters_[key] = [ref](const SimConfig& c) {
            return std::to_string(ref(const_cast<SimConfig&>(c)));
        };
    }
    template <typename Ref>
    void reg_u(const std::string& key, Ref ref) {
        setters_[key] = [ref](SimConfig& c, const std::string& v) {
            ref(c) = static_cast<std::uint64_t>(parse_long(v));
        };
        getters_[key] = [ref](const SimConfig& c) {
            return std::to_string(ref(const_cast<SimConfig&>(c)));
        };
    }
    template <typename Ref>
    void reg_list(const std::string& key, Ref ref) {
        setters_[key] = [ref](SimConfig& c, const std::string& v) {
            ref(c) = detail::parse_int_list(v);
        };
        getters_[key] = [ref](const SimConfig& c) {
            return detail::format_int_list(ref(const_cast<SimConfig&>(c)));
        };
    }

    std::map<std::string, Setter> setters_;
    std::map<std::string, Getter> getters_;
};

inline const ConfigSchema& config_schema() {
    static const ConfigSchema schema;
    return schema;
}

inline SimConfig parse_config_text(const std::string& text,
                                   const std::string& origin = "<text>") {
    SimConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            config_schema().set(cfg, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    cfg.validate();
    return cfg;
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

} // namespace swingbench
