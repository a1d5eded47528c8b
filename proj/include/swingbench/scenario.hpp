#pragma once

// Scenario definitions: fault and load-step events on a given operating point.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swingbench/plant.hpp"

namespace swingbench {

struct FaultEvent {
    double t_start = 0.0;  // [s]
    double duration = 0.0; // [s]
    double v_fault = -1.0; // retained bus voltage; < 0 means NetworkParams default
};

struct LoadStepEvent {
    double t = 0.0;        // [s]
    double fraction = 0.0; // mechanical power step as a fraction of the initial Pm
};

struct Scenario {
    std::string name;
    double pe0 = 0.8;
    double vt0 = 1.0;
    std::vector<FaultEvent> faults;
    std::vector<LoadStepEvent> load_steps;
    double t_end = 15.0;

    void validate() const {
        for (const auto& f : faults) {
            if (f.t_start < 0 || !(f.duration > 0))
                throw std::invalid_argument("scenario " + name + ": bad fault event");
        }
        for (const auto& l : load_steps)
            if (!(l.fraction > -1.0))
                throw std::invalid_argument("scenario " + name + ": load step <= -100%");
        // overlapping faults are rejected at load
        std::vector<FaultEvent> sorted = faults;
        std::sort(sorted.begin(), sorted.end(),
                  [](const FaultEvent& a, const FaultEvent& b) { return a.t_start < b.t_start; });
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i].t_start < sorted[i - 1].t_start + sorted[i - 1].duration)
                throw std::invalid_argument("scenario " + name + ": overlapping faults");
        double last_event = 0.0;
        for (const auto& f : faults) last_event = std::max(last_event, f.t_start + f.duration);
        for (const auto& l : load_steps) last_event = std::max(last_event, l.t);
        if (!(t_end >= last_event + 2.0))
            throw std::invalid_argument("scenario " + name +
                                        ": t_end must exceed the last event by >= 2 s");
    }

    /// Time of the first event, used as the metrics reference.
    double first_event_time() const {
        double t0 = t_end;
        for (const auto& f : faults) t0 = std::min(t0, f.t_start);
        for (const auto& l : load_steps) t0 = std::min(t0, l.t);
        return t0;
    }
};

/// Bus voltage at time t: v_fault while a fault is active (start inclusive,
/// end exclusive), else v_inf.
inline double bus_voltage(const NetworkParams& np, double t,
                          const std::vector<FaultEvent>& faults) {
    for (const auto& f : faults) {
        if (t >= f.t_start && t < f.t_start + f.duration)
            return f.v_fault >= 0 ? f.v_fault : np.v_fault;
    }
    return np.v_inf;
}

/// Mechanical power at time t given the pre-event value pm0.
inline double mechanical_power(double pm0, double t,
                               const std::vector<LoadStepEvent>& steps) {
    double pm = pm0;
    for (const auto& s : steps)
        if (t >= s.t) pm = pm0 * (1.0 + s.fraction);
    return pm;
}

/// S1: 500 ms fault at 0.2 s plus a +10% load step at 8 s, pe0 = 0.8.
/// S2: 1 s fault at 0.2 s, pe0 = 0.8.
/// S3: 500 ms fault at 0.2 s at full loading, pe0 = 1.0.
/// V:  the S1 event set, used for identifier validation.
inline std::vector<Scenario> builtin_scenarios() {
    std::vector<Scenario> out;
    {
        Scenario s;
        s.name = "S1";
        s.pe0 = 0.8;
        s.faults = {{0.2, 0.5, -1.0}};
        s.load_steps = {{8.0, 0.1}};
        s.t_end = 15.0;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "S2";
        s.pe0 = 0.8;
        s.faults = {{0.2, 1.0, -1.0}};
        s.t_end = 15.0;
        out.push_back(s);
    }
    {
        Scenario s;
        s.name = "S3";
        s.pe0 = 1.0;
        s.faults = {{0.2, 0.5, -1.0}};
        s.t_end = 15.0;
        out.push_back(s);
    }
    {
        Scenario s = out[0];
        s.name = "V";
        out.push_back(s);
    }
    return out;
}

inline Scenario find_scenario(const std::string& name) {
    for (const auto& s : builtin_scenarios())
        if (s.name == name) return s;
    throw std::runtime_error("unknown scenario '" + name + "' (expected S1, S2, S3 or V)");
}

} // namespace swingbench
