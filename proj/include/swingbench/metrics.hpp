#pragma once

// Damping metrics on a recorded trajectory, measured from the first event.

#include <cmath>
#include <stdexcept>

#include "swingbench/timeseries.hpp"

namespace swingbench {

inline constexpr double kSettlingBand = 2e-4; // |omega - 1| [p.u.]

struct Metrics {
    double peak_dw = 0.0;      // max |omega - 1| after the event [p.u.]
    double settling_time = 0.0; // [s] from the event; t_end - t_event when unsettled
    double itae = 0.0;         // sum (t - t_event) |omega - 1| dt [p.u. s^2]
    bool settled = false;
};

inline Metrics compute_metrics(const TimeSeries& ts, double t_event,
                               double band = kSettlingBand) {
    if (ts.size() == 0) throw std::invalid_argument("compute_metrics: empty trace");
    if (t_event > ts.t.back())
        throw std::invalid_argument("compute_metrics: t_event beyond trace end");
    Metrics m;
    std::size_t last_outside = 0;
    bool any_outside = false;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts.t[i] < t_event) continue;
        const double dw = std::abs(ts.omega[i] - 1.0);
        m.peak_dw = std::max(m.peak_dw, dw);
        m.itae += (ts.t[i] - t_event) * dw * ts.dt;
        if (dw > band) {
            last_outside = i;
            any_outside = true;
        }
    }
    if (!any_outside) {
        m.settling_time = 0.0;
        m.settled = true;
    } else if (last_outside + 1 < ts.size() && !ts.truncated) {
        m.settling_time = ts.t[last_outside + 1] - t_event;
        m.settled = true;
    } else {
        m.settling_time = ts.t.back() - t_event;
        m.settled = false;
    }
    return m;
}

} // namespace swingbench
