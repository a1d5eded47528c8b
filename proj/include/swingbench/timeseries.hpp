#pragma once

// Recorded trajectory at the stabilizer sample rate, plus its CSV format:
//   t,delta_rad,omega_pu,eqp_pu,efd_pu,vt_pu,pe_pu,upss_pu

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swingbench/format.hpp"

namespace swingbench {

struct TimeSeries {
    double dt = 0.01; // sample period [s]
    std::vector<double> t, delta, omega, eqp, efd, vt, pe, upss;
    bool truncated = false; // loss of synchronism cut the run short

    std::size_t size() const { return t.size(); }

    void push(double tt, double d, double w, double e, double f, double v,
              double p, double u) {
        t.push_back(tt);
        delta.push_back(d);
        omega.push_back(w);
        eqp.push_back(e);
        efd.push_back(f);
        vt.push_back(v);
        pe.push_back(p);
        upss.push_back(u);
    }
};

inline constexpr const char* kTrajectoryHeader =
    "t,delta_rad,omega_pu,eqp_pu,efd_pu,vt_pu,pe_pu,upss_pu";

inline void write_trajectory_csv(const TimeSeries& ts, std::ostream& out) {
    out << kTrajectoryHeader << "\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out << format_double(ts.t[i]) << ',' << format_double(ts.delta[i]) << ','
            << format_double(ts.omega[i]) << ',' << format_double(ts.eqp[i]) << ','
            << format_double(ts.efd[i]) << ',' << format_double(ts.vt[i]) << ','
            << format_double(ts.pe[i]) << ',' << format_double(ts.upss[i]) << "\n";
    }
}

inline void write_trajectory_csv(const TimeSeries& ts, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_trajectory_csv(ts, out);
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline TimeSeries read_trajectory_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrajectoryHeader)
        throw std::runtime_error(path + ": unexpected header '" + line + "'");
    TimeSeries ts;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        double vals[8];
        for (int i = 0; i < 8; ++i) {
            if (!std::getline(row, tok, ','))
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": short row");
            vals[i] = parse_double(tok);
        }
        ts.push(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7]);
    }
    if (ts.size() >= 2) ts.dt = ts.t[1] - ts.t[0];
    return ts;
}

} // namespace swingbench
