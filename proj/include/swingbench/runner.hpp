#pragma once

// Scenario runner and CPSS/ANNPSS comparison reports.

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swingbench/config.hpp"
#include "swingbench/controller.hpp"
#include "swingbench/cpss.hpp"
#include "swingbench/metrics.hpp"
#include "swingbench/scenario.hpp"
#include "swingbench/sim.hpp"
#include "swingbench/timeseries.hpp"

namespace swingbench {

enum class StabilizerKind { None, Cpss, Annpss };

inline StabilizerKind stabilizer_from_name(const std::string& name) {
    if (name == "none") return StabilizerKind::None;
    if (name == "cpss") return StabilizerKind::Cpss;
    if (name == "annpss") return StabilizerKind::Annpss;
    throw std::runtime_error("unknown stabilizer '" + name +
                             "' (expected none, cpss or annpss)");
}

inline Scenario apply_overrides(Scenario sc, const SimConfig& cfg) {
    if (cfg.scenario_pe0 >= 0) sc.pe0 = cfg.scenario_pe0;
    if (cfg.scenario_vt0 >= 0) sc.vt0 = cfg.scenario_vt0;
    if (cfg.scenario_t_end >= 0) sc.t_end = cfg.scenario_t_end;
    return sc;
}

inline TimeSeries run_scenario(const SimConfig& cfg, const Scenario& sc,
                               StabilizerKind kind, const Mlp* nc = nullptr) {
    switch (kind) {
        case StabilizerKind::None:
            return simulate(cfg.plant, cfg.network, cfg.timing, sc, no_control);
        case StabilizerKind::Cpss: {
            Cpss cpss(cfg.cpss);
            CpssState st = cpss.reset();
            return simulate(cfg.plant, cfg.network, cfg.timing, sc,
                            [&](long, double, double omega) {
                                return cpss.step(st, omega - 1.0);
                            });
        }
        case StabilizerKind::Annpss: {
            if (!nc)
                throw std::runtime_error("run_scenario: annpss requires controller weights");
            AnnStabilizer stab(*nc, cfg.controller);
            return simulate(cfg.plant, cfg.network, cfg.timing, sc,
                            [&](long, double, double omega) {
                                return stab.step(omega - 1.0, cfg.identifier.scale_w);
                            });
        }
    }
    throw std::logic_error("run_scenario: unreachable");
}

struct CompareRow {
    std::string scenario;
    std::string stabilizer;
    Metrics metrics;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    TimeSeries cpss_trace;
    TimeSeries annpss_trace;
};

inline CompareResult compare_report(const SimConfig& cfg, const Scenario& sc,
                                    const Mlp& nc) {
    CompareResult res;
    res.cpss_trace = run_scenario(cfg, sc, StabilizerKind::Cpss);
    res.annpss_trace = run_scenario(cfg, sc, StabilizerKind::Annpss, &nc);
    const double t_event = sc.first_event_time();
    res.rows.push_back({sc.name, "cpss", compute_metrics(res.cpss_trace, t_event)});
    res.rows.push_back({sc.name, "annpss", compute_metrics(res.annpss_trace, t_event)});
    return res;
}

inline void write_report_csv(const std::vector<CompareRow>& rows, std::ostream& out) {
    out << "scenario,stabilizer,peak_dw,settling_time_s,itae,settled\n";
    for (const auto& r : rows)
        out << r.scenario << ',' << r.stabilizer << ','
            << format_double(r.metrics.peak_dw) << ','
            << format_double(r.metrics.settling_time) << ','
            << format_double(r.metrics.itae) << ',' << (r.metrics.settled ? 1 : 0)
            << "\n";
}

inline void write_report_csv(const std::vector<CompareRow>& rows,
                             const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_report_csv(rows, out);
}

/// Paired trace for plotting: `t,omega_cpss,omega_annpss,upss_cpss,upss_annpss`.
inline void write_paired_csv(const TimeSeries& cpss, const TimeSeries& annpss,
                             const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "t,omega_cpss,omega_annpss,upss_cpss,upss_annpss\n";
    const std::size_t n = std::min(cpss.size(), annpss.size());
    for (std::size_t i = 0; i < n; ++i)
        out << format_double(cpss.t[i]) << ',' << format_double(cpss.omega[i]) << ','
            << format_double(annpss.omega[i]) << ',' << format_double(cpss.upss[i])
            << ',' << format_double(annpss.upss[i]) << "\n";
}

} // namespace swingbench
