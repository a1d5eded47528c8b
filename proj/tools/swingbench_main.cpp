// swingbench CLI: excitation data generation, identifier/controller training,
// scenario simulation, stabilizer comparison, and bridge hosting.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 protocol error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "swingbench/bridge.hpp"
#include "swingbench/config.hpp"
#include "swingbench/controller.hpp"
#include "swingbench/cpss.hpp"
#include "swingbench/identifier.hpp"
#include "swingbench/runner.hpp"
#include "swingbench/scenario.hpp"
#include "swingbench/sim.hpp"
#include "swingbench/timeseries.hpp"

namespace {

constexpr const char* kVersion = "swingbench 1.0.0";

using namespace swingbench;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

SimConfig resolve_config(const CommonArgs& args) {
    SimConfig cfg = args.config_path.empty() ? SimConfig{} : load_config(args.config_path);
    cfg.validate();
    if (args.seed) {
        cfg.seed = *args.seed;
    } else if (const char* env = std::getenv("SWINGBENCH_SEED")) {
        cfg.seed = static_cast<std::uint64_t>(parse_long(env));
    }
    return cfg;
}

/// Sidecar with everything needed to reproduce the output byte-for-byte.
void write_metadata(const std::string& out_path, const SimConfig& cfg,
                    const std::string& command) {
    std::ofstream meta(out_path + ".meta", std::ios::binary);
    if (!meta) throw std::runtime_error("cannot write " + out_path + ".meta");
    meta << "# " << kVersion << "\n";
    meta << "# command: " << command << "\n";
    meta << config_schema().echo(cfg);
}

int cmd_simulate(const CommonArgs& common, const std::string& scenario_name,
                 const std::string& stabilizer, const std::string& nc_weights,
                 const std::string& bridge_endpoint, const std::string& out_path) {
    SimConfig cfg = resolve_config(common);
    const Scenario sc = apply_overrides(find_scenario(scenario_name), cfg);
    TimeSeries ts;
    if (!bridge_endpoint.empty()) {
        const std::size_t colon = bridge_endpoint.rfind(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("--bridge expects host:port");
        const std::string host = bridge_endpoint.substr(0, colon);
        const int port = static_cast<int>(parse_long(bridge_endpoint.substr(colon + 1)));
        ts = run_plant_with_bridge(cfg, sc, host, port);
    } else {
        const StabilizerKind kind = stabilizer_from_name(stabilizer);
        std::optional<Mlp> nc;
        if (kind == StabilizerKind::Annpss) {
            if (nc_weights.empty())
                throw CLI::ValidationError("--stabilizer annpss requires --weights-nc");
            nc = load_weights(nc_weights);
        }
        ts = run_scenario(cfg, sc, kind, nc ? &*nc : nullptr);
    }
    write_trajectory_csv(ts, out_path);
    write_metadata(out_path, cfg, "simulate " + scenario_name + " " + stabilizer);
    if (ts.truncated) {
        std::cerr << "warning: loss of synchronism, trace truncated at t="
                  << format_double(ts.t.back()) << "\n";
    }
    std::cout << "wrote " << out_path << " (" << ts.size() << " samples)\n";
    return 0;
}

int cmd_excite(const CommonArgs& common, double duration_override,
               const std::string& out_path) {
    SimConfig cfg = resolve_config(common);
    if (common.seed) cfg.excitation.seed = *common.seed;
    if (duration_override > 0) cfg.excitation.duration = duration_override;
    cfg.excitation.validate();
    const double pe0 = cfg.scenario_pe0 >= 0 ? cfg.scenario_pe0 : 0.8;
    const double vt0 = cfg.scenario_vt0 >= 0 ? cfg.scenario_vt0 : 1.0;
    TimeSeries ts = generate_training_run(cfg.plant, cfg.network, cfg.timing,
                                          cfg.excitation, pe0, vt0);
    write_trajectory_csv(ts, out_path);
    write_metadata(out_path, cfg, "excite");
    std::cout << "wrote " << out_path << " (" << ts.size() << " samples)\n";
    return 0;
}

int cmd_train_id(const CommonArgs& common, const std::string& data_path,
                 const std::string& out_path, const std::string& report_path) {
    SimConfig cfg = resolve_config(common);
    if (common.seed) cfg.identifier.seed = *common.seed;
    const TimeSeries run = read_trajectory_csv(data_path);
    const int max_tap = std::max(cfg.identifier.n_u, cfg.identifier.n_w);
    const IdDataset data =
        build_dataset(run, cfg.identifier,
                      excitation_fault_windows(cfg.excitation, cfg.timing, max_tap));
    const TrainedIdentifier trained = train_identifier(data, cfg.identifier);
    save_weights(trained.net, out_path);
    write_metadata(out_path, cfg, "train-id " + data_path);
    if (!report_path.empty()) {
        std::ofstream rep(report_path, std::ios::binary);
        rep << "epoch,mean_cost\n";
        for (std::size_t e = 0; e < trained.report.epoch_cost.size(); ++e)
            rep << e << ',' << format_double(trained.report.epoch_cost[e]) << "\n";
    }
    std::cout << "trained on " << data.size() << " samples, final RMSE (scaled) "
              << format_double(trained.report.final_rmse) << "\n";
    return 0;
}

int cmd_validate_id(const CommonArgs& common, const std::string& weights_path,
                    const std::string& scenario_name, const std::string& out_path) {
    SimConfig cfg = resolve_config(common);
    const Mlp ni = load_weights(weights_path);
    const Scenario sc = apply_overrides(find_scenario(scenario_name), cfg);
    const ValidationResult res = validate_identifier(ni, sc, cfg.plant, cfg.network,
                                                     cfg.timing, cfg.cpss,
                                                     cfg.identifier);
    if (!out_path.empty()) {
        write_validation_csv(res, out_path);
        write_metadata(out_path, cfg, "validate-id " + scenario_name);
    }
    std::cout << "one-step RMSE " << format_double(res.rmse) << " p.u. over "
              << res.t.size() << " samples\n";
    return 0;
}

int cmd_train_nc(const CommonArgs& common, const std::string& id_weights,
                 const std::string& out_path, const std::string& report_path,
                 int episodes_override) {
    SimConfig cfg = resolve_config(common);
    if (common.seed) cfg.controller.seed = *common.seed;
    if (episodes_override >= 0) cfg.controller.episodes = episodes_override;
    const Mlp ni = load_weights(id_weights);
    // Checkpoint selection: the returned weights are the ones with the best
    // worst-case ITAE ratio against the CPSS over S1 (1x budget) and S2/S3
    // (1.25x budget).
    std::vector<ValidationCase> validation;
    for (const char* name : {"S1", "S2", "S3"}) {
        const Scenario sc = apply_overrides(find_scenario(name), cfg);
        const TimeSeries ref = run_scenario(cfg, sc, StabilizerKind::Cpss);
        const double itae_ref =
            compute_metrics(ref, sc.first_event_time()).itae;
        const double budget = std::string(name) == "S1" ? 1.0 : 1.25;
        validation.push_back({sc, itae_ref * budget});
    }
    const TrainedController trained =
        train_controller(ni, cfg.plant, cfg.network, cfg.timing, cfg.identifier,
                         cfg.controller, TrainingScenarioFamily{}, validation);
    save_weights(trained.net, out_path);
    write_metadata(out_path, cfg, "train-nc " + id_weights);
    if (!report_path.empty()) write_episode_report_csv(trained.reports, report_path);
    std::cout << "trained controller over " << cfg.controller.episodes
              << " episodes\n";
    return 0;
}

int cmd_compare(const CommonArgs& common, const std::string& scenario_name,
                const std::string& nc_weights, const std::string& report_path,
                const std::string& paired_path) {
    SimConfig cfg = resolve_config(common);
    const Scenario sc = apply_overrides(find_scenario(scenario_name), cfg);
    const Mlp nc = load_weights(nc_weights);
    const CompareResult res = compare_report(cfg, sc, nc);
    write_report_csv(res.rows, report_path);
    write_metadata(report_path, cfg, "compare " + scenario_name);
    if (!paired_path.empty())
        write_paired_csv(res.cpss_trace, res.annpss_trace, paired_path);
    write_report_csv(res.rows, std::cout);
    return 0;
}

int cmd_bridge(const CommonArgs& common, const std::string& mode, int port,
               const std::string& nc_weights, const std::string& replay_path) {
    SimConfig cfg = resolve_config(common);
    BridgeListener listener(port);
    std::ofstream replay;
    if (!replay_path.empty()) {
        replay.open(replay_path, std::ios::binary);
        if (!replay) throw std::runtime_error("cannot open " + replay_path);
    }
    std::ostream* log = replay.is_open() ? &replay : nullptr;
    std::cout << "listening on 127.0.0.1:" << listener.port() << "\n" << std::flush;
    if (mode == "serve-cpss") {
        Cpss cpss(cfg.cpss);
        CpssState st = cpss.reset();
        serve_stabilizer([&](double dw) { return cpss.step(st, dw); }, listener, log);
    } else {
        if (nc_weights.empty())
            throw CLI::ValidationError("serve-annpss requires --nc-weights");
        AnnStabilizer stab(load_weights(nc_weights), cfg.controller);
        serve_stabilizer(
            [&](double dw) { return stab.step(dw, cfg.identifier.scale_w); },
            listener, log);
    }
    std::cout << "session complete\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SMIB transient simulator with CPSS and neural PSS"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonArgs common;
    std::uint64_t seed_value = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "configuration file");
        sub->add_option("--seed", seed_value, "seed override")
            ->each([&](const std::string&) { common.seed = seed_value; });
    };

    // simulate
    std::string scenario_name = "S1", stabilizer = "cpss", out_path;
    std::string nc_weights, ni_weights, bridge_endpoint;
    auto* sim = app.add_subcommand("simulate", "run one scenario");
    add_common(sim);
    sim->add_option("--scenario", scenario_name, "S1, S2, S3 or V");
    sim->add_option("--stabilizer", stabilizer, "none, cpss or annpss");
    sim->add_option("--weights-nc", nc_weights, "controller weights (annpss)");
    sim->add_option("--weights-ni", ni_weights, "identifier weights (recorded only)");
    sim->add_option("--bridge", bridge_endpoint, "host:port of a bridge stabilizer");
    sim->add_option("--out", out_path, "trajectory CSV")->required();

    // excite
    double duration = -1;
    auto* exc = app.add_subcommand("excite", "generate identifier training data");
    add_common(exc);
    exc->add_option("--duration", duration, "override excitation duration [s]");
    exc->add_option("--out", out_path, "trajectory CSV")->required();

    // train-id
    std::string data_path, report_path;
    auto* tid = app.add_subcommand("train-id", "train the neural identifier");
    add_common(tid);
    tid->add_option("--data", data_path, "excitation trajectory CSV")->required();
    tid->add_option("--out", out_path, "identifier weights file")->required();
    tid->add_option("--report", report_path, "per-epoch cost CSV");

    // validate-id
    std::string weights_path;
    auto* vid = app.add_subcommand("validate-id", "one-step validation run");
    add_common(vid);
    vid->add_option("--weights", weights_path, "identifier weights")->required();
    vid->add_option("--scenario", scenario_name, "validation scenario");
    vid->add_option("--out", out_path, "paired (t, omega, omega_hat) CSV");

    // train-nc
    std::string id_weights;
    int episodes = -1;
    auto* tnc = app.add_subcommand("train-nc", "train the neural controller");
    add_common(tnc);
    tnc->add_option("--id-weights", id_weights, "trained identifier weights")->required();
    tnc->add_option("--out", out_path, "controller weights file")->required();
    tnc->add_option("--report", report_path, "episode report CSV");
    tnc->add_option("--episodes", episodes, "override episode count");

    // compare
    std::string paired_path;
    auto* cmp = app.add_subcommand("compare", "CPSS vs ANNPSS on one scenario");
    add_common(cmp);
    cmp->add_option("--scenario", scenario_name, "S1, S2 or S3");
    cmp->add_option("--id-weights", id_weights, "identifier weights (recorded only)");
    cmp->add_option("--nc-weights", nc_weights, "controller weights")->required();
    cmp->add_option("--report", report_path, "metrics report CSV")->required();
    cmp->add_option("--paired", paired_path, "paired trace CSV for plotting");

    // bridge
    int port = 0;
    std::string replay_path;
    auto* brg = app.add_subcommand("bridge", "host a stabilizer behind the wire protocol");
    brg->require_subcommand(1);
    auto* scp = brg->add_subcommand("serve-cpss", "host the CPSS");
    auto* sann = brg->add_subcommand("serve-annpss", "host the neural PSS");
    for (auto* sub : {scp, sann}) {
        add_common(sub);
        sub->add_option("--port", port, "TCP port (0 picks a free one)")->required();
        sub->add_option("--replay", replay_path, "session replay log");
    }
    sann->add_option("--nc-weights", nc_weights, "controller weights")->required();
    sann->add_option("--id-weights", id_weights, "identifier weights (recorded only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(common, scenario_name, stabilizer, nc_weights,
                                bridge_endpoint, out_path);
        if (exc->parsed()) return cmd_excite(common, duration, out_path);
        if (tid->parsed()) return cmd_train_id(common, data_path, out_path, report_path);
        if (vid->parsed())
            return cmd_validate_id(common, weights_path, scenario_name, out_path);
        if (tnc->parsed())
            return cmd_train_nc(common, id_weights, out_path, report_path, episodes);
        if (cmp->parsed())
            return cmd_compare(common, scenario_name, nc_weights, report_path,
                               paired_path);
        if (brg->parsed())
            return cmd_bridge(common, scp->parsed() ? "serve-cpss" : "serve-annpss",
                              port, nc_weights, replay_path);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
