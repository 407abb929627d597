// Command-line front end: sim sweep|correlate|benchmark|calibrate|trace.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rfsim/config.hpp"
#include "rfsim/harness.hpp"
#include "rfsim/report.hpp"

namespace {

using namespace rfsim;
using harness::PolicyKind;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string distances;
    std::string policy;
    std::optional<int> trials;
    std::vector<std::string> overrides;
    bool no_plots = false;
    // trace only
    double distance = 0.4;
    double duration_s = 5.0;
};

harness::SimConfig load(const Options& o) {
    harness::SimConfig cfg = o.config_path.empty() ? harness::SimConfig{}
                                                   : harness::load_config(o.config_path);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        harness::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!o.policy.empty()) {
        const auto p = device::parse_policy(o.policy);
        if (!p) throw std::invalid_argument("--policy expects cem|iem|readme");
        cfg.policy = *p;
    }
    cfg.validate();
    return cfg;
}

harness::ExperimentConfig experiment(const Options& o, harness::Scenario scenario) {
    harness::ExperimentConfig e;
    e.scenario = scenario;
    e.sim = load(o);
    e.seed = o.seed.value_or(1);
    e.output_dir = o.out_dir;
    const bool bench = scenario == harness::Scenario::Benchmark;
    e.distances = !o.distances.empty() ? harness::parse_distance_list(o.distances)
                  : bench               ? e.sim.benchmark_distances
                                        : e.sim.sweep_distances;
    e.trials = o.trials.value_or(e.sim.trials);
    e.validate();
    return e;
}

void add_common(CLI::App* cmd, Options& o, bool seed_required) {
    cmd->add_option("--config", o.config_path, "key=value config file")->check(CLI::ExistingFile);
    auto* seed = cmd->add_option("--seed", o.seed, "64-bit seed");
    if (seed_required) seed->required();
    cmd->add_option("--out", o.out_dir, "output directory")->required();
    cmd->add_option("--set", o.overrides, "override a config key (key=value), repeatable");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rf-intermit-sim: read-rate driven intermittent execution simulator"};
    app.require_subcommand(1);
    Options o;

    auto* sweep = app.add_subcommand("sweep", "distance sweep of the inventory power cycle");
    add_common(sweep, o, false);
    sweep->add_option("--distances", o.distances, "comma-separated distances in m");
    sweep->add_flag("--no-plots", o.no_plots, "skip the SVG plot");

    auto* corr = app.add_subcommand("correlate", "device vs reader charge-time correlation");
    add_common(corr, o, false);
    corr->add_option("--distances", o.distances, "comma-separated distances in m");
    corr->add_flag("--no-plots", o.no_plots, "skip the SVG plot");

    auto* bench = app.add_subcommand("benchmark", "CEM / IEM / ReaDmE task benchmark");
    add_common(bench, o, true);
    bench->add_option("--distances", o.distances, "comma-separated distances in m");
    bench->add_option("--policy", o.policy, "run only this policy (cem|iem|readme)");
    bench->add_option("--trials", o.trials, "trials per (policy, distance)")->check(CLI::PositiveNumber);
    bench->add_flag("--no-plots", o.no_plots, "skip the SVG plot");

    auto* calib = app.add_subcommand("calibrate", "fit eta and C to the plateau and onset targets");
    add_common(calib, o, false);

    auto* trace = app.add_subcommand("trace", "single ReaDmE control-loop run with full trace");
    add_common(trace, o, false);
    trace->add_option("--distance", o.distance, "distance in m")->check(CLI::PositiveNumber);
    trace->add_option("--duration", o.duration_s, "simulated seconds")->check(CLI::PositiveNumber);
    trace->add_option("--policy", o.policy, "policy for the task command (default: config)");

    CLI11_PARSE(app, argc, argv);

    try {
        const harness::ReportOptions ropts{!o.no_plots};
        if (*sweep) {
            const auto e = experiment(o, harness::Scenario::Sweep);
            const auto rows = harness::run_distance_sweep(e);
            harness::emit_report(e.output_dir, rows, ropts);
            std::cout << harness::format_sweep_report(rows);
        } else if (*corr) {
            const auto e = experiment(o, harness::Scenario::Correlate);
            const auto res = harness::run_correlation_study(e);
            harness::emit_report(e.output_dir, res, ropts);
            std::cout << harness::format_correlation_report(res);
        } else if (*bench) {
            const auto e = experiment(o, harness::Scenario::Benchmark);
            std::vector<PolicyKind> policies = e.sim.policies;
            if (!o.policy.empty()) policies = {e.sim.policy};
            const auto res = harness::run_policy_benchmark(e, policies);
            harness::emit_report(e.output_dir, res, ropts);
            std::cout << harness::format_benchmark_report(res);
        } else if (*calib) {
            const auto cfg = load(o);
            const auto res = harness::calibrate(cfg);
            harness::emit_report(o.out_dir, res);
            std::cout << harness::format_calibration_report(res);
            return res.feasible ? 0 : 3;
        } else if (*trace) {
            const auto cfg = load(o);
            harness::Testbed tb(cfg, o.distance, o.seed.value_or(1));
            auto& dev = tb.device();
            auto& rd = tb.reader();
            dev.power_on();
            rd.start_inventory();
            rd.start_control_loop();
            const auto task = cfg.task();
            const auto sched = cfg.scheduling(cfg.policy);
            // Arm the task once the first control-loop write lands.
            bool armed = false;
            rd.set_read_listener([&](kernel::SimTime) {
                if (!armed && !rd.write_log().empty() && dev.handle_task_command(task, sched)) armed = true;
            });
            tb.sim().run_until(kernel::SimTime::from_seconds(o.duration_s));
            std::ostringstream tr;
            tr << harness::kCsvVersionLine << '\n';
            kernel::write_trace_csv(tr, tb.sim().trace());
            std::ostringstream wl;
            reader::write_write_log_csv(wl, rd.write_log());
            std::filesystem::create_directories(o.out_dir);
            harness::write_text_file(o.out_dir + "/trace.csv", tr.str());
            harness::write_text_file(o.out_dir + "/writes.csv", wl.str());
            std::cout << "trace events: " << tb.sim().trace().size()
                      << ", writes: " << rd.write_log().size()
                      << ", brownouts: " << dev.brownout_count() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "sim: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
