// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rfsim/config.hpp"
#include "rfsim/device.hpp"
#include "rfsim/energy.hpp"
#include "rfsim/harness.hpp"
#include "rfsim/report.hpp"
#include "rfsim/simkernel.hpp"

namespace {

using namespace rfsim;
using harness::PolicyKind;
using kernel::SimTime;

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double uniform(kernel::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

energy::DeviceConfig random_device(kernel::Rng& rng) {
    energy::DeviceConfig c;
    c.capacitance_f = std::exp(uniform(rng, std::log(10e-6), std::log(470e-6)));
    c.v_min = uniform(rng, 1.5, 2.0);
    c.v_charged = c.v_min + uniform(rng, 0.2, 1.0);
    c.p_sleep_w = uniform(rng, 1e-6, 50e-6);
    c.p_active_w = uniform(rng, 0.5e-3, 5e-3);
    c.p_transmit_w = uniform(rng, 0.5e-3, 5e-3);
    c.t_execute_s = uniform(rng, 0.1e-3, 2e-3);
    c.t_t_mean_s = uniform(rng, 0.5e-3, 3e-3);
    c.t_t_sigma_s = uniform(rng, 0.0, 1e-3);
    c.validate();
    return c;
}

std::optional<SimTime> first(const kernel::Simulator& sim, std::string_view label) {
    for (const auto& e : sim.trace()) {
        if (e.entity == device::kDeviceEntity && e.label == label) return e.time;
    }
    return std::nullopt;
}

Verdict closed_form_oracles() {
    const auto t0 = Clock::now();
    kernel::Rng rng(20240601);
    double worst_charge = 0.0, worst_drain = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto c = random_device(rng);
        const double e_stored = energy::stored_energy(c);

        // Charge from V_min to V_charged at a random harvest above the sleep draw.
        {
            kernel::Simulator sim(rng.next_u64());
            device::Device dev(sim, c);
            const double p_c = c.p_sleep_w * uniform(rng, 1.5, 400.0);
            dev.set_harvested_power(p_c);
            dev.set_ready_listener([&sim] { sim.stop(); });
            dev.power_on(c.e_min());
            sim.run_until(SimTime::from_seconds(1e4));
            const auto boot = first(sim, "boot");
            if (!boot) return {false, "case " + std::to_string(i) + ": no boot"};
            const double oracle_us = energy::charge_time(e_stored, p_c, c.p_sleep_w) * 1e6;
            worst_charge = std::max(worst_charge, std::abs(static_cast<double>(boot->us) - oracle_us));
        }
        // Drain from V_charged to V_min under a task the harvester cannot carry.
        {
            kernel::Simulator sim(rng.next_u64());
            device::Device dev(sim, c);
            const double p_c = c.p_active_w * uniform(rng, 0.0, 0.9);
            dev.set_harvested_power(std::max(p_c, 1.5 * c.p_sleep_w));
            dev.set_task_listener([&sim](const device::TaskEvent&) { sim.stop(); });
            dev.arm_task({SimTime::from_seconds(1e3), SimTime::from_seconds(1e3), 0.0},
                         device::SchedulingPolicy::cem());
            dev.power_on(c.e_max());
            sim.run_until(SimTime::from_seconds(1e4));
            const auto start = first(sim, "task_start");
            const auto out = first(sim, "brownout");
            if (!start || !out) return {false, "case " + std::to_string(i) + ": no brownout"};
            const double oracle_us =
                energy::active_time(e_stored, c.p_active_w, dev.harvested_power(), c.t_execute_s) * 1e6;
            worst_drain = std::max(worst_drain, std::abs(static_cast<double>((*out - *start).us) - oracle_us));
        }
    }
    const double rt = seconds_since(t0);
    const bool ok = worst_charge <= 1.0 && worst_drain <= 1.0 && rt < 10.0;
    return {ok, "100 configs, worst charge error " + fmt("%.3f", worst_charge) + " us, worst drain error " +
                    fmt("%.3f", worst_drain) + " us, " + fmt("%.2f", rt) + " s"};
}

Verdict estimator_inversion(const harness::SimConfig& cfg) {
    const auto t0 = Clock::now();
    harness::ExperimentConfig e;
    e.sim = cfg;
    e.sim.shadowing_sigma_db = 0.0;
    e.distances = cfg.sweep_distances;
    e.seed = 1;
    const auto rows = harness::run_distance_sweep(e);
    double worst_margin = -1e300;
    int checked = 0;
    for (const auto& r : rows) {
        if (!r.booted()) continue;
        const double tol = 0.1 + 1000.0 / r.rr_device;
        worst_margin = std::max(worst_margin, std::abs(r.tc_est_ms - r.tc_ms) - tol);
        ++checked;
    }
    const double rt = seconds_since(t0);
    const bool ok = checked > 0 && worst_margin <= 0.0 && rt < 30.0;
    return {ok, std::to_string(checked) + " rows, worst |error| - tolerance " + fmt("%.3f", worst_margin) +
                    " ms, " + fmt("%.2f", rt) + " s"};
}

Verdict correlation(const harness::SimConfig& cfg) {
    const auto t0 = Clock::now();
    harness::ExperimentConfig e;
    e.sim = cfg;
    e.distances = cfg.sweep_distances;
    e.seed = 1;
    e.sim.shadowing_sigma_db = 0.0;
    const auto clean = harness::run_correlation_study(e);
    e.sim.shadowing_sigma_db = 3.0;
    const auto noisy = harness::run_correlation_study(e);
    const double rt = seconds_since(t0);
    const double r0 = clean.coefficient.value_or(NAN);
    const double r3 = noisy.coefficient.value_or(NAN);
    const bool ok = r0 >= 0.999 && r3 >= 0.95 && rt < 60.0;
    return {ok, "noiseless r = " + fmt("%.5f", r0) + ", 3 dB r = " + fmt("%.5f", r3) + " (" +
                    std::to_string(noisy.rows.size()) + " rows), " + fmt("%.2f", rt) + " s"};
}

Verdict d_squared(const harness::SimConfig& cfg) {
    harness::ExperimentConfig e;
    e.sim = cfg;
    e.sim.shadowing_sigma_db = 0.0;
    e.distances = cfg.sweep_distances;
    e.seed = 1;
    const auto rows = harness::run_distance_sweep(e);
    const auto fit = harness::fit_tc_vs_d_squared(rows);
    if (!fit) return {false, "fewer than 3 rows off the plateau"};
    return {fit->r_squared >= 0.99, "R^2 = " + fmt("%.4f", fit->r_squared) + " over " +
                                        std::to_string(fit->points) + " rows"};
}

const harness::CellSummary* cell(const harness::BenchmarkResult& r, PolicyKind p, double d) {
    for (const auto& c : r.cells) {
        if (c.policy == p && c.d_m == d) return &c;
    }
    return nullptr;
}

void benchmark_criteria(const harness::SimConfig& cfg, std::vector<std::pair<std::string, Verdict>>& out) {
    const auto t0 = Clock::now();
    harness::ExperimentConfig e;
    e.sim = cfg;
    e.distances = cfg.benchmark_distances;
    e.trials = std::max(cfg.trials, 10);
    e.seed = 1;
    const std::vector<PolicyKind> policies{PolicyKind::Cem, PolicyKind::Iem, PolicyKind::Readme};
    const auto res = harness::run_policy_benchmark(e, policies);
    const double rt = seconds_since(t0);
    const double near = *std::min_element(e.distances.begin(), e.distances.end());
    const double far = *std::max_element(e.distances.begin(), e.distances.end());
    auto rate = [&](PolicyKind p, double d) { return cell(res, p, d)->success_rate(); };
    const std::string timing = ", " + std::to_string(e.trials) + " trials/cell, " + fmt("%.2f", rt) + " s";

    out.emplace_back("5a CEM 100% nearest, 0% farthest",
                     Verdict{rate(PolicyKind::Cem, near) == 1.0 && rate(PolicyKind::Cem, far) == 0.0 && rt < 120.0,
                             "CEM " + fmt("%.0f%%", 100 * rate(PolicyKind::Cem, near)) + " at " + fmt("%.2f m", near) +
                                 ", " + fmt("%.0f%%", 100 * rate(PolicyKind::Cem, far)) + " at " +
                                 fmt("%.2f m", far) + timing});

    const double gap = rate(PolicyKind::Readme, far) - rate(PolicyKind::Iem, far);
    out.emplace_back("5b ReaDmE - IEM >= 20 points at the critical distance",
                     Verdict{gap >= 0.2, fmt("%+.0f points", 100 * gap) + " at " + fmt("%.2f m", far)});

    std::optional<double> d_fail;
    for (double d : e.distances) {
        if (1.0 - rate(PolicyKind::Iem, d) >= 0.2) {
            d_fail = d;
            break;
        }
    }
    out.emplace_back("5c ReaDmE 100% where IEM fails >= 20%",
                     d_fail ? Verdict{rate(PolicyKind::Readme, *d_fail) == 1.0,
                                      "IEM " + fmt("%.0f%%", 100 * rate(PolicyKind::Iem, *d_fail)) + ", ReaDmE " +
                                          fmt("%.0f%%", 100 * rate(PolicyKind::Readme, *d_fail)) + " at " +
                                          fmt("%.2f m", *d_fail)}
                            : Verdict{false, "IEM never fails >= 20% of trials"});

    const auto* rd = cell(res, PolicyKind::Readme, near);
    const auto* im = cell(res, PolicyKind::Iem, near);
    const bool lat_ok = rd->mean_latency_ms && im->mean_latency_ms && *rd->mean_latency_ms <= 0.8 * *im->mean_latency_ms;
    out.emplace_back("5d ReaDmE latency <= 0.80 x IEM at the nearest distance",
                     Verdict{lat_ok, "ReaDmE " + fmt("%.1f ms", rd->mean_latency_ms.value_or(NAN)) + ", IEM " +
                                         fmt("%.1f ms", im->mean_latency_ms.value_or(NAN)) + " (ratio " +
                                         fmt("%.3f", rd->mean_latency_ms.value_or(NAN) /
                                                         im->mean_latency_ms.value_or(NAN)) +
                                         ")"});

    bool dominates = true;
    std::string worst;
    for (double d : e.distances) {
        if (rate(PolicyKind::Readme, d) < rate(PolicyKind::Cem, d)) {
            dominates = false;
            worst = " (fails at " + fmt("%.2f m", d) + ")";
        }
    }
    out.emplace_back("5e ReaDmE success >= CEM at every distance",
                     Verdict{dominates, std::to_string(e.distances.size()) + " distances" + worst});
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism(const std::string& sim_exe, const std::string& config) {
    const auto base = std::filesystem::temp_directory_path() / ("rfsim-accept-" + std::to_string(::getpid()));
    struct Run {
        std::string args;
        std::vector<std::string> files;
    };
    const std::vector<Run> runs{
        {"sweep --set sweep.window_s=3 --set channel.shadowing_sigma_db=3", {"sweep.csv", "report.txt"}},
        {"correlate --set sweep.window_s=3 --set channel.shadowing_sigma_db=3", {"correlate.csv", "report.txt"}},
        {"benchmark --trials 3 --set channel.shadowing_sigma_db=3", {"benchmark.csv", "report.txt"}},
    };
    int compared = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::string outputs[2];
        for (int k = 0; k < 2; ++k) {
            const auto dir = base / (std::to_string(i) + "_" + std::to_string(k));
            const std::string cmd = "\"" + sim_exe + "\" " + runs[i].args + " --config \"" + config +
                                    "\" --seed 424242 --out \"" + dir.string() + "\" --no-plots > /dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + runs[i].args};
            for (const auto& f : runs[i].files) outputs[k] += slurp(dir / f) + '\x1f';
        }
        if (outputs[0] != outputs[1]) return {false, "outputs differ for: " + runs[i].args};
        compared += static_cast<int>(runs[i].files.size());
    }
    std::filesystem::remove_all(base);
    return {true, "sweep, correlate, benchmark with 3 dB shadowing: " + std::to_string(compared) +
                      " files byte-identical across repeated runs"};
}

Verdict properties(const std::string& exe) {
    const auto t0 = Clock::now();
    const int rc = std::system(("\"" + exe + "\" > /dev/null").c_str());
    const double rt = seconds_since(t0);
    return {rc == 0 && rt < 60.0, std::string(rc == 0 ? "all properties hold" : "property failures") +
                                      ", 1000 cases each, " + fmt("%.2f", rt) + " s"};
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, Verdict>> results;
    auto record = [&](std::string name, const std::function<Verdict()>& fn) {
        try {
            results.emplace_back(std::move(name), fn());
        } catch (const std::exception& ex) {
            results.emplace_back(std::move(name), Verdict{false, std::string("exception: ") + ex.what()});
        }
        const auto& [n, v] = results.back();
        std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", n.c_str(), v.detail.c_str());
        std::fflush(stdout);
    };

    const harness::SimConfig cfg = harness::load_config(RFSIM_DEFAULT_CONFIG);

    record("1 closed-form charge and drain times", closed_form_oracles);
    record("2 charge-time estimate inverts the read rate", [&] { return estimator_inversion(cfg); });
    record("3 device vs reader charge-time correlation", [&] { return correlation(cfg); });
    record("4 T_c scales with d^2", [&] { return d_squared(cfg); });
    try {
        std::vector<std::pair<std::string, Verdict>> bench;
        benchmark_criteria(cfg, bench);
        for (auto& [n, v] : bench) {
            std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", n.c_str(), v.detail.c_str());
            results.emplace_back(std::move(n), std::move(v));
        }
    } catch (const std::exception& ex) {
        std::printf("FAIL 5 policy benchmark: exception: %s\n", ex.what());
        results.emplace_back("5", Verdict{false, ex.what()});
    }
    record("6 identical seed gives byte-identical outputs", [&] { return determinism(RFSIM_SIM_EXE, RFSIM_DEFAULT_CONFIG); });
    record("7 property suites", [] { return properties(RFSIM_PROPERTY_EXE); });

    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.second.pass; });
    std::printf("%zu/%zu criteria passed\n", results.size() - failed, results.size());
    return failed == 0 ? 0 : 1;
}
