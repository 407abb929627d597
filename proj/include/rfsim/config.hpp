#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rfsim/channel.hpp"
#include "rfsim/device.hpp"
#include "rfsim/energy.hpp"
#include "rfsim/reader.hpp"

namespace rfsim::harness {

using PolicyKind = device::SchedulingPolicy::Kind;

/// Every tunable in the units used by the config file. The module structs
/// (SI units) are derived on demand.
struct SimConfig {
    // channel.*
    double p_t_dbm = 30.0;
    double g_t_dbi = 9.0;
    double g_r_dbi = 2.0;
    double freq_mhz = 912.5;
    double eta = 0.002285754069651502;
    double shadowing_sigma_db = 0.0;

    // device.*
    double c_uf = 98.66614586077573;
    double v_charged = 2.4;
    double v_min = 1.8;
    double p_sleep_uw = 5.0;
    double p_active_mw = 2.0;
    double p_transmit_mw = 2.0;
    double t_execute_ms = 0.630;
    double t_t_mean_ms = 1.641;
    double t_t_sigma_ms = 0.635;

    // task.*
    int task_total_bytes = 1280;
    int task_fragment_bytes = 32;
    double task_us_per_byte = 62.5;

    // policy*
    PolicyKind policy = PolicyKind::Readme;
    int iem_sleep_ms = 30;
    int readme_default_ms = 30;

    // readme.*, reader.*
    double k_ms = 2.271;
    double tau = 1.1;
    double window_s = 1.0;
    double period_s = 1.0;
    double max_sleep_ms = 500.0;
    bool measure_during_task = false;
    double query_timeout_ms = 2.0;

    // sweep.*, benchmark.*, calibrate.*
    std::vector<double> sweep_distances{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    double sweep_window_s = 20.0;
    std::vector<double> benchmark_distances{0.2, 0.4, 0.6, 0.8};
    int trials = 10;
    std::vector<PolicyKind> policies{PolicyKind::Cem, PolicyKind::Iem, PolicyKind::Readme};
    double boot_timeout_s = 120.0;
    double trial_deadline_s = 600.0;
    int redraw_cap = 100;
    /// 0 selects 1000 / k_ms.
    double target_plateau_rr = 0.0;
    double target_onset_m = 0.21;

    /// Throws std::invalid_argument with the offending key.
    void validate() const;

    channel::ChannelParams channel() const;
    energy::DeviceConfig device() const;
    device::TaskSpec task() const;
    reader::ReaderConfig reader() const;
    device::SchedulingPolicy scheduling(PolicyKind kind) const;
    double plateau_target() const { return target_plateau_rr > 0.0 ? target_plateau_rr : 1000.0 / k_ms; }
};

/// Sets one dotted key from its text value. Unknown keys and malformed
/// values throw std::invalid_argument.
void apply_setting(SimConfig& cfg, std::string_view key, std::string_view value);

/// Parses `key = value` lines; `#` starts a comment. `origin` prefixes
/// error messages.
SimConfig parse_config(std::istream& in, std::string_view origin = "config");
SimConfig load_config(const std::string& path);

/// Full key=value dump; parse_config(format_config(c)) reproduces c.
std::string format_config(const SimConfig& cfg);

std::vector<double> parse_distance_list(std::string_view text);

enum class Scenario : std::uint8_t { Sweep, Correlate, Benchmark, Calibrate };

struct ExperimentConfig {
    Scenario scenario = Scenario::Sweep;
    std::vector<double> distances;
    int trials = 10;
    std::uint64_t seed = 1;
    SimConfig sim;
    std::string output_dir = ".";

    void validate() const;
};

}  // namespace rfsim::harness
