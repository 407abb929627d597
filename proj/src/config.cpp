#include "rfsim/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rfsim::harness {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* what) {
    throw std::invalid_argument(std::string(key) + ": " + what + " '" + std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view value) {
    // from_chars for double is missing on older libstdc++; strtod with a
    // full-consumption check instead.
    const std::string s(value);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
        bad_value(key, value, "expected a number, got");
    }
    return v;
}

int to_int(std::string_view key, std::string_view value) {
    int v = 0;
    const auto* first = value.data();
    const auto* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) bad_value(key, value, "expected an integer, got");
    return v;
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad_value(key, value, "expected true/false, got");
}

PolicyKind to_policy(std::string_view key, std::string_view value) {
    const auto p = device::parse_policy(value);
    if (!p) bad_value(key, value, "expected cem|iem|readme, got");
    return *p;
}

std::vector<PolicyKind> to_policies(std::string_view key, std::string_view value) {
    std::vector<PolicyKind> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        const auto comma = value.find(',', pos);
        const auto item = trim(value.substr(pos, comma == std::string_view::npos ? value.npos
                                                                                   : comma - pos));
        out.push_back(to_policy(key, item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string fmt_double(double v) {
    // Shortest text that round-trips.
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(xs[i]);
    }
    return out;
}

using Setter = std::function<void(SimConfig&, std::string_view, std::string_view)>;
using Getter = std::function<std::string(const SimConfig&)>;

struct Field {
    Setter set;
    Getter get;
};

template <typename T>
Field number_field(T SimConfig::*member) {
    if constexpr (std::is_same_v<T, int>) {
        return {[member](SimConfig& c, std::string_view k, std::string_view v) {
                    c.*member = to_int(k, v);
                },
                [member](const SimConfig& c) { return std::to_string(c.*member); }};
    } else {
        return {[member](SimConfig& c, std::string_view k, std::string_view v) {
                    c.*member = to_double(k, v);
                },
                [member](const SimConfig& c) { return fmt_double(c.*member); }};
    }
}

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = [] {
        std::map<std::string, Field, std::less<>> t;
        t["channel.p_t_dbm"] = number_field(&SimConfig::p_t_dbm);
        t["channel.g_t_dbi"] = number_field(&SimConfig::g_t_dbi);
        t["channel.g_r_dbi"] = number_field(&SimConfig::g_r_dbi);
        t["channel.freq_mhz"] = number_field(&SimConfig::freq_mhz);
        t["channel.eta"] = number_field(&SimConfig::eta);
        t["channel.shadowing_sigma_db"] = number_field(&SimConfig::shadowing_sigma_db);

        t["device.c_uf"] = number_field(&SimConfig::c_uf);
        t["device.v_charged"] = number_field(&SimConfig::v_charged);
        t["device.v_min"] = number_field(&SimConfig::v_min);
        t["device.p_sleep_uw"] = number_field(&SimConfig::p_sleep_uw);
        t["device.p_active_mw"] = number_field(&SimConfig::p_active_mw);
        t["device.p_transmit_mw"] = number_field(&SimConfig::p_transmit_mw);
        t["device.t_execute_ms"] = number_field(&SimConfig::t_execute_ms);
        t["device.t_t_mean_ms"] = number_field(&SimConfig::t_t_mean_ms);
        t["device.t_t_sigma_ms"] = number_field(&SimConfig::t_t_sigma_ms);

        t["task.total_bytes"] = number_field(&SimConfig::task_total_bytes);
        t["task.fragment_bytes"] = number_field(&SimConfig::task_fragment_bytes);
        t["task.us_per_byte"] = number_field(&SimConfig::task_us_per_byte);

        t["policy"] = {[](SimConfig& c, std::string_view k, std::string_view v) {
                           c.policy = to_policy(k, v);
                       },
                       [](const SimConfig& c) { return std::string(device::policy_name(c.policy)); }};
        t["policy.iem_sleep_ms"] = number_field(&SimConfig::iem_sleep_ms);
        t["policy.readme_default_ms"] = number_field(&SimConfig::readme_default_ms);

        t["readme.k_ms"] = number_field(&SimConfig::k_ms);
        t["readme.tau"] = number_field(&SimConfig::tau);
        t["readme.window_s"] = number_field(&SimConfig::window_s);
        t["readme.period_s"] = number_field(&SimConfig::period_s);
        t["readme.max_sleep_ms"] = number_field(&SimConfig::max_sleep_ms);
        t["readme.measure_during_task"] = {
            [](SimConfig& c, std::string_view k, std::string_view v) {
                c.measure_during_task = to_bool(k, v);
            },
            [](const SimConfig& c) { return std::string(c.measure_during_task ? "true" : "false"); }};
        t["reader.query_timeout_ms"] = number_field(&SimConfig::query_timeout_ms);

        t["sweep.distances"] = {[](SimConfig& c, std::string_view, std::string_view v) {
                                    c.sweep_distances = parse_distance_list(v);
                                },
                                [](const SimConfig& c) { return fmt_list(c.sweep_distances); }};
        t["sweep.window_s"] = number_field(&SimConfig::sweep_window_s);
        t["benchmark.distances"] = {[](SimConfig& c, std::string_view, std::string_view v) {
                                        c.benchmark_distances = parse_distance_list(v);
                                    },
                                    [](const SimConfig& c) { return fmt_list(c.benchmark_distances); }};
        t["benchmark.trials"] = number_field(&SimConfig::trials);
        t["benchmark.policies"] = {
            [](SimConfig& c, std::string_view k, std::string_view v) { c.policies = to_policies(k, v); },
            [](const SimConfig& c) {
                std::string out;
                for (std::size_t i = 0; i < c.policies.size(); ++i) {
                    if (i) out += ',';
                    out += device::policy_name(c.policies[i]);
                }
                return out;
            }};
        t["benchmark.boot_timeout_s"] = number_field(&SimConfig::boot_timeout_s);
        t["benchmark.trial_deadline_s"] = number_field(&SimConfig::trial_deadline_s);
        t["benchmark.redraw_cap"] = number_field(&SimConfig::redraw_cap);
        t["calibrate.target_plateau_rr"] = number_field(&SimConfig::target_plateau_rr);
        t["calibrate.target_onset_m"] = number_field(&SimConfig::target_onset_m);
        return t;
    }();
    return table;
}

void require(bool ok, const char* key, const char* what) {
    if (!ok) throw std::invalid_argument(std::string(key) + ": " + what);
}

}  // namespace

void SimConfig::validate() const {
    require(freq_mhz > 0.0, "channel.freq_mhz", "must be > 0");
    require(eta > 0.0 && eta <= 1.0, "channel.eta", "must lie in (0, 1]");
    require(shadowing_sigma_db >= 0.0, "channel.shadowing_sigma_db", "must be >= 0");
    require(c_uf > 0.0, "device.c_uf", "must be > 0");
    require(v_min > 0.0, "device.v_min", "must be > 0");
    require(v_charged > v_min, "device.v_charged", "must exceed device.v_min");
    require(p_sleep_uw > 0.0, "device.p_sleep_uw", "must be > 0");
    require(p_active_mw * 1e3 > p_sleep_uw, "device.p_active_mw", "must exceed p_sleep");
    require(p_transmit_mw > 0.0, "device.p_transmit_mw", "must be > 0");
    require(t_execute_ms > 0.0, "device.t_execute_ms", "must be > 0");
    require(t_t_mean_ms > 0.0, "device.t_t_mean_ms", "must be > 0");
    require(t_t_sigma_ms >= 0.0, "device.t_t_sigma_ms", "must be >= 0");
    require(task_total_bytes > 0, "task.total_bytes", "must be > 0");
    require(task_fragment_bytes > 0 && task_fragment_bytes <= task_total_bytes,
            "task.fragment_bytes", "must lie in [1, task.total_bytes]");
    require(task_us_per_byte > 0.0, "task.us_per_byte", "must be > 0");
    require(iem_sleep_ms >= 0, "policy.iem_sleep_ms", "must be >= 0");
    require(readme_default_ms >= 0, "policy.readme_default_ms", "must be >= 0");
    require(k_ms > 0.0, "readme.k_ms", "must be > 0");
    require(tau >= 1.0, "readme.tau", "must be >= 1");
    require(window_s > 0.0, "readme.window_s", "must be > 0");
    require(period_s > 0.0, "readme.period_s", "must be > 0");
    require(max_sleep_ms >= 0.0, "readme.max_sleep_ms", "must be >= 0");
    require(query_timeout_ms >= 0.001, "reader.query_timeout_ms", "must be >= 1 us");
    require(!sweep_distances.empty(), "sweep.distances", "must be non-empty");
    for (double d : sweep_distances) require(d > 0.0, "sweep.distances", "must be positive");
    require(sweep_window_s > 0.0, "sweep.window_s", "must be > 0");
    require(!benchmark_distances.empty(), "benchmark.distances", "must be non-empty");
    for (double d : benchmark_distances) require(d > 0.0, "benchmark.distances", "must be positive");
    require(trials >= 1, "benchmark.trials", "must be >= 1");
    require(!policies.empty(), "benchmark.policies", "must be non-empty");
    require(boot_timeout_s > 0.0, "benchmark.boot_timeout_s", "must be > 0");
    require(trial_deadline_s > 0.0, "benchmark.trial_deadline_s", "must be > 0");
    require(redraw_cap >= 0, "benchmark.redraw_cap", "must be >= 0");
    require(target_plateau_rr >= 0.0, "calibrate.target_plateau_rr", "must be >= 0");
    require(target_onset_m > 0.0, "calibrate.target_onset_m", "must be > 0");
}

channel::ChannelParams SimConfig::channel() const {
    channel::ChannelParams p;
    p.tx_power_w = channel::dbm_to_watts(p_t_dbm);
    p.tx_gain = channel::db_to_linear(g_t_dbi);
    p.rx_gain = channel::db_to_linear(g_r_dbi);
    p.wavelength_m = channel::wavelength_from_mhz(freq_mhz);
    p.efficiency = eta;
    p.shadowing_sigma_db = shadowing_sigma_db;
    p.validate();
    return p;
}

energy::DeviceConfig SimConfig::device() const {
    energy::DeviceConfig d;
    d.capacitance_f = c_uf * 1e-6;
    d.v_charged = v_charged;
    d.v_min = v_min;
    d.p_sleep_w = p_sleep_uw * 1e-6;
    d.p_active_w = p_active_mw * 1e-3;
    d.p_transmit_w = p_transmit_mw * 1e-3;
    d.t_execute_s = t_execute_ms * 1e-3;
    d.t_t_mean_s = t_t_mean_ms * 1e-3;
    d.t_t_sigma_s = t_t_sigma_ms * 1e-3;
    d.validate();
    return d;
}

device::TaskSpec SimConfig::task() const {
    return device::TaskSpec::from_bytes(task_total_bytes, task_fragment_bytes, task_us_per_byte);
}

reader::ReaderConfig SimConfig::reader() const {
    reader::ReaderConfig r;
    r.query_timeout = kernel::SimTime::from_seconds(query_timeout_ms * 1e-3);
    r.window_s = window_s;
    r.period_s = period_s;
    r.measure_during_task = measure_during_task;
    r.estimator = {k_ms, tau, max_sleep_ms};
    r.validate();
    return r;
}

device::SchedulingPolicy SimConfig::scheduling(PolicyKind kind) const {
    device::SchedulingPolicy p;
    p.kind = kind;
    p.iem_sleep = kernel::SimTime::millis_exact(iem_sleep_ms);
    return p;
}

void apply_setting(SimConfig& cfg, std::string_view key, std::string_view value) {
    const auto& table = fields();
    const auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
    it->second.set(cfg, key, trim(value));
}

SimConfig parse_config(std::istream& in, std::string_view origin) {
    SimConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        const std::string where = std::string(origin) + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string_view::npos) throw std::invalid_argument(where + "expected key = value");
        try {
            apply_setting(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

std::string format_config(const SimConfig& cfg) {
    std::ostringstream out;
    for (const auto& [key, field] : fields()) out << key << " = " << field.get(cfg) << '\n';
    return out.str();
}

std::vector<double> parse_distance_list(std::string_view text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item =
            trim(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
        const double d = to_double("distances", item);
        if (!(d > 0.0)) bad_value("distances", item, "must be positive, got");
        out.push_back(d);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

void ExperimentConfig::validate() const {
    sim.validate();
    if (distances.empty()) throw std::invalid_argument("experiment: distances must be non-empty");
    for (double d : distances) {
        if (!(d > 0.0)) throw std::invalid_argument("experiment: distances must be positive");
    }
    if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
}

}  // namespace rfsim::harness
