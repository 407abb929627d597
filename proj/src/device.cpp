#include "rfsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rfsim::device {

namespace {

using kernel::EventKind;

// Trace labels. Phase-entry labels are mapped back by phase_entered_by.
constexpr std::string_view kCharging = "charging";
constexpr std::string_view kBoot = "boot";
constexpr std::string_view kWake = "wake";
constexpr std::string_view kWait = "wait_for_query";
constexpr std::string_view kTransmit = "transmit";
constexpr std::string_view kLpm = "lpm_sleep";
constexpr std::string_view kBrownout = "brownout";

}  // namespace

std::string_view phase_name(DevicePhase phase) {
    switch (phase) {
        case DevicePhase::Off: return "OFF";
        case DevicePhase::Charging: return "CHARGING";
        case DevicePhase::Active: return "ACTIVE";
        case DevicePhase::WaitForQuery: return "WAIT_FOR_QUERY";
        case DevicePhase::Transmit: return "TRANSMIT";
        case DevicePhase::LpmSleep: return "LPM_SLEEP";
    }
    return "?";
}

bool is_legal_transition(DevicePhase from, DevicePhase to) {
    using P = DevicePhase;
    if (to == P::Off) return from != P::Off;
    switch (from) {
        case P::Off: return to == P::Charging;
        case P::Charging: return to == P::Active;
        case P::Active: return to == P::WaitForQuery || to == P::LpmSleep;
        case P::WaitForQuery: return to == P::Transmit;
        case P::Transmit: return to == P::Charging;
        case P::LpmSleep: return to == P::Active;
    }
    return false;
}

std::optional<DevicePhase> phase_entered_by(std::string_view label) {
    if (label == kCharging) return DevicePhase::Charging;
    if (label == kBoot || label == kWake) return DevicePhase::Active;
    if (label == kWait) return DevicePhase::WaitForQuery;
    if (label == kTransmit) return DevicePhase::Transmit;
    if (label == kLpm) return DevicePhase::LpmSleep;
    if (label == kBrownout) return DevicePhase::Off;
    return std::nullopt;
}

void TaskSpec::validate() const {
    if (total_work.us <= 0) throw std::invalid_argument("task: total work must be > 0");
    if (fragment_work.us <= 0) throw std::invalid_argument("task: fragment work must be > 0");
    if (fragment_work > total_work) {
        throw std::invalid_argument("task: fragment work exceeds total work");
    }
    if (!(energy_per_us >= 0.0)) throw std::invalid_argument("task: energy per us must be >= 0");
}

int TaskSpec::fragments() const {
    return static_cast<int>((total_work.us + fragment_work.us - 1) / fragment_work.us);
}

SimTime TaskSpec::fragment_duration(int index) const {
    const int n = fragments();
    if (index < 0 || index >= n) throw std::out_of_range("task: fragment index out of range");
    if (index < n - 1) return fragment_work;
    return total_work - SimTime::micros(fragment_work.us * (n - 1));
}

TaskSpec TaskSpec::from_bytes(int total_bytes, int fragment_bytes, double us_per_byte) {
    if (total_bytes <= 0 || fragment_bytes <= 0 || !(us_per_byte > 0.0)) {
        throw std::invalid_argument("task: byte counts and rate must be > 0");
    }
    TaskSpec spec;
    spec.total_work = SimTime::micros(std::llround(total_bytes * us_per_byte));
    spec.fragment_work = SimTime::micros(std::llround(fragment_bytes * us_per_byte));
    spec.validate();
    return spec;
}

std::string_view policy_name(SchedulingPolicy::Kind kind) {
    switch (kind) {
        case SchedulingPolicy::Kind::Cem: return "cem";
        case SchedulingPolicy::Kind::Iem: return "iem";
        case SchedulingPolicy::Kind::Readme: return "readme";
    }
    return "?";
}

std::optional<SchedulingPolicy::Kind> parse_policy(std::string_view name) {
    if (name == "cem") return SchedulingPolicy::Kind::Cem;
    if (name == "iem") return SchedulingPolicy::Kind::Iem;
    if (name == "readme") return SchedulingPolicy::Kind::Readme;
    return std::nullopt;
}

SleeptimeRegister::SleeptimeRegister(int default_ms) : default_ms_(default_ms), value_ms_(default_ms) {
    if (default_ms < 0) throw std::invalid_argument("sleeptime: default must be >= 0");
}

void SleeptimeRegister::write(int ms) {
    if (ms < 0) throw std::invalid_argument("sleeptime: value must be >= 0");
    value_ms_ = ms;
}

Device::Device(kernel::Simulator& sim, energy::DeviceConfig cfg, int sleeptime_default_ms)
    : sim_(sim),
      cfg_(cfg),
      t_t_dist_(kernel::Distribution::uniform(0.0, 1.0)),
      sleeptime_(sleeptime_default_ms) {
    cfg_.validate();
    // Transmit hold never drops below 0.1 ms.
    t_t_dist_ = kernel::Distribution::truncated_normal(cfg_.t_t_mean_s, cfg_.t_t_sigma_s, 1e-4);
}

void Device::power_on(double initial_joules) {
    if (phase_ != DevicePhase::Off || booted_) throw std::logic_error("device: already powered on");
    if (!(initial_joules >= 0.0)) throw std::invalid_argument("device: initial energy must be >= 0");
    joules_ = std::min(initial_joules, cfg_.e_max());
    last_sync_ = sim_.now();
    enter(DevicePhase::Charging, kCharging);
    set_draw(cfg_.p_sleep_w);
}

void Device::set_harvested_power(double watts) {
    if (!(watts >= 0.0)) throw std::invalid_argument("device: harvested power must be >= 0");
    sync();
    p_in_ = watts;
    reschedule_threshold();
}

double Device::energy_now() const {
    const double dt = (sim_.now() - last_sync_).seconds();
    return energy::integrate(cfg_, {joules_, cfg_.capacitance_f}, p_in_, p_out_, dt).joules;
}

double Device::voltage_now() const { return energy::voltage_of(energy_now(), cfg_.capacitance_f); }

void Device::sync() {
    const double dt = (sim_.now() - last_sync_).seconds();
    joules_ = energy::integrate(cfg_, {joules_, cfg_.capacitance_f}, p_in_, p_out_, dt).joules;
    last_sync_ = sim_.now();
}

void Device::set_draw(double watts) {
    sync();
    p_out_ = watts;
    reschedule_threshold();
}

void Device::reschedule_threshold() {
    if (threshold_event_.valid()) sim_.cancel(threshold_event_);
    threshold_event_ = {};
    if (phase_ == DevicePhase::Off) return;

    const double net = p_in_ - p_out_;
    if (phase_ == DevicePhase::Charging && net > 0.0) {
        const double t = energy::time_to_reach(joules_, cfg_.e_max(), net);
        if (energy::is_infinite(t) || t > 1e9) return;
        threshold_event_ = sim_.schedule(sim_.now() + SimTime::ceil_seconds(t),
                                         EventKind::PhaseTransition, [this] { on_boot(); });
        return;
    }
    if (!booted_ || net >= 0.0) return;
    const double t = joules_ < cfg_.e_min() ? 0.0 : energy::time_to_reach(joules_, cfg_.e_min(), net);
    if (energy::is_infinite(t) || t > 1e9) return;
    // First tick strictly below the threshold.
    const auto ticks = static_cast<std::int64_t>(std::floor(std::max(t, 0.0) * 1e6)) + 1;
    threshold_event_ = sim_.schedule(sim_.now() + SimTime::micros(ticks),
                                     EventKind::PhaseTransition, [this] { on_brownout(); });
}

void Device::enter(DevicePhase to, std::string_view label, double detail) {
    if (!is_legal_transition(phase_, to)) {
        throw std::logic_error(std::string("device: illegal transition ") +
                               std::string(phase_name(phase_)) + " -> " +
                               std::string(phase_name(to)));
    }
    phase_ = to;
    sim_.emit(kDeviceEntity, label, detail);
}

void Device::cancel_phase_timer() {
    if (phase_timer_.valid()) sim_.cancel(phase_timer_);
    phase_timer_ = {};
}

// After a transmit the tag stays booted in CHARGING and re-enters ACTIVE once
// the capacitor is back at the ceiling.
void Device::on_boot() {
    threshold_event_ = {};
    sync();
    if (joules_ < cfg_.e_max() * (1.0 - 1e-12)) {
        reschedule_threshold();
        return;
    }
    joules_ = cfg_.e_max();
    const bool cold = !booted_;
    booted_ = true;
    if (cold) ++boots_;
    enter(DevicePhase::Active, kBoot, cold ? 1.0 : 0.0);
    if (task_armed_ && !task_running_) {
        start_task();
    } else {
        begin_inventory_work();
    }
}

void Device::on_brownout() {
    threshold_event_ = {};
    sync();
    cancel_phase_timer();
    enter(DevicePhase::Off, kBrownout);
    ++brownouts_;
    booted_ = false;
    sleeptime_.reset();
    if (task_running_) {
        task_running_ = false;
        task_end_ = sim_.now();
        sim_.emit(kDeviceEntity, "task_fail", fragments_done_);
        if (on_task_) {
            on_task_({TaskEvent::Outcome::Failed, sim_.now(), sim_.now() - *task_start_,
                      fragments_done_});
        }
    }
    enter(DevicePhase::Charging, kCharging);
    set_draw(cfg_.p_sleep_w);
}

void Device::begin_inventory_work() {
    set_draw(cfg_.p_active_w);
    phase_timer_ = sim_.schedule(sim_.now() + SimTime::from_seconds(cfg_.t_execute_s),
                                 EventKind::TimerExpiry, [this] {
                                     phase_timer_ = {};
                                     enter_wait_for_query();
                                 });
}

void Device::enter_wait_for_query() {
    enter(DevicePhase::WaitForQuery, kWait);
    set_draw(cfg_.p_sleep_w);
    if (on_ready_) on_ready_();
}

std::optional<SimTime> Device::respond_inventory() {
    if (phase_ != DevicePhase::WaitForQuery) return std::nullopt;
    SimTime hold = SimTime::from_seconds(sim_.rng().sample(t_t_dist_));
    if (hold.us < 1) hold = SimTime::micros(1);
    enter(DevicePhase::Transmit, kTransmit, hold.millis());
    set_draw(cfg_.p_transmit_w);
    phase_timer_ = sim_.schedule(sim_.now() + hold, EventKind::TimerExpiry, [this] {
        phase_timer_ = {};
        on_transmit_end();
    });
    return hold;
}

void Device::on_transmit_end() {
    // Recharge the cycle's drain before the next boot.
    enter(DevicePhase::Charging, kCharging);
    set_draw(cfg_.p_sleep_w);
}

bool Device::handle_write_sleeptime(int ms) {
    if (!booted_) {
        sim_.emit(kDeviceEntity, "sleeptime_lost", ms);
        return false;
    }
    sleeptime_.write(ms);
    sim_.emit(kDeviceEntity, "sleeptime_write", ms);
    return true;
}

bool Device::handle_task_command(const TaskSpec& spec, SchedulingPolicy policy) {
    spec.validate();
    if (!booted_) {
        sim_.emit(kDeviceEntity, "task_lost");
        return false;
    }
    arm_task(spec, policy);
    return true;
}

void Device::arm_task(const TaskSpec& spec, SchedulingPolicy policy) {
    spec.validate();
    if (task_running_) throw std::logic_error("device: task already running");
    task_ = spec;
    policy_ = policy;
    task_armed_ = true;
    sim_.emit(kDeviceEntity, "task_armed");
}

double Device::task_power() const {
    return task_.energy_per_us > 0.0 ? task_.energy_per_us * 1e6 : cfg_.p_active_w;
}

void Device::start_task() {
    task_running_ = true;
    fragments_done_ = 0;
    task_start_ = sim_.now();
    task_end_.reset();
    sim_.emit(kDeviceEntity, "task_start");
    begin_fragment();
}

void Device::begin_fragment() {
    const SimTime work = policy_.kind == SchedulingPolicy::Kind::Cem
                             ? task_.total_work
                             : task_.fragment_duration(fragments_done_);
    set_draw(task_power());
    phase_timer_ = sim_.schedule(sim_.now() + work, EventKind::TimerExpiry, [this, work] {
        phase_timer_ = {};
        on_fragment_done(work);
    });
}

void Device::on_fragment_done(SimTime work) {
    fragments_done_ = policy_.kind == SchedulingPolicy::Kind::Cem ? task_.fragments()
                                                                  : fragments_done_ + 1;
    sim_.emit(kDeviceEntity, "fragment_done", work.millis());
    if (fragments_done_ >= task_.fragments()) {
        task_running_ = false;
        task_armed_ = false;
        task_end_ = sim_.now();
        const SimTime latency = sim_.now() - *task_start_;
        sim_.emit(kDeviceEntity, "task_done", latency.millis());
        if (on_task_) on_task_({TaskEvent::Outcome::Done, sim_.now(), latency, fragments_done_});
        enter_wait_for_query();
        return;
    }
    const SimTime sleep = policy_.kind == SchedulingPolicy::Kind::Iem
                              ? policy_.iem_sleep
                              : SimTime::millis_exact(sleeptime_.value_ms());
    if (sleep.us == 0) {
        begin_fragment();
        return;
    }
    enter(DevicePhase::LpmSleep, kLpm, sleep.millis());
    set_draw(cfg_.p_sleep_w);
    phase_timer_ = sim_.schedule(sim_.now() + sleep, EventKind::TimerExpiry, [this] {
        phase_timer_ = {};
        enter(DevicePhase::Active, kWake);
        begin_fragment();
    });
}

}  // namespace rfsim::device
