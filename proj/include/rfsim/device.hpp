#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "rfsim/energy.hpp"
#include "rfsim/simkernel.hpp"

namespace rfsim::device {

using kernel::SimTime;

enum class DevicePhase : std::uint8_t { Off, Charging, Active, WaitForQuery, Transmit, LpmSleep };

std::string_view phase_name(DevicePhase phase);

/// Legal edges of the power cycle. Every phase may fall to Off on brownout.
bool is_legal_transition(DevicePhase from, DevicePhase to);

/// Maps a device trace label to the phase it enters, if it is a phase label.
std::optional<DevicePhase> phase_entered_by(std::string_view label);

inline constexpr std::string_view kDeviceEntity = "device";

/// Long-running task split into fragments. Work is pure execution time.
struct TaskSpec {
    SimTime total_work = SimTime::micros(80'000);
    SimTime fragment_work = SimTime::micros(2'000);
    /// Joules per microsecond of execution; 0 means P_active * 1 us.
    double energy_per_us = 0.0;

    void validate() const;
    int fragments() const;
    /// Work of fragment `index`; the last fragment takes the remainder.
    SimTime fragment_duration(int index) const;

    /// 1280-byte MAC, 32-byte fragments, 62.5 us/byte gives the default.
    static TaskSpec from_bytes(int total_bytes, int fragment_bytes, double us_per_byte);
};

struct SchedulingPolicy {
    enum class Kind : std::uint8_t { Cem, Iem, Readme };

    Kind kind = Kind::Readme;
    SimTime iem_sleep = SimTime::millis_exact(30);

    static SchedulingPolicy cem() { return {Kind::Cem, {}}; }
    static SchedulingPolicy iem(SimTime sleep) { return {Kind::Iem, sleep}; }
    static SchedulingPolicy readme() { return {Kind::Readme, {}}; }
};

std::string_view policy_name(SchedulingPolicy::Kind kind);
std::optional<SchedulingPolicy::Kind> parse_policy(std::string_view name);

/// Volatile sleep-duration register written by the reader.
class SleeptimeRegister {
public:
    explicit SleeptimeRegister(int default_ms = 30);

    int value_ms() const { return value_ms_; }
    int default_ms() const { return default_ms_; }
    void write(int ms);
    /// Power loss: back to the default.
    void reset() { value_ms_ = default_ms_; }

private:
    int default_ms_;
    int value_ms_;
};

struct TaskEvent {
    enum class Outcome : std::uint8_t { Done, Failed };

    Outcome outcome;
    SimTime time;
    /// now - task_start; meaningful for Done.
    SimTime latency;
    int fragments_done;
};

/// CRFID tag model driven by the simulator. The capacitor is integrated
/// exactly between events; threshold crossings (boot, brownout) are
/// scheduled at the first tick on the far side of the threshold.
class Device {
public:
    Device(kernel::Simulator& sim, energy::DeviceConfig cfg, int sleeptime_default_ms = 30);

    Device(const Device&) = delete;
    Device& operator=(const Device&) = delete;

    /// Starts the power cycle from OFF with the given capacitor energy.
    void power_on(double initial_joules = 0.0);

    /// Changes the harvested power from now on.
    void set_harvested_power(double watts);
    double harvested_power() const { return p_in_; }

    DevicePhase phase() const { return phase_; }
    /// True once booted and until the next brownout; volatile state is
    /// retained only while powered.
    bool powered() const { return booted_; }
    double energy_now() const;
    double voltage_now() const;
    const energy::DeviceConfig& config() const { return cfg_; }

    /// Reply to a reader query. Only a tag waiting for a query answers; the
    /// returned value is the transmit hold time.
    std::optional<SimTime> respond_inventory();

    /// Returns false (write lost) when the device is unpowered.
    bool handle_write_sleeptime(int ms);
    const SleeptimeRegister& sleeptime() const { return sleeptime_; }

    /// Arms the task; it commences at the next boot. Returns false (command
    /// lost) when unpowered.
    bool handle_task_command(const TaskSpec& spec, SchedulingPolicy policy);
    /// Arms the task regardless of power, as if built into the firmware; it
    /// commences at the next boot.
    void arm_task(const TaskSpec& spec, SchedulingPolicy policy);
    bool task_armed() const { return task_armed_; }
    bool task_running() const { return task_running_; }
    /// Start time of the most recent task attempt.
    std::optional<SimTime> task_started_at() const { return task_start_; }
    /// End of the most recent task attempt (done or failed).
    std::optional<SimTime> task_ended_at() const { return task_end_; }

    void set_ready_listener(std::function<void()> fn) { on_ready_ = std::move(fn); }
    void set_task_listener(std::function<void(const TaskEvent&)> fn) { on_task_ = std::move(fn); }

    int brownout_count() const { return brownouts_; }
    int boot_count() const { return boots_; }

private:
    void sync();
    void set_draw(double watts);
    void reschedule_threshold();
    void enter(DevicePhase to, std::string_view label, double detail = 0.0);
    void cancel_phase_timer();

    void on_boot();
    void on_brownout();
    void begin_inventory_work();
    void enter_wait_for_query();
    void on_transmit_end();

    void start_task();
    void begin_fragment();
    void on_fragment_done(SimTime work);
    double task_power() const;

    kernel::Simulator& sim_;
    energy::DeviceConfig cfg_;
    kernel::Distribution t_t_dist_;

    DevicePhase phase_ = DevicePhase::Off;
    double joules_ = 0.0;
    SimTime last_sync_{};
    double p_in_ = 0.0;
    double p_out_ = 0.0;
    bool booted_ = false;
    SleeptimeRegister sleeptime_;

    kernel::EventHandle phase_timer_;
    kernel::EventHandle threshold_event_;

    bool task_armed_ = false;
    bool task_running_ = false;
    TaskSpec task_;
    SchedulingPolicy policy_;
    int fragments_done_ = 0;
    std::optional<SimTime> task_start_;
    std::optional<SimTime> task_end_;

    std::function<void()> on_ready_;
    std::function<void(const TaskEvent&)> on_task_;

    int brownouts_ = 0;
    int boots_ = 0;
};

}  // namespace rfsim::device
