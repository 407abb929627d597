#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "rfsim/device.hpp"
#include "rfsim/simkernel.hpp"

namespace rfsim::reader {

using kernel::SimTime;

inline constexpr std::string_view kReaderEntity = "reader";

struct EstimatorConstants {
    /// Mean active plus transmit time of one cycle, ms.
    double k_ms = 2.271;
    double tau = 1.1;
    /// Estimate used when no read was seen in the window, ms.
    double max_estimate_ms = 500.0;

    void validate() const;
};

/// 1000/R - K in ms, clamped at 0; max_estimate_ms when R = 0.
double estimate_charge_time(double r_read, const EstimatorConstants& constants);

/// tau * T_c_est rounded up to whole milliseconds.
int compute_sleep_time(double tc_est_ms, double tau);

struct ReadRateWindow {
    double window_length_s = 1.0;
    int successes = 0;

    double r_read() const { return successes / window_length_s; }
};

struct ReaderConfig {
    SimTime query_timeout = SimTime::millis_exact(2);
    double window_s = 1.0;
    double period_s = 1.0;
    /// When false, windows that overlap task execution are skipped.
    bool measure_during_task = false;
    EstimatorConstants estimator;

    void validate() const;
};

struct InventoryOutcome {
    bool success = false;
    SimTime duration;
};

struct WriteRecord {
    SimTime time;
    double r_read = 0.0;
    double tc_est_ms = 0.0;
    int t_sleep_ms = 0;
    bool delivered = false;
};

/// `time_us,r_read,tc_est_ms,t_sleep_ms,delivered` with the version comment.
void write_write_log_csv(std::ostream& out, std::span<const WriteRecord> records);

/// Single-tag reader. Runs back-to-back inventory rounds; a silent round
/// ends early when the tag becomes ready, and the next query goes out on
/// the same tick.
class Reader {
public:
    Reader(kernel::Simulator& sim, device::Device& device, ReaderConfig cfg);

    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    /// One query now. Does not schedule a follow-up.
    InventoryOutcome inventory_round();

    void start_inventory();
    void stop_inventory();
    bool inventory_running() const { return running_; }

    /// Successful reads with time in [from, to).
    int count_successes(SimTime from, SimTime to) const;
    ReadRateWindow window(SimTime from, SimTime to) const;
    const std::vector<SimTime>& read_times() const { return reads_; }
    std::uint64_t silent_rounds() const { return silent_rounds_; }

    /// Stages 2 and 3: estimate, compute, Write; the dispatch is logged.
    WriteRecord dispatch_write(const ReadRateWindow& window);

    /// Every period: window ending now, then dispatch_write.
    void start_control_loop();
    void stop_control_loop();

    const std::vector<WriteRecord>& write_log() const { return writes_; }
    const ReaderConfig& config() const { return cfg_; }

    void set_read_listener(std::function<void(SimTime)> fn) { on_read_ = std::move(fn); }

private:
    void on_query();
    void on_device_ready();
    void on_window_close();

    kernel::Simulator& sim_;
    device::Device& device_;
    ReaderConfig cfg_;

    bool running_ = false;
    bool listening_ = false;
    kernel::EventHandle next_query_;

    bool loop_running_ = false;
    SimTime loop_start_;
    kernel::EventHandle next_window_;

    std::vector<SimTime> reads_;
    std::vector<WriteRecord> writes_;
    std::uint64_t silent_rounds_ = 0;
    std::function<void(SimTime)> on_read_;
};

}  // namespace rfsim::reader
