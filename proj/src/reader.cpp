#include "rfsim/reader.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace rfsim::reader {

using kernel::EventKind;

void EstimatorConstants::validate() const {
    if (!(k_ms > 0.0)) throw std::invalid_argument("estimator: K must be > 0");
    if (!(tau >= 1.0)) throw std::invalid_argument("estimator: tau must be >= 1");
    if (!(max_estimate_ms >= 0.0)) throw std::invalid_argument("estimator: cap must be >= 0");
}

double estimate_charge_time(double r_read, const EstimatorConstants& constants) {
    if (!(r_read >= 0.0)) throw std::invalid_argument("estimator: read rate must be >= 0");
    if (r_read == 0.0) return constants.max_estimate_ms;
    return std::max(0.0, 1000.0 / r_read - constants.k_ms);
}

int compute_sleep_time(double tc_est_ms, double tau) {
    if (!(tc_est_ms >= 0.0)) throw std::invalid_argument("sleep time: estimate must be >= 0");
    if (!(tau >= 1.0)) throw std::invalid_argument("sleep time: tau must be >= 1");
    // Products that land a rounding error above an integer stay on it.
    const double raw = tau * tc_est_ms;
    const double nearest = std::round(raw);
    if (std::fabs(raw - nearest) <= 1e-9 * std::max(1.0, raw)) return static_cast<int>(nearest);
    return static_cast<int>(std::ceil(raw));
}

void ReaderConfig::validate() const {
    if (query_timeout.us <= 0) throw std::invalid_argument("reader: query timeout must be > 0");
    if (!(window_s > 0.0)) throw std::invalid_argument("reader: window must be > 0");
    if (!(period_s > 0.0)) throw std::invalid_argument("reader: period must be > 0");
    estimator.validate();
}

void write_write_log_csv(std::ostream& out, std::span<const WriteRecord> records) {
    out << "# rf-intermit-sim v1\n";
    out << "time_us,r_read,tc_est_ms,t_sleep_ms,delivered\n";
    char buf[160];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%lld,%.6f,%.6f,%d,%d\n", static_cast<long long>(r.time.us),
                      r.r_read, r.tc_est_ms, r.t_sleep_ms, r.delivered ? 1 : 0);
        out << buf;
    }
}

Reader::Reader(kernel::Simulator& sim, device::Device& device, ReaderConfig cfg)
    : sim_(sim), device_(device), cfg_(cfg) {
    cfg_.validate();
    device_.set_ready_listener([this] { on_device_ready(); });
}

InventoryOutcome Reader::inventory_round() {
    if (const auto hold = device_.respond_inventory()) {
        reads_.push_back(sim_.now());
        sim_.emit(kReaderEntity, "read", hold->millis());
        if (on_read_) on_read_(sim_.now());
        return {true, *hold};
    }
    ++silent_rounds_;
    return {false, cfg_.query_timeout};
}

void Reader::start_inventory() {
    if (running_) return;
    running_ = true;
    next_query_ = sim_.schedule(sim_.now(), EventKind::ReaderCommand, [this] { on_query(); });
}

void Reader::stop_inventory() {
    running_ = false;
    listening_ = false;
    if (next_query_.valid()) sim_.cancel(next_query_);
    next_query_ = {};
}

void Reader::on_query() {
    next_query_ = {};
    if (!running_) return;
    const InventoryOutcome outcome = inventory_round();
    listening_ = !outcome.success;
    next_query_ = sim_.schedule(sim_.now() + outcome.duration, EventKind::ReaderCommand,
                                [this] { on_query(); });
}

void Reader::on_device_ready() {
    if (!running_ || !listening_) return;
    // The open slot sees the tag: re-query on this tick.
    if (next_query_.valid()) sim_.cancel(next_query_);
    listening_ = false;
    next_query_ = sim_.schedule(sim_.now(), EventKind::ReaderCommand, [this] { on_query(); });
}

int Reader::count_successes(SimTime from, SimTime to) const {
    const auto lo = std::lower_bound(reads_.begin(), reads_.end(), from);
    const auto hi = std::lower_bound(reads_.begin(), reads_.end(), to);
    return hi > lo ? static_cast<int>(hi - lo) : 0;
}

ReadRateWindow Reader::window(SimTime from, SimTime to) const {
    if (to <= from) throw std::invalid_argument("reader: empty window");
    return {(to - from).seconds(), count_successes(from, to)};
}

WriteRecord Reader::dispatch_write(const ReadRateWindow& window) {
    WriteRecord rec;
    rec.time = sim_.now();
    rec.r_read = window.r_read();
    rec.tc_est_ms = estimate_charge_time(rec.r_read, cfg_.estimator);
    rec.t_sleep_ms = compute_sleep_time(rec.tc_est_ms, cfg_.estimator.tau);
    sim_.emit(kReaderEntity, "write", rec.t_sleep_ms);
    rec.delivered = device_.handle_write_sleeptime(rec.t_sleep_ms);
    writes_.push_back(rec);
    return rec;
}

void Reader::start_control_loop() {
    if (loop_running_) return;
    loop_running_ = true;
    loop_start_ = sim_.now();
    next_window_ = sim_.schedule(sim_.now() + SimTime::from_seconds(cfg_.period_s),
                                 EventKind::WindowClose, [this] { on_window_close(); });
}

void Reader::stop_control_loop() {
    loop_running_ = false;
    if (next_window_.valid()) sim_.cancel(next_window_);
    next_window_ = {};
}

void Reader::on_window_close() {
    next_window_ = {};
    if (!loop_running_) return;
    const SimTime now = sim_.now();
    const SimTime from = std::max(loop_start_, now - SimTime::from_seconds(cfg_.window_s));
    bool usable = from < now;
    if (usable && !cfg_.measure_during_task) {
        const auto ended = device_.task_ended_at();
        const auto started = device_.task_started_at();
        const bool overlaps = device_.task_running() || (ended && *ended > from) ||
                              (started && *started > from);
        if (overlaps) {
            sim_.emit(kReaderEntity, "window_skipped");
            usable = false;
        }
    }
    if (usable) dispatch_write(window(from, now));
    next_window_ = sim_.schedule(now + SimTime::from_seconds(cfg_.period_s), EventKind::WindowClose,
                                 [this] { on_window_close(); });
}

}  // namespace rfsim::reader
