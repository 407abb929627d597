#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace rfsim::kernel {

/// Virtual time in integer microsecond ticks.
struct SimTime {
    std::int64_t us = 0;

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime other) const { return {us + other.us}; }
    constexpr SimTime operator-(SimTime other) const { return {us - other.us}; }
    constexpr SimTime& operator+=(SimTime other) {
        us += other.us;
        return *this;
    }

    constexpr double seconds() const { return static_cast<double>(us) * 1e-6; }
    constexpr double millis() const { return static_cast<double>(us) * 1e-3; }

    static constexpr SimTime micros(std::int64_t v) { return {v}; }
    static constexpr SimTime millis_exact(std::int64_t v) { return {v * 1000}; }
    static constexpr SimTime max() { return {std::numeric_limits<std::int64_t>::max()}; }

    /// Nearest tick.
    static SimTime from_seconds(double s);
    /// First tick at or after `s`.
    static SimTime ceil_seconds(double s);
};

enum class EventKind : std::uint8_t {
    PhaseTransition,
    ReaderCommand,
    TimerExpiry,
    WindowClose,
};

struct EventHandle {
    std::uint64_t seq = std::numeric_limits<std::uint64_t>::max();
    bool valid() const { return seq != std::numeric_limits<std::uint64_t>::max(); }
};

/// One trace record. `entity` and `label` must refer to storage with static
/// lifetime (string literals).
struct TraceEvent {
    SimTime time;
    std::string_view entity;
    std::string_view label;
    double detail = 0.0;

    bool operator==(const TraceEvent&) const = default;
};

/// Writes `time_us,entity,label,detail` records with a header line.
void write_trace_csv(std::ostream& out, std::span<const TraceEvent> events);

/// Distribution specification for Rng::sample. Validated on construction.
class Distribution {
public:
    enum class Kind : std::uint8_t { Uniform, Normal, TruncatedNormal };

    static Distribution uniform(double lo, double hi);
    static Distribution normal(double mean, double sigma);
    /// Normal(mean, sigma) conditioned on x >= lower.
    static Distribution truncated_normal(double mean, double sigma, double lower);

    Kind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }

private:
    Distribution(Kind k, double a, double b, double c) : kind_(k), a_(a), b_(b), c_(c) {}

    Kind kind_;
    double a_;
    double b_;
    double c_;
};

/// Seeded random source. The engine (mt19937_64) and all transforms are
/// specified here rather than through <random> distributions, whose output
/// is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01();
    double standard_normal();
    double sample(const Distribution& dist);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 finaliser; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Single-threaded discrete-event core. Events with equal due time are
/// delivered in insertion order.
class Simulator {
public:
    using Action = std::function<void()>;

    explicit Simulator(std::uint64_t seed);

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;
    Simulator(Simulator&&) = default;
    Simulator& operator=(Simulator&&) = default;

    /// Throws std::logic_error when `due` lies in the past.
    EventHandle schedule(SimTime due, EventKind kind, Action action);
    EventHandle schedule_in(SimTime delay, EventKind kind, Action action) {
        return schedule(now_ + delay, kind, std::move(action));
    }
    /// Returns false when the event was already delivered or cancelled.
    bool cancel(EventHandle handle);

    /// Delivers every event due at or before `t_end`, then sets the clock to
    /// `t_end` unless stop() was called from a handler, in which case the
    /// clock stays at the stopping event. The returned span covers the trace
    /// records emitted during this call and is invalidated by further emission.
    std::span<const TraceEvent> run_until(SimTime t_end);
    void stop() { stop_requested_ = true; }
    bool stopped() const { return stop_requested_; }

    SimTime now() const { return now_; }
    Rng& rng() { return rng_; }

    void emit(std::string_view entity, std::string_view label, double detail = 0.0);
    void set_trace_enabled(bool on) { trace_enabled_ = on; }
    const std::vector<TraceEvent>& trace() const { return trace_; }

    std::uint64_t scheduled_count() const { return scheduled_; }
    std::uint64_t delivered_count() const { return delivered_; }
    std::uint64_t cancelled_count() const { return cancelled_; }
    std::size_t pending_count() const { return heap_.size() - pending_cancelled_; }

private:
    struct Entry {
        SimTime due;
        std::uint64_t seq;
        EventKind kind;
        Action action;
    };
    struct Later {
        bool operator()(const Entry& x, const Entry& y) const {
            if (x.due != y.due) return x.due > y.due;
            return x.seq > y.seq;
        }
    };

    SimTime now_{};
    std::uint64_t next_seq_ = 0;
    std::vector<Entry> heap_;
    // Indexed by seq: 0 = pending, 1 = delivered, 2 = cancelled.
    std::vector<std::uint8_t> status_;
    std::size_t pending_cancelled_ = 0;
    std::uint64_t scheduled_ = 0;
    std::uint64_t delivered_ = 0;
    std::uint64_t cancelled_ = 0;
    bool stop_requested_ = false;
    bool trace_enabled_ = true;
    Rng rng_;
    std::vector<TraceEvent> trace_;
};

}  // namespace rfsim::kernel
