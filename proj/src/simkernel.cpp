#include "rfsim/simkernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rfsim::kernel {

SimTime SimTime::from_seconds(double s) {
    return {static_cast<std::int64_t>(std::llround(s * 1e6))};
}

SimTime SimTime::ceil_seconds(double s) {
    return {static_cast<std::int64_t>(std::ceil(s * 1e6))};
}

void write_trace_csv(std::ostream& out, std::span<const TraceEvent> events) {
    out << "time_us,entity,label,detail\n";
    char buf[64];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof buf, "%.9g", e.detail);
        out << e.time.us << ',' << e.entity << ',' << e.label << ',' << buf << '\n';
    }
}

Distribution Distribution::uniform(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw std::invalid_argument("uniform distribution needs finite lo < hi");
    }
    return {Kind::Uniform, lo, hi, 0.0};
}

Distribution Distribution::normal(double mean, double sigma) {
    if (!std::isfinite(mean) || !std::isfinite(sigma) || sigma < 0.0) {
        throw std::invalid_argument("normal distribution needs finite mean and sigma >= 0");
    }
    return {Kind::Normal, mean, sigma, 0.0};
}

Distribution Distribution::truncated_normal(double mean, double sigma, double lower) {
    if (!std::isfinite(mean) || !std::isfinite(sigma) || sigma < 0.0 || !std::isfinite(lower)) {
        throw std::invalid_argument("truncated normal needs finite parameters and sigma >= 0");
    }
    if (sigma == 0.0 && mean < lower) {
        throw std::invalid_argument("degenerate truncated normal has no mass above the bound");
    }
    return {Kind::TruncatedNormal, mean, sigma, lower};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::standard_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 is shifted into (0, 1] so log() stays finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Rng::sample(const Distribution& dist) {
    switch (dist.kind()) {
        case Distribution::Kind::Uniform:
            return dist.a() + (dist.b() - dist.a()) * uniform01();
        case Distribution::Kind::Normal:
            return dist.a() + dist.b() * standard_normal();
        case Distribution::Kind::TruncatedNormal: {
            if (dist.b() == 0.0) return dist.a();
            for (int i = 0; i < 1000; ++i) {
                const double x = dist.a() + dist.b() * standard_normal();
                if (x >= dist.c()) return x;
            }
            return dist.c();
        }
    }
    return 0.0;
}

Simulator::Simulator(std::uint64_t seed) : rng_(seed) {}

EventHandle Simulator::schedule(SimTime due, EventKind kind, Action action) {
    if (due < now_) {
        throw std::logic_error("event scheduled in the past: due " + std::to_string(due.us) +
                               " us, clock " + std::to_string(now_.us) + " us");
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push_back(Entry{due, seq, kind, std::move(action)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    status_.push_back(0);
    ++scheduled_;
    return EventHandle{seq};
}

bool Simulator::cancel(EventHandle handle) {
    if (!handle.valid() || handle.seq >= status_.size() || status_[handle.seq] != 0) {
        return false;
    }
    status_[handle.seq] = 2;
    ++cancelled_;
    ++pending_cancelled_;
    return true;
}

std::span<const TraceEvent> Simulator::run_until(SimTime t_end) {
    if (t_end < now_) {
        throw std::logic_error("run_until target lies before the current clock");
    }
    const std::size_t first = trace_.size();
    stop_requested_ = false;
    while (!heap_.empty() && heap_.front().due <= t_end) {
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        Entry entry = std::move(heap_.back());
        heap_.pop_back();
        if (status_[entry.seq] == 2) {
            --pending_cancelled_;
            continue;
        }
        now_ = entry.due;
        status_[entry.seq] = 1;
        ++delivered_;
        entry.action();
        if (stop_requested_) {
            return {trace_.data() + first, trace_.size() - first};
        }
    }
    now_ = t_end;
    return {trace_.data() + first, trace_.size() - first};
}

void Simulator::emit(std::string_view entity, std::string_view label, double detail) {
    if (trace_enabled_) trace_.push_back(TraceEvent{now_, entity, label, detail});
}

}  // namespace rfsim::kernel
