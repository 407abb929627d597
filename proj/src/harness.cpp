#include "rfsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rfsim/channel.hpp"

namespace rfsim::harness {

using kernel::SimTime;

namespace {

constexpr std::uint64_t kJitterStream = 1;
constexpr std::uint64_t kChannelStream = 2;

SimConfig noiseless(SimConfig cfg) {
    cfg.shadowing_sigma_db = 0.0;
    return cfg;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace

Testbed::Testbed(const SimConfig& cfg, double distance_m, std::uint64_t seed)
    : cfg_(cfg), sim_(kernel::mix_seed(seed, kJitterStream)) {
    cfg_.validate();
    kernel::Rng channel_rng(kernel::mix_seed(seed, kChannelStream));
    shadow_ = channel::shadowing_factor(cfg_.shadowing_sigma_db, channel_rng);
    device_ = std::make_unique<device::Device>(sim_, cfg_.device(), cfg_.readme_default_ms);
    reader_ = std::make_unique<reader::Reader>(sim_, *device_, cfg_.reader());
    set_distance(distance_m);
}

void Testbed::set_distance(double distance_m) {
    distance_m_ = distance_m;
    p_charge_ = channel::harvested_power_noiseless(cfg_.channel(), distance_m) * shadow_;
    device_->set_harvested_power(p_charge_);
}

bool TimingRecord::booted() const { return !energy::is_infinite(tc_ms); }

TimingRecord measure_steady_state(const SimConfig& cfg, double distance_m, std::uint64_t seed,
                                  double window_s) {
    if (!(window_s > 0.0)) throw std::invalid_argument("sweep: window must be > 0");
    Testbed tb(cfg, distance_m, seed);
    auto& sim = tb.sim();
    auto& rd = tb.reader();
    const reader::EstimatorConstants est = cfg.reader().estimator;

    TimingRecord rec;
    rec.d_m = distance_m;

    std::optional<SimTime> first_read;
    rd.set_read_listener([&](SimTime t) {
        if (!first_read) {
            first_read = t;
            sim.stop();
        }
    });
    tb.device().power_on();
    rd.start_inventory();
    sim.run_until(SimTime::from_seconds(cfg.boot_timeout_s));
    rd.set_read_listener({});

    if (!first_read) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        rec.tc_ms = energy::kInfinite;
        rec.ta_ms = nan;
        rec.tt_ms = nan;
        rec.rr_reader = 0.0;
        rec.rr_device = 0.0;
        rec.tc_est_ms = reader::estimate_charge_time(0.0, est);
        return rec;
    }

    const SimTime t0 = *first_read;
    const SimTime t1 = t0 + SimTime::from_seconds(window_s);
    const std::size_t trace_from = sim.trace().size();
    sim.run_until(t1);

    // Cycle = charging -> boot -> wait_for_query -> charging, all inside
    // the window.
    std::vector<double> tc, ta, tt;
    constexpr std::int64_t kNone = -1;
    std::int64_t charge_at = kNone, boot_at = kNone, wait_at = kNone;
    const auto ms = [](std::int64_t us) { return static_cast<double>(us) * 1e-3; };
    const auto& trace = sim.trace();
    for (std::size_t i = trace_from; i < trace.size(); ++i) {
        const auto& ev = trace[i];
        if (ev.entity != device::kDeviceEntity || ev.time >= t1) continue;
        const auto phase = device::phase_entered_by(ev.label);
        if (!phase) continue;
        switch (*phase) {
            case device::DevicePhase::Charging:
                if (charge_at != kNone && boot_at != kNone && wait_at != kNone) {
                    tc.push_back(ms(boot_at - charge_at));
                    ta.push_back(ms(wait_at - boot_at));
                    tt.push_back(ms(ev.time.us - wait_at));
                }
                charge_at = ev.time.us;
                boot_at = wait_at = kNone;
                break;
            case device::DevicePhase::Active:
                if (charge_at != kNone && boot_at == kNone && ev.label == "boot") boot_at = ev.time.us;
                break;
            case device::DevicePhase::WaitForQuery:
                if (boot_at != kNone) wait_at = ev.time.us;
                break;
            case device::DevicePhase::Off:
                charge_at = boot_at = wait_at = kNone;
                break;
            default: break;
        }
    }

    rec.cycles = static_cast<int>(tc.size());
    rec.rr_reader = rd.window(t0, t1).r_read();
    rec.tc_est_ms = reader::estimate_charge_time(rec.rr_reader, est);
    if (tc.empty()) {
        // Booted once but never completed a cycle inside the window.
        rec.tc_ms = energy::kInfinite;
        rec.ta_ms = std::numeric_limits<double>::quiet_NaN();
        rec.tt_ms = std::numeric_limits<double>::quiet_NaN();
        rec.rr_device = 0.0;
        return rec;
    }
    rec.tc_ms = mean(tc);
    rec.ta_ms = mean(ta);
    rec.tt_ms = mean(tt);
    rec.rr_device = 1000.0 / (rec.tc_ms + rec.ta_ms + rec.tt_ms);
    return rec;
}

std::vector<TimingRecord> run_distance_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<TimingRecord> rows;
    rows.reserve(cfg.distances.size());
    for (std::size_t i = 0; i < cfg.distances.size(); ++i) {
        rows.push_back(measure_steady_state(cfg.sim, cfg.distances[i], kernel::mix_seed(cfg.seed, i),
                                            cfg.sim.sweep_window_s));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const TimingRecord& a, const TimingRecord& b) { return a.d_m < b.d_m; });
    return rows;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<LinearFit> fit_tc_vs_d_squared(std::span<const TimingRecord> rows) {
    double rr_max = 0.0;
    for (const auto& r : rows) {
        if (r.booted()) rr_max = std::max(rr_max, r.rr_reader);
    }
    std::vector<double> x, y;
    for (const auto& r : rows) {
        if (r.booted() && r.rr_reader < 0.9 * rr_max) {
            x.push_back(r.d_m * r.d_m);
            y.push_back(r.tc_ms);
        }
    }
    if (x.size() < 3) return std::nullopt;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

CorrelationResult run_correlation_study(const ExperimentConfig& cfg) {
    CorrelationResult out;
    std::vector<double> dev, est;
    for (const auto& row : run_distance_sweep(cfg)) {
        if (!row.booted()) {
            out.excluded_distances.push_back(row.d_m);
            continue;
        }
        out.rows.push_back(row);
        dev.push_back(row.tc_ms);
        est.push_back(row.tc_est_ms);
    }
    if (dev.size() < 2) {
        out.warning = "fewer than two distances with a finite charge time";
        return out;
    }
    out.coefficient = pearson(dev, est);
    if (!out.coefficient) {
        out.warning = "zero variance in charge time (single-regime data)";
    } else {
        const auto [lo, hi] = std::minmax_element(dev.begin(), dev.end());
        if (*hi - *lo < 0.05) out.warning = "near-zero variance in charge time (single-regime data)";
    }
    return out;
}

namespace {

struct AttemptOutcome {
    bool commenced = false;
    bool success = false;
    std::optional<double> latency_ms;
    int brownouts = 0;
};

AttemptOutcome run_attempt(const SimConfig& cfg, double distance_m, PolicyKind policy,
                           std::uint64_t seed) {
    Testbed tb(cfg, distance_m, seed);
    auto& sim = tb.sim();
    auto& dev = tb.device();
    auto& rd = tb.reader();
    const device::TaskSpec task = cfg.task();
    const device::SchedulingPolicy sched = cfg.scheduling(policy);

    AttemptOutcome out;
    std::optional<SimTime> first_read;
    bool command_pending = false;
    bool command_sent = false;

    auto send_command = [&] {
        if (dev.task_running() || command_sent) return;
        if (policy == PolicyKind::Readme && !rd.write_log().empty() && !rd.write_log().back().delivered) {
            rd.dispatch_write(rd.window(*first_read, *first_read + SimTime::from_seconds(cfg.window_s)));
        }
        if (dev.handle_task_command(task, sched)) {
            command_sent = true;
            command_pending = false;
        }
    };

    rd.set_read_listener([&](SimTime t) {
        if (!first_read) {
            first_read = t;
            sim.stop();
            return;
        }
        if (command_pending) send_command();
    });
    dev.set_task_listener([&](const device::TaskEvent& ev) {
        out.commenced = true;
        out.success = ev.outcome == device::TaskEvent::Outcome::Done;
        if (out.success) out.latency_ms = ev.latency.millis();
        sim.stop();
    });

    dev.power_on();
    rd.start_inventory();
    sim.run_until(SimTime::from_seconds(cfg.boot_timeout_s));
    if (!first_read) return out;

    const SimTime window_end = *first_read + SimTime::from_seconds(cfg.window_s);
    sim.schedule(window_end, kernel::EventKind::ReaderCommand, [&] {
        if (policy == PolicyKind::Readme) {
            rd.dispatch_write(rd.window(*first_read, window_end));
            rd.start_control_loop();
        }
        command_pending = true;
        send_command();
    });
    sim.run_until(window_end + SimTime::from_seconds(cfg.trial_deadline_s));
    out.brownouts = dev.brownout_count();
    if (!out.commenced && dev.task_running()) out.commenced = true;
    return out;
}

}  // namespace

TrialResult run_trial(const SimConfig& cfg, double distance_m, PolicyKind policy,
                      std::uint64_t seed) {
    TrialResult r;
    r.policy = policy;
    r.d_m = distance_m;
    for (int redraw = 0; redraw <= cfg.redraw_cap; ++redraw) {
        const AttemptOutcome a =
            run_attempt(cfg, distance_m, policy, redraw == 0 ? seed : kernel::mix_seed(seed, redraw));
        r.redraws = redraw;
        r.brownouts = a.brownouts;
        if (a.commenced) {
            r.commenced = true;
            r.success = a.success;
            r.latency_ms = a.latency_ms;
            return r;
        }
    }
    return r;
}

BenchmarkResult run_policy_benchmark(const ExperimentConfig& cfg,
                                     std::span<const PolicyKind> policies) {
    cfg.validate();
    if (policies.empty()) throw std::invalid_argument("benchmark: no policies");
    BenchmarkResult out;
    for (PolicyKind policy : policies) {
        for (std::size_t j = 0; j < cfg.distances.size(); ++j) {
            CellSummary cell;
            cell.policy = policy;
            cell.d_m = cfg.distances[j];
            double latency_sum = 0.0;
            for (int i = 0; i < cfg.trials; ++i) {
                const std::uint64_t seed =
                    kernel::mix_seed(kernel::mix_seed(cfg.seed, j), static_cast<std::uint64_t>(i));
                TrialResult t = run_trial(cfg.sim, cfg.distances[j], policy, seed);
                t.trial = i;
                ++cell.trials;
                if (t.success) {
                    ++cell.successes;
                    latency_sum += *t.latency_ms;
                }
                out.trials.push_back(t);
            }
            if (cell.successes > 0) cell.mean_latency_ms = latency_sum / cell.successes;
            out.cells.push_back(cell);
        }
    }
    const auto key = [](const auto& x) { return std::make_pair(static_cast<int>(x.policy), x.d_m); };
    std::stable_sort(out.trials.begin(), out.trials.end(), [&](const TrialResult& a, const TrialResult& b) {
        if (key(a) != key(b)) return key(a) < key(b);
        return a.trial < b.trial;
    });
    std::stable_sort(out.cells.begin(), out.cells.end(),
                     [&](const CellSummary& a, const CellSummary& b) { return key(a) < key(b); });
    return out;
}

double plateau_read_rate(const SimConfig& cfg) {
    const double d = *std::min_element(cfg.sweep_distances.begin(), cfg.sweep_distances.end());
    return measure_steady_state(noiseless(cfg), d, 0, 2.0).rr_reader;
}

double cem_onset_distance(const SimConfig& cfg) {
    const SimConfig c = noiseless(cfg);
    const auto ok = [&](double d) { return run_trial(c, d, PolicyKind::Cem, 0).success; };
    double lo = 0.01;
    double hi = 5.0;
    if (!ok(lo)) return 0.0;
    if (ok(hi)) return energy::kInfinite;
    while (hi - lo > 1e-5 * hi) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

CalibrationResult calibrate(const SimConfig& base) {
    base.validate();
    CalibrationResult out;
    out.config = base;
    SimConfig& cfg = out.config;
    const double target_rr = base.plateau_target();
    const double t_t_floor = 0.1;
    // Expected transmit hold of the truncated normal, approximated by its
    // mean when the truncation is negligible.
    const double hold_ms = std::max(base.t_t_mean_ms, t_t_floor);
    out.max_plateau_rr = 1000.0 / (base.t_execute_ms + hold_ms);

    char buf[256];
    if (target_rr > out.max_plateau_rr * 1.05) {
        std::snprintf(buf, sizeof buf,
                      "infeasible: plateau target %.2f reads/s exceeds the achievable %.2f reads/s "
                      "(1000 / (t_execute + t_t_mean))",
                      target_rr, out.max_plateau_rr);
        out.message = buf;
        return out;
    }

    const double want = 0.98 * std::min(target_rr, out.max_plateau_rr);
    const auto rr_at = [&](double eta) {
        cfg.eta = eta;
        return plateau_read_rate(cfg);
    };
    double eta_hi = 1.0;
    if (rr_at(eta_hi) < want) {
        std::snprintf(buf, sizeof buf,
                      "infeasible: even eta = 1 gives %.2f reads/s at the nearest distance "
                      "(target %.2f)",
                      plateau_read_rate(cfg), target_rr);
        out.message = buf;
        return out;
    }
    double eta_lo = 1e-6;
    // Geometric bisection for the smallest eta that reaches the plateau.
    while (eta_hi / eta_lo > 1.0 + 1e-7) {
        const double mid = std::sqrt(eta_lo * eta_hi);
        (rr_at(mid) >= want ? eta_hi : eta_lo) = mid;
    }
    cfg.eta = eta_hi;
    out.plateau_rr = plateau_read_rate(cfg);

    // Onset grows with capacitance; bracket around the current value.
    const double target_d = base.target_onset_m;
    const auto onset_at = [&](double c_uf) {
        cfg.c_uf = c_uf;
        return cem_onset_distance(cfg);
    };
    double c_lo = base.c_uf;
    double c_hi = base.c_uf;
    double d_probe = onset_at(base.c_uf);
    int expansions = 0;
    if (d_probe < target_d) {
        while (d_probe < target_d && expansions++ < 40) {
            c_lo = c_hi;
            c_hi *= 2.0;
            d_probe = onset_at(c_hi);
        }
    } else {
        while (d_probe >= target_d && expansions++ < 40) {
            c_hi = c_lo;
            c_lo *= 0.5;
            d_probe = onset_at(c_lo);
        }
    }
    if (expansions > 40) {
        out.message = "infeasible: no capacitance in range places the CEM onset at the target";
        return out;
    }
    while (c_hi / c_lo > 1.0 + 1e-6) {
        const double mid = std::sqrt(c_lo * c_hi);
        (onset_at(mid) < target_d ? c_lo : c_hi) = mid;
    }
    cfg.c_uf = c_hi;
    out.onset_m = cem_onset_distance(cfg);
    out.feasible = std::fabs(out.onset_m - target_d) <= 0.05 * target_d &&
                   std::fabs(out.plateau_rr - target_rr) <= 0.05 * target_rr;
    std::snprintf(buf, sizeof buf,
                  "eta = %.6g, C = %.6g uF: plateau %.2f reads/s (target %.2f), CEM onset %.4f m "
                  "(target %.4f)",
                  cfg.eta, cfg.c_uf, out.plateau_rr, target_rr, out.onset_m, target_d);
    out.message = buf;
    return out;
}

}  // namespace rfsim::harness
