#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfsim/config.hpp"
#include "rfsim/device.hpp"
#include "rfsim/reader.hpp"
#include "rfsim/simkernel.hpp"

namespace rfsim::harness {

/// One tag and one reader at a fixed distance. Shadowing is drawn once per
/// placement from its own stream so that jitter draws never shift it.
class Testbed {
public:
    Testbed(const SimConfig& cfg, double distance_m, std::uint64_t seed);

    kernel::Simulator& sim() { return sim_; }
    device::Device& device() { return *device_; }
    reader::Reader& reader() { return *reader_; }
    double harvested_power() const { return p_charge_; }
    double distance() const { return distance_m_; }

    /// Moves the tag; the placement's shadowing factor is kept.
    void set_distance(double distance_m);

private:
    SimConfig cfg_;
    kernel::Simulator sim_;
    double shadow_ = 1.0;
    double distance_m_ = 0.0;
    double p_charge_ = 0.0;
    std::unique_ptr<device::Device> device_;
    std::unique_ptr<reader::Reader> reader_;
};

/// Times in ms, rates in reads/s. tc_ms is energy::kInfinite when the tag
/// never booted; ta/tt are NaN then.
struct TimingRecord {
    double d_m = 0.0;
    double tc_ms = 0.0;
    double ta_ms = 0.0;
    double tt_ms = 0.0;
    double rr_reader = 0.0;
    double rr_device = 0.0;
    double tc_est_ms = 0.0;
    int cycles = 0;

    bool booted() const;
};

/// Cold start, then a window of `window_s` starting at the first read.
TimingRecord measure_steady_state(const SimConfig& cfg, double distance_m, std::uint64_t seed,
                                  double window_s);

std::vector<TimingRecord> run_distance_sweep(const ExperimentConfig& cfg);

/// Sample Pearson coefficient; nullopt when either input has zero variance.
/// Throws std::invalid_argument on length mismatch or fewer than 2 points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of T_c against d^2 over booted rows off the saturation
/// plateau (read rate below 90% of the sweep maximum). nullopt with fewer
/// than 3 such rows.
std::optional<LinearFit> fit_tc_vs_d_squared(std::span<const TimingRecord> rows);

struct CorrelationResult {
    std::vector<TimingRecord> rows;
    std::vector<double> excluded_distances;
    std::optional<double> coefficient;
    std::string warning;
};

CorrelationResult run_correlation_study(const ExperimentConfig& cfg);

struct TrialResult {
    PolicyKind policy = PolicyKind::Cem;
    double d_m = 0.0;
    int trial = 0;
    bool commenced = false;
    bool success = false;
    std::optional<double> latency_ms;
    int brownouts = 0;
    int redraws = 0;
};

/// One placement: cold start, first read, one measurement window, then the
/// task command. Ends at the first task outcome.
TrialResult run_trial(const SimConfig& cfg, double distance_m, PolicyKind policy,
                      std::uint64_t seed);

struct CellSummary {
    PolicyKind policy = PolicyKind::Cem;
    double d_m = 0.0;
    int trials = 0;
    int successes = 0;
    std::optional<double> mean_latency_ms;

    double success_rate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
};

struct BenchmarkResult {
    std::vector<TrialResult> trials;
    std::vector<CellSummary> cells;
};

/// Trial i at distance j replays the same seed under every policy.
BenchmarkResult run_policy_benchmark(const ExperimentConfig& cfg, std::span<const PolicyKind> policies);

struct CalibrationResult {
    bool feasible = false;
    SimConfig config;
    double plateau_rr = 0.0;
    double onset_m = 0.0;
    double max_plateau_rr = 0.0;
    std::string message;
};

/// Noiseless read rate at the nearest sweep distance.
double plateau_read_rate(const SimConfig& cfg);
/// Farthest distance at which a noiseless CEM trial still succeeds.
double cem_onset_distance(const SimConfig& cfg);

/// Fits channel.eta to the plateau target, then device.c_uf to the CEM
/// onset target.
CalibrationResult calibrate(const SimConfig& base);

}  // namespace rfsim::harness
