#pragma once

#include <limits>

namespace rfsim::energy {

/// Durations in this module are seconds. kInfinite is the legal result of
/// charge_time when the harvester cannot outrun the sleep draw.
inline constexpr double kInfinite = std::numeric_limits<double>::infinity();

inline bool is_infinite(double seconds) { return seconds == kInfinite; }

/// Electrical and timing parameters of the tag, SI units throughout.
struct DeviceConfig {
    double capacitance_f = 100e-6;
    double v_charged = 2.4;
    double v_min = 1.8;
    double p_sleep_w = 5e-6;
    double p_active_w = 2e-3;
    double p_transmit_w = 2e-3;
    /// Active time of one inventory cycle (firmware work before the reply).
    double t_execute_s = 0.630e-3;
    double t_t_mean_s = 1.641e-3;
    double t_t_sigma_s = 0.635e-3;

    /// Throws std::invalid_argument on violated invariants.
    void validate() const;

    /// Energy held at the turn-on threshold, the clamp ceiling.
    double e_max() const { return 0.5 * capacitance_f * v_charged * v_charged; }
    /// Energy at the brown-out threshold.
    double e_min() const { return 0.5 * capacitance_f * v_min * v_min; }
};

/// Capacitor energy with its capacitance.
struct EnergyState {
    double joules = 0.0;
    double capacitance_f = 100e-6;

    double voltage() const;
};

/// Energy delivered by one full charging cycle, V_min to V_charged.
double stored_energy(const DeviceConfig& cfg);

/// E_stored / (P_charge - P_sleep), or kInfinite when P_charge <= P_sleep.
double charge_time(double e_stored, double p_charge, double p_sleep);

/// E_stored / (P_active - P_charge) while the harvester cannot keep up,
/// otherwise the nominal execution time.
double active_time(double e_stored, double p_active, double p_charge, double t_execute);

/// Reads per second for one charge/active/transmit loop; 0 when T_c is
/// infinite.
double read_rate(double t_c, double t_a, double t_t);

/// Advances the capacitor by `dt` seconds at constant powers, clamped to
/// [0, e_max()].
EnergyState integrate(const DeviceConfig& cfg, EnergyState state, double p_in, double p_out,
                      double dt);

double voltage_of(double joules, double capacitance_f);
double energy_of(double volts, double capacitance_f);

/// Seconds until the stored energy moves from `from` to `target` at the
/// constant `net_power`; kInfinite if it never gets there.
double time_to_reach(double from, double target, double net_power);

}  // namespace rfsim::energy
