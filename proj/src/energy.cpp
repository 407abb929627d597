#include "rfsim/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfsim::energy {

void DeviceConfig::validate() const {
    if (!(capacitance_f > 0.0)) throw std::invalid_argument("device: capacitance must be > 0");
    if (!(v_min > 0.0) || !(v_charged > v_min)) {
        throw std::invalid_argument("device: need v_charged > v_min > 0");
    }
    if (!(p_sleep_w > 0.0) || !(p_active_w > p_sleep_w)) {
        throw std::invalid_argument("device: need p_active > p_sleep > 0");
    }
    if (!(p_transmit_w > 0.0)) throw std::invalid_argument("device: p_transmit must be > 0");
    if (!(t_execute_s > 0.0)) throw std::invalid_argument("device: t_execute must be > 0");
    if (!(t_t_mean_s > 0.0) || !(t_t_sigma_s >= 0.0)) {
        throw std::invalid_argument("device: need t_t_mean > 0 and t_t_sigma >= 0");
    }
}

double EnergyState::voltage() const { return voltage_of(joules, capacitance_f); }

double stored_energy(const DeviceConfig& cfg) {
    return 0.5 * cfg.capacitance_f * (cfg.v_charged * cfg.v_charged - cfg.v_min * cfg.v_min);
}

double charge_time(double e_stored, double p_charge, double p_sleep) {
    if (p_charge <= p_sleep) return kInfinite;
    return e_stored / (p_charge - p_sleep);
}

double active_time(double e_stored, double p_active, double p_charge, double t_execute) {
    if (p_active > p_charge) return e_stored / (p_active - p_charge);
    return t_execute;
}

double read_rate(double t_c, double t_a, double t_t) {
    if (is_infinite(t_c)) return 0.0;
    return 1.0 / (t_c + t_a + t_t);
}

EnergyState integrate(const DeviceConfig& cfg, EnergyState state, double p_in, double p_out,
                      double dt) {
    if (dt < 0.0) throw std::invalid_argument("integrate: dt must be >= 0");
    if (p_in == p_out) return state;
    state.joules = std::clamp(state.joules + (p_in - p_out) * dt, 0.0, cfg.e_max());
    return state;
}

double voltage_of(double joules, double capacitance_f) {
    return std::sqrt(2.0 * joules / capacitance_f);
}

double energy_of(double volts, double capacitance_f) {
    return 0.5 * capacitance_f * volts * volts;
}

double time_to_reach(double from, double target, double net_power) {
    const double gap = target - from;
    if (gap == 0.0) return 0.0;
    if (net_power == 0.0 || (gap > 0.0) != (net_power > 0.0)) return kInfinite;
    return gap / net_power;
}

}  // namespace rfsim::energy
