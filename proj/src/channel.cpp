#include "rfsim/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rfsim::channel {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double wavelength_from_mhz(double freq_mhz) {
    if (!(freq_mhz > 0.0)) throw std::invalid_argument("frequency must be positive");
    return kSpeedOfLight / (freq_mhz * 1e6);
}

void ChannelParams::validate() const {
    if (!(tx_power_w > 0.0)) throw std::invalid_argument("channel: transmit power must be > 0");
    if (!(tx_gain > 0.0) || !(rx_gain > 0.0)) {
        throw std::invalid_argument("channel: antenna gains must be > 0 (linear)");
    }
    if (!(wavelength_m > 0.0)) throw std::invalid_argument("channel: wavelength must be > 0");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw std::invalid_argument("channel: harvester efficiency must lie in (0, 1]");
    }
    if (!(shadowing_sigma_db >= 0.0)) {
        throw std::invalid_argument("channel: shadowing sigma must be >= 0 dB");
    }
}

double received_power(const ChannelParams& params, double distance_m) {
    if (!(distance_m > 0.0)) {
        throw std::invalid_argument("channel: distance must be > 0 (far-field model)");
    }
    const double spread = 4.0 * std::numbers::pi * distance_m;
    return params.tx_power_w * params.tx_gain * params.rx_gain * params.wavelength_m *
           params.wavelength_m / (spread * spread);
}

double harvested_power_noiseless(const ChannelParams& params, double distance_m) {
    return params.efficiency * received_power(params, distance_m);
}

double shadowing_factor(double sigma_db, kernel::Rng& rng) {
    if (sigma_db == 0.0) return 1.0;
    return db_to_linear(sigma_db * rng.standard_normal());
}

double harvested_power(const ChannelParams& params, double distance_m, kernel::Rng& rng) {
    const double base = harvested_power_noiseless(params, distance_m);
    return base * shadowing_factor(params.shadowing_sigma_db, rng);
}

}  // namespace rfsim::channel
