#pragma once

#include "rfsim/simkernel.hpp"

namespace rfsim::channel {

inline constexpr double kSpeedOfLight = 299'792'458.0;

double dbm_to_watts(double dbm);
double db_to_linear(double db);
double wavelength_from_mhz(double freq_mhz);

/// Free-space link between the reader antenna and the tag, plus the
/// harvester efficiency. Gains are linear; conversion from dBi happens in
/// the config layer.
struct ChannelParams {
    double tx_power_w = 1.0;            // 30 dBm conducted
    double tx_gain = 7.943282347242816;  // 9 dBic panel
    double rx_gain = 1.584893192461114;  // 2 dBi dipole
    double wavelength_m = 0.32854;       // 912.5 MHz
    double efficiency = 0.3;
    double shadowing_sigma_db = 0.0;

    /// Throws std::invalid_argument on violated invariants.
    void validate() const;
};

/// Friis received power in watts. Throws std::invalid_argument for d <= 0.
double received_power(const ChannelParams& params, double distance_m);

/// efficiency * received_power, no shadowing.
double harvested_power_noiseless(const ChannelParams& params, double distance_m);

/// 10^(X/10) with X ~ Normal(0, sigma_db); exactly 1 when sigma_db == 0
/// (no draw is consumed in that case).
double shadowing_factor(double sigma_db, kernel::Rng& rng);

/// Harvested power including one log-normal shadowing draw.
double harvested_power(const ChannelParams& params, double distance_m, kernel::Rng& rng);

}  // namespace rfsim::channel
