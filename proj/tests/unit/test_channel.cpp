#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rfsim/channel.hpp"

using namespace rfsim;
using namespace rfsim::channel;

namespace {

ChannelParams unit_link() {
    ChannelParams p;
    p.tx_power_w = 1.0;
    p.tx_gain = 1.0;
    p.rx_gain = 1.0;
    p.wavelength_m = 0.3286;
    p.efficiency = 1.0;
    return p;
}

}  // namespace

TEST_CASE("Friis at 1 m with unit gains") {
    // Oracle: (lambda / (4 pi d))^2 evaluated independently.
    const double ratio = 0.3286 / (4.0 * std::numbers::pi * 1.0);
    const double oracle = ratio * ratio;
    CHECK(received_power(unit_link(), 1.0) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(received_power(unit_link(), 1.0) == doctest::Approx(6.838e-4).epsilon(1e-4));
}

TEST_CASE("doubling distance divides power by exactly 4") {
    const auto p = unit_link();
    for (double d : {0.1, 0.37, 1.0, 2.5}) {
        CHECK(received_power(p, d) / received_power(p, 2.0 * d) == doctest::Approx(4.0).epsilon(1e-14));
    }
}

TEST_CASE("scaling G_r scales power") {
    auto p = unit_link();
    const double base = received_power(p, 0.8);
    p.rx_gain = 3.7;
    CHECK(received_power(p, 0.8) == doctest::Approx(3.7 * base).epsilon(1e-14));
}

TEST_CASE("non-positive distance is rejected") {
    CHECK_THROWS_AS(received_power(unit_link(), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(received_power(unit_link(), -1.0), std::invalid_argument);
}

TEST_CASE("harvested power scales by efficiency with noise off") {
    auto p = unit_link();
    p.efficiency = 0.3;
    // Pick d so that received power is 1e-3 W.
    const double d = 0.3286 / (4.0 * std::numbers::pi * std::sqrt(1e-3));
    kernel::Rng rng(1);
    CHECK(harvested_power(p, d, rng) == doctest::Approx(3e-4).epsilon(1e-12));
    CHECK(harvested_power(p, d, rng) == harvested_power_noiseless(p, d));
}

TEST_CASE("3 dB shadowing keeps the median at the noiseless value") {
    auto p = unit_link();
    p.efficiency = 0.3;
    p.shadowing_sigma_db = 3.0;
    kernel::Rng rng(99);
    std::vector<double> xs;
    for (int i = 0; i < 10'000; ++i) xs.push_back(harvested_power(p, 0.5, rng));
    std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
    const double median = xs[xs.size() / 2];
    const double noiseless = harvested_power_noiseless(p, 0.5);
    CHECK(std::abs(median / noiseless - 1.0) < 0.05);
}

TEST_CASE("invalid parameters are rejected") {
    auto p = unit_link();
    p.efficiency = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = unit_link();
    p.shadowing_sigma_db = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = unit_link();
    p.tx_gain = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("unit conversions") {
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
    CHECK(db_to_linear(3.0) == doctest::Approx(1.9952623149688795));
    CHECK(wavelength_from_mhz(912.5) == doctest::Approx(299'792'458.0 / 912.5e6));
}
