#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rfsim/energy.hpp"

using namespace rfsim::energy;

namespace {

DeviceConfig reference_cfg() {
    DeviceConfig c;
    c.capacitance_f = 100e-6;
    c.v_charged = 2.4;
    c.v_min = 1.8;
    return c;
}

}  // namespace

TEST_CASE("stored energy between 1.8 V and 2.4 V at 100 uF") {
    CHECK(stored_energy(reference_cfg()) == doctest::Approx(1.26e-4).epsilon(1e-12));
}

TEST_CASE("stored energy degenerate window and linearity in C") {
    auto c = reference_cfg();
    c.v_min = c.v_charged;
    CHECK(stored_energy(c) == 0.0);
    auto c2 = reference_cfg();
    c2.capacitance_f *= 2.0;
    CHECK(stored_energy(c2) == doctest::Approx(2.0 * stored_energy(reference_cfg())));
}

TEST_CASE("charge time examples") {
    CHECK(charge_time(1.26e-4, 1e-4, 2e-5) == doctest::Approx(1.575).epsilon(1e-12));
    CHECK(is_infinite(charge_time(1.26e-4, 2e-5, 2e-5)));
    CHECK(is_infinite(charge_time(1.26e-4, 1e-5, 2e-5)));
    CHECK(charge_time(1.26e-4, 1e-4, 0.0) == doctest::Approx(1.26));
}

TEST_CASE("active time examples") {
    CHECK(active_time(1.26e-4, 2e-3, 0.5e-3, 0.63e-3) == doctest::Approx(0.084).epsilon(1e-12));
    CHECK(active_time(1.26e-4, 2e-3, 2e-3, 0.63e-3) == 0.63e-3);
    CHECK(active_time(1.26e-4, 2e-3, 3e-3, 0.63e-3) == 0.63e-3);
    CHECK(active_time(1.26e-4, 2e-3, 0.0, 0.63e-3) == doctest::Approx(0.063));
}

TEST_CASE("read rate examples") {
    CHECK(read_rate(kInfinite, 0.63e-3, 1.641e-3) == 0.0);
    CHECK(read_rate(4e-3, 3e-3, 3e-3) == doctest::Approx(100.0));
    CHECK(read_rate(7.729e-3, 0.630e-3, 1.641e-3) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("integrate clamps and conserves") {
    const auto c = reference_cfg();
    EnergyState s{1e-4, c.capacitance_f};
    CHECK(integrate(c, s, 1e-3, 1e-3, 5.0).joules == s.joules);
    CHECK(integrate(c, s, 1e-3, 0.0, 0.01).joules == doctest::Approx(1.1e-4));
    CHECK(integrate(c, s, 1.0, 0.0, 1.0).joules == c.e_max());
    CHECK(integrate(c, s, 0.0, 1.0, 1.0).joules == 0.0);
    CHECK_THROWS_AS(integrate(c, s, 0.0, 1.0, -1.0), std::invalid_argument);
}

// Tick-stepping oracle: advance 1 us at a time until the threshold is crossed.
TEST_CASE("tick-stepped charge from V_min matches the charge-time formula within one tick") {
    auto c = reference_cfg();
    c.p_sleep_w = 2e-5;
    const double p_charge = 1e-3;
    EnergyState s{c.e_min(), c.capacitance_f};
    long ticks = 0;
    while (s.voltage() < c.v_charged) {
        s = integrate(c, s, p_charge, c.p_sleep_w, 1e-6);
        ++ticks;
    }
    const double expected_ticks = charge_time(stored_energy(c), p_charge, c.p_sleep_w) * 1e6;
    CHECK(std::abs(ticks - expected_ticks) <= 1.0 + 1e-6);
}

TEST_CASE("tick-stepped depletion from full charge matches the active-time formula within one tick") {
    const auto c = reference_cfg();
    EnergyState s{c.e_max(), c.capacitance_f};
    long ticks = 0;
    while (s.voltage() >= c.v_min) {
        s = integrate(c, s, 0.0, c.p_active_w, 1e-6);
        ++ticks;
    }
    const double expected_ticks = active_time(stored_energy(c), c.p_active_w, 0.0, c.t_execute_s) * 1e6;
    CHECK(std::abs(ticks - expected_ticks) <= 1.0 + 1e-6);
}

TEST_CASE("voltage round trip") {
    CHECK(voltage_of(0.0, 1e-4) == 0.0);
    CHECK(voltage_of(energy_of(2.1, 47e-6), 47e-6) == doctest::Approx(2.1).epsilon(1e-14));
    CHECK(voltage_of(1.26e-4 + 0.5 * 1e-4 * 1.8 * 1.8, 100e-6) == doctest::Approx(2.4).epsilon(1e-12));
}

TEST_CASE("charge time diverges as the gap closes") {
    CHECK(charge_time(1.26e-4, 2e-5 + 1e-14, 2e-5) > 1e6);
}

TEST_CASE("config validation") {
    auto c = reference_cfg();
    c.v_min = 2.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = reference_cfg();
    c.p_sleep_w = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = reference_cfg();
    c.t_execute_s = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
