#include <doctest.h>

#include <sstream>
#include <stdexcept>

#include "rfsim/device.hpp"
#include "rfsim/reader.hpp"

using namespace rfsim;
using kernel::SimTime;
using reader::EstimatorConstants;

TEST_CASE("charge time estimate") {
    const EstimatorConstants k;
    CHECK(reader::estimate_charge_time(100.0, k) == doctest::Approx(7.729).epsilon(1e-12));
    CHECK(reader::estimate_charge_time(1000.0 / 2.271, k) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(reader::estimate_charge_time(1000.0, k) == 0.0);
    CHECK(reader::estimate_charge_time(0.0, k) == 500.0);
    CHECK_THROWS_AS(reader::estimate_charge_time(-1.0, k), std::invalid_argument);
}

TEST_CASE("sleep time rounds up to whole ms") {
    CHECK(reader::compute_sleep_time(7.729, 1.1) == 9);
    CHECK(reader::compute_sleep_time(0.0, 1.1) == 0);
    CHECK(reader::compute_sleep_time(4.2, 1.0) == 5);
    CHECK(reader::compute_sleep_time(5.0, 1.0) == 5);
    CHECK(reader::compute_sleep_time(500.0, 1.1) == 550);
    CHECK_THROWS_AS(reader::compute_sleep_time(1.0, 0.9), std::invalid_argument);
}

namespace {

struct Bench {
    kernel::Simulator sim{11};
    device::Device dev;
    reader::Reader rd;

    Bench(double p_in, double t_t_sigma_s = 0.635e-3)
        : dev(sim, [&] {
              energy::DeviceConfig c;
              c.t_t_sigma_s = t_t_sigma_s;
              return c;
          }()),
          rd(sim, dev, reader::ReaderConfig{}) {
        dev.set_harvested_power(p_in);
        dev.power_on(0.0);
    }
};

}  // namespace

TEST_CASE("silent tag fails the round with the timeout duration") {
    Bench b(1e-3);
    const auto r = b.rd.inventory_round();
    CHECK_FALSE(r.success);
    CHECK(r.duration == SimTime::millis_exact(2));
}

TEST_CASE("waiting tag succeeds") {
    Bench b(1e-3);
    b.sim.run_until(SimTime::from_seconds(1.0));
    REQUIRE(b.dev.phase() == device::DevicePhase::WaitForQuery);
    const auto r = b.rd.inventory_round();
    CHECK(r.success);
    CHECK(r.duration.us > 0);
}

TEST_CASE("unpowered tag reads zero") {
    Bench b(1e-6);
    b.rd.start_inventory();
    b.sim.run_until(SimTime::from_seconds(1.0));
    CHECK(b.rd.window(SimTime{}, SimTime::from_seconds(1.0)).r_read() == 0.0);
}

TEST_CASE("read rate agrees with the device cycle and is stationary") {
    // P_c such that a cycle drains and recharges; the cycle period is
    // measured from the trace as the oracle.
    Bench b(0.4e-3, 0.0);
    b.rd.start_inventory();
    b.sim.run_until(SimTime::from_seconds(3.0));
    const auto& reads = b.rd.read_times();
    REQUIRE(reads.size() > 10);
    const double period_s = (reads.back() - reads[reads.size() - 11]).seconds() / 10.0;
    const auto w1 = b.rd.window(SimTime::from_seconds(1.0), SimTime::from_seconds(2.0));
    const auto w2 = b.rd.window(SimTime::from_seconds(1.0), SimTime::from_seconds(3.0));
    CHECK(std::abs(w1.r_read() - 1.0 / period_s) <= 1.0);
    CHECK(std::abs(w1.r_read() / w2.r_read() - 1.0) < 0.05);
}

TEST_CASE("control loop on a stationary tag writes near-equal values") {
    Bench b(0.4e-3);
    b.rd.start_inventory();
    b.sim.run_until(SimTime::from_seconds(1.0));
    b.rd.start_control_loop();
    b.sim.run_until(SimTime::from_seconds(4.0));
    const auto& log = b.rd.write_log();
    REQUIRE(log.size() == 3);
    for (const auto& w : log) {
        CHECK(w.delivered);
        CHECK(std::abs(w.t_sleep_ms - log.front().t_sleep_ms) <= 1);
    }
}

TEST_CASE("distance step is reflected by the next write") {
    Bench b(0.4e-3);
    b.rd.start_inventory();
    b.rd.start_control_loop();
    b.sim.run_until(SimTime::from_seconds(2.5));
    const int before = b.rd.write_log().back().t_sleep_ms;
    b.dev.set_harvested_power(0.1e-3);
    b.sim.run_until(SimTime::from_seconds(3.5));
    CHECK(b.rd.write_log().back().t_sleep_ms > before);
}

TEST_CASE("empty window dispatches the capped sleep and it is lost") {
    Bench b(1e-6);
    b.rd.start_inventory();
    b.rd.start_control_loop();
    b.sim.run_until(SimTime::from_seconds(1.0));
    REQUIRE(b.rd.write_log().size() == 1);
    CHECK(b.rd.write_log()[0].t_sleep_ms == 550);
    CHECK_FALSE(b.rd.write_log()[0].delivered);
}

TEST_CASE("write log csv layout") {
    std::ostringstream out;
    const reader::WriteRecord r{SimTime::micros(1000), 100.0, 7.729, 9, true};
    reader::write_write_log_csv(out, std::span(&r, 1));
    CHECK(out.str() ==
          "# rf-intermit-sim v1\ntime_us,r_read,tc_est_ms,t_sleep_ms,delivered\n"
          "1000,100.000000,7.729000,9,1\n");
}
