// Python bindings for the simulator core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "rfsim/config.hpp"
#include "rfsim/energy.hpp"
#include "rfsim/harness.hpp"
#include "rfsim/reader.hpp"
#include "rfsim/report.hpp"

namespace py = pybind11;
using namespace rfsim;
using harness::PolicyKind;

namespace {

harness::ExperimentConfig experiment(const harness::SimConfig& cfg, std::vector<double> distances,
                                     std::uint64_t seed, int trials) {
    harness::ExperimentConfig e;
    e.sim = cfg;
    e.distances = std::move(distances);
    e.seed = seed;
    e.trials = trials;
    e.validate();
    return e;
}

PolicyKind policy_from(const std::string& name) {
    const auto p = device::parse_policy(name);
    if (!p) throw py::value_error("policy must be cem, iem or readme, got '" + name + "'");
    return *p;
}

template <typename Fn>
std::string to_text(Fn&& fn) {
    std::ostringstream out;
    fn(out);
    return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Read-rate driven intermittent execution simulator";

    py::class_<harness::SimConfig>(m, "Config")
        .def(py::init<>())
        .def_static("load", &harness::load_config, py::arg("path"))
        .def_static(
            "parse",
            [](const std::string& text) {
                std::istringstream in(text);
                return harness::parse_config(in, "text");
            },
            py::arg("text"))
        .def(
            "set",
            [](harness::SimConfig& c, const std::string& key, const std::string& value) {
                harness::apply_setting(c, key, value);
            },
            py::arg("key"), py::arg("value"), "Set one dotted key from its text value.")
        .def("validate", &harness::SimConfig::validate)
        .def("to_text", &harness::format_config)
        .def_readwrite("eta", &harness::SimConfig::eta)
        .def_readwrite("c_uf", &harness::SimConfig::c_uf)
        .def_readwrite("shadowing_sigma_db", &harness::SimConfig::shadowing_sigma_db)
        .def_readwrite("p_sleep_uw", &harness::SimConfig::p_sleep_uw)
        .def_readwrite("k_ms", &harness::SimConfig::k_ms)
        .def_readwrite("tau", &harness::SimConfig::tau)
        .def_readwrite("sweep_distances", &harness::SimConfig::sweep_distances)
        .def_readwrite("sweep_window_s", &harness::SimConfig::sweep_window_s)
        .def_readwrite("benchmark_distances", &harness::SimConfig::benchmark_distances)
        .def_readwrite("trials", &harness::SimConfig::trials)
        .def_readwrite("target_onset_m", &harness::SimConfig::target_onset_m)
        .def("__repr__", [](const harness::SimConfig& c) { return "<Config eta=" + std::to_string(c.eta) + ">"; });

    py::class_<harness::TimingRecord>(m, "TimingRecord")
        .def_readonly("d_m", &harness::TimingRecord::d_m)
        .def_readonly("tc_ms", &harness::TimingRecord::tc_ms)
        .def_readonly("ta_ms", &harness::TimingRecord::ta_ms)
        .def_readonly("tt_ms", &harness::TimingRecord::tt_ms)
        .def_readonly("rr_reader", &harness::TimingRecord::rr_reader)
        .def_readonly("rr_device", &harness::TimingRecord::rr_device)
        .def_readonly("tc_est_ms", &harness::TimingRecord::tc_est_ms)
        .def_readonly("cycles", &harness::TimingRecord::cycles)
        .def_property_readonly("booted", &harness::TimingRecord::booted);

    py::class_<harness::CorrelationResult>(m, "CorrelationResult")
        .def_readonly("rows", &harness::CorrelationResult::rows)
        .def_readonly("excluded_distances", &harness::CorrelationResult::excluded_distances)
        .def_readonly("coefficient", &harness::CorrelationResult::coefficient)
        .def_readonly("warning", &harness::CorrelationResult::warning);

    py::class_<harness::TrialResult>(m, "TrialResult")
        .def_property_readonly("policy", [](const harness::TrialResult& t) { return std::string(device::policy_name(t.policy)); })
        .def_readonly("d_m", &harness::TrialResult::d_m)
        .def_readonly("trial", &harness::TrialResult::trial)
        .def_readonly("commenced", &harness::TrialResult::commenced)
        .def_readonly("success", &harness::TrialResult::success)
        .def_readonly("latency_ms", &harness::TrialResult::latency_ms)
        .def_readonly("brownouts", &harness::TrialResult::brownouts);

    py::class_<harness::CellSummary>(m, "CellSummary")
        .def_property_readonly("policy", [](const harness::CellSummary& c) { return std::string(device::policy_name(c.policy)); })
        .def_readonly("d_m", &harness::CellSummary::d_m)
        .def_readonly("trials", &harness::CellSummary::trials)
        .def_readonly("successes", &harness::CellSummary::successes)
        .def_readonly("mean_latency_ms", &harness::CellSummary::mean_latency_ms)
        .def_property_readonly("success_rate", &harness::CellSummary::success_rate);

    py::class_<harness::BenchmarkResult>(m, "BenchmarkResult")
        .def_readonly("trials", &harness::BenchmarkResult::trials)
        .def_readonly("cells", &harness::BenchmarkResult::cells);

    py::class_<harness::CalibrationResult>(m, "CalibrationResult")
        .def_readonly("feasible", &harness::CalibrationResult::feasible)
        .def_readonly("config", &harness::CalibrationResult::config)
        .def_readonly("plateau_rr", &harness::CalibrationResult::plateau_rr)
        .def_readonly("onset_m", &harness::CalibrationResult::onset_m)
        .def_readonly("max_plateau_rr", &harness::CalibrationResult::max_plateau_rr)
        .def_readonly("message", &harness::CalibrationResult::message);

    py::class_<harness::LinearFit>(m, "LinearFit")
        .def_readonly("slope", &harness::LinearFit::slope)
        .def_readonly("intercept", &harness::LinearFit::intercept)
        .def_readonly("r_squared", &harness::LinearFit::r_squared)
        .def_readonly("points", &harness::LinearFit::points);

    m.def("charge_time", &energy::charge_time, py::arg("e_stored"), py::arg("p_charge"), py::arg("p_sleep"),
          "Seconds to recharge e_stored joules; inf when the harvest cannot beat the sleep draw.");
    m.def("active_time", &energy::active_time, py::arg("e_stored"), py::arg("p_active"), py::arg("p_charge"),
          py::arg("t_execute"));
    m.def("read_rate", &energy::read_rate, py::arg("t_c"), py::arg("t_a"), py::arg("t_t"));
    m.def(
        "estimate_charge_time",
        [](double r_read, double k_ms, double max_estimate_ms) {
            reader::EstimatorConstants k;
            k.k_ms = k_ms;
            k.max_estimate_ms = max_estimate_ms;
            return reader::estimate_charge_time(r_read, k);
        },
        py::arg("r_read"), py::arg("k_ms") = 2.271, py::arg("max_estimate_ms") = 500.0);
    m.def("compute_sleep_time", &reader::compute_sleep_time, py::arg("tc_est_ms"), py::arg("tau") = 1.1);
    m.def(
        "pearson",
        [](const std::vector<double>& x, const std::vector<double>& y) { return harness::pearson(x, y); },
        py::arg("x"), py::arg("y"));

    m.def(
        "sweep",
        [](const harness::SimConfig& cfg, std::vector<double> distances, std::uint64_t seed) {
            py::gil_scoped_release nogil;
            return harness::run_distance_sweep(experiment(cfg, std::move(distances), seed, 1));
        },
        py::arg("config"), py::arg("distances"), py::arg("seed"));
    m.def(
        "correlate",
        [](const harness::SimConfig& cfg, std::vector<double> distances, std::uint64_t seed) {
            py::gil_scoped_release nogil;
            return harness::run_correlation_study(experiment(cfg, std::move(distances), seed, 1));
        },
        py::arg("config"), py::arg("distances"), py::arg("seed"));
    m.def(
        "benchmark",
        [](const harness::SimConfig& cfg, std::vector<double> distances, std::uint64_t seed, int trials,
           const std::vector<std::string>& policies) {
            std::vector<PolicyKind> kinds;
            for (const auto& p : policies) kinds.push_back(policy_from(p));
            auto e = experiment(cfg, std::move(distances), seed, trials);
            py::gil_scoped_release nogil;
            return harness::run_policy_benchmark(e, kinds);
        },
        py::arg("config"), py::arg("distances"), py::arg("seed"), py::arg("trials") = 10,
        py::arg("policies") = std::vector<std::string>{"cem", "iem", "readme"});
    m.def(
        "run_trial",
        [](const harness::SimConfig& cfg, double d, const std::string& policy, std::uint64_t seed) {
            return harness::run_trial(cfg, d, policy_from(policy), seed);
        },
        py::arg("config"), py::arg("distance"), py::arg("policy"), py::arg("seed"));
    m.def(
        "calibrate",
        [](const harness::SimConfig& cfg) {
            py::gil_scoped_release nogil;
            return harness::calibrate(cfg);
        },
        py::arg("config"));
    m.def(
        "fit_tc_vs_d_squared",
        [](const std::vector<harness::TimingRecord>& rows) { return harness::fit_tc_vs_d_squared(rows); },
        py::arg("rows"));

    m.def("sweep_csv", [](const std::vector<harness::TimingRecord>& rows) {
        return to_text([&](std::ostream& o) { harness::write_sweep_csv(o, rows); });
    });
    m.def("correlate_csv", [](const harness::CorrelationResult& r) {
        return to_text([&](std::ostream& o) { harness::write_correlate_csv(o, r); });
    });
    m.def("benchmark_csv", [](const harness::BenchmarkResult& r) {
        return to_text([&](std::ostream& o) { harness::write_benchmark_csv(o, r); });
    });
}
