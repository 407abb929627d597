#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "rfsim/harness.hpp"

namespace rfsim::harness {

inline constexpr const char* kCsvVersionLine = "# rf-intermit-sim v1";

void write_sweep_csv(std::ostream& out, std::span<const TimingRecord> rows);
void write_correlate_csv(std::ostream& out, const CorrelationResult& result);
void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result);

std::string format_sweep_report(std::span<const TimingRecord> rows);
std::string format_correlation_report(const CorrelationResult& result);
std::string format_benchmark_report(const BenchmarkResult& result);
std::string format_calibration_report(const CalibrationResult& result);

std::string sweep_svg(std::span<const TimingRecord> rows);
std::string correlate_svg(const CorrelationResult& result);
std::string benchmark_svg(const BenchmarkResult& result);

struct ReportOptions {
    bool plots = true;
};

/// Each writes its CSV, report.txt and (optionally) an SVG into `dir`,
/// creating it if needed. I/O failures throw std::runtime_error naming the
/// path.
void emit_report(const std::string& dir, std::span<const TimingRecord> sweep,
                 const ReportOptions& opts = {});
void emit_report(const std::string& dir, const CorrelationResult& result,
                 const ReportOptions& opts = {});
void emit_report(const std::string& dir, const BenchmarkResult& result,
                 const ReportOptions& opts = {});
void emit_report(const std::string& dir, const CalibrationResult& result);

/// Writes `text` to `path`, throwing std::runtime_error with the path on
/// failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace rfsim::harness
