#include "rfsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rfsim::harness {

namespace {

std::string num(double v, int decimals = 6) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string policy_label(PolicyKind k) {
    switch (k) {
        case PolicyKind::Cem: return "CEM";
        case PolicyKind::Iem: return "IEM";
        case PolicyKind::Readme: return "ReaDmE";
    }
    return "?";
}

// Minimal SVG line/scatter chart with linear axes.
struct Series {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points;
    bool lines = true;
};

struct Axis {
    std::string label;
    double lo = 0.0;
    double hi = 1.0;
};

Axis fit_axis(std::string label, const std::vector<Series>& series, bool use_x) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            const double v = use_x ? x : y;
            if (!std::isfinite(v)) continue;
            lo = any ? std::min(lo, v) : v;
            hi = any ? std::max(hi, v) : v;
            any = true;
        }
    }
    if (!any || hi == lo) hi = lo + 1.0;
    if (lo > 0.0 && lo < 0.5 * hi) lo = 0.0;
    const double pad = 0.05 * (hi - lo);
    return {std::move(label), lo == 0.0 ? 0.0 : lo - pad, hi + pad};
}

std::string chart_svg(const std::string& title, const Axis& xa, const Axis& ya,
                      const std::vector<Series>& series) {
    constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 60;
    const auto px = [&](double x) { return L + (x - xa.lo) / (xa.hi - xa.lo) * (W - L - R); };
    const auto py = [&](double y) { return H - B - (y - ya.lo) / (ya.hi - ya.lo) * (H - T - B); };
    std::ostringstream o;
    char buf[256];
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    o << "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                  "stroke=\"black\"/>\n",
                  L, T, W - L - R, H - T - B);
    o << buf;
    for (int i = 0; i <= 5; ++i) {
        const double xv = xa.lo + (xa.hi - xa.lo) * i / 5.0;
        const double yv = ya.lo + (ya.hi - ya.lo) * i / 5.0;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.3g</text>\n", px(xv),
                      H - B + 16, xv);
        o << buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n",
                      L - 6, py(yv) + 4, yv);
        o << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">", (W + L - R) / 2,
                  H - 18);
    o << buf << xa.label << "</text>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"16\" y=\"%.1f\" text-anchor=\"middle\" transform=\"rotate(-90 16 %.1f)\">",
                  (H - B + T) / 2, (H - B + T) / 2);
    o << buf << ya.label << "</text>\n";
    int legend = 0;
    for (const auto& s : series) {
        std::string path;
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n",
                          px(x), py(y), s.color.c_str());
            o << buf;
            std::snprintf(buf, sizeof buf, "%s%.1f,%.1f", path.empty() ? "" : " ", px(x), py(y));
            path += buf;
        }
        if (s.lines && !path.empty()) {
            o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"" << path << "\"/>\n";
        }
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.1f\" y=\"%.1f\" width=\"10\" height=\"10\" fill=\"%s\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\">",
                      L + 10, T + 8 + 16.0 * legend, s.color.c_str(), L + 26, T + 17 + 16.0 * legend);
        o << buf << s.name << "</text>\n";
        ++legend;
    }
    o << "</svg>\n";
    return o.str();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::string join(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

template <typename Fn>
void write_csv_file(const std::string& path, Fn&& fn) {
    std::ostringstream o;
    fn(o);
    write_text_file(path, o.str());
}

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_sweep_csv(std::ostream& out, std::span<const TimingRecord> rows) {
    out << kCsvVersionLine << '\n' << "d_m,tc_ms,ta_ms,tt_ms,rr_reader,rr_device,tc_est_ms\n";
    for (const auto& r : rows) {
        out << num(r.d_m, 4) << ',' << num(r.tc_ms) << ',' << num(r.ta_ms) << ',' << num(r.tt_ms)
            << ',' << num(r.rr_reader) << ',' << num(r.rr_device) << ',' << num(r.tc_est_ms) << '\n';
    }
}

void write_correlate_csv(std::ostream& out, const CorrelationResult& result) {
    out << kCsvVersionLine << '\n' << "d_m,tc_device_ms,tc_reader_ms\n";
    for (const auto& r : result.rows) {
        out << num(r.d_m, 4) << ',' << num(r.tc_ms) << ',' << num(r.tc_est_ms) << '\n';
    }
}

void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result) {
    out << kCsvVersionLine << '\n' << "policy,d_m,trial,success,latency_ms,brownouts\n";
    for (const auto& t : result.trials) {
        out << device::policy_name(t.policy) << ',' << num(t.d_m, 4) << ',' << t.trial << ','
            << (t.success ? 1 : 0) << ',' << (t.latency_ms ? num(*t.latency_ms, 3) : "n/a") << ','
            << t.brownouts << '\n';
    }
}

std::string format_sweep_report(std::span<const TimingRecord> rows) {
    std::ostringstream o;
    char buf[256];
    o << "distance sweep\n";
    o << "  d [m]    T_c [ms]   T_a [ms]   T_t [ms]   R reader   R device   T_c est [ms]\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "  %5.2f  %10s %10s %10s %10s %10s %13s\n", r.d_m,
                      num(r.tc_ms, 3).c_str(), num(r.ta_ms, 3).c_str(), num(r.tt_ms, 3).c_str(),
                      num(r.rr_reader, 2).c_str(), num(r.rr_device, 2).c_str(),
                      num(r.tc_est_ms, 3).c_str());
        o << buf;
    }
    const auto unbooted = std::count_if(rows.begin(), rows.end(), [](const TimingRecord& r) {
        return !r.booted();
    });
    if (unbooted > 0) o << "  rows with T_c = inf: device never completed a power cycle\n";
    if (const auto fit = fit_tc_vs_d_squared(rows)) {
        o << "  T_c vs d^2 off the plateau: slope " << num(fit->slope, 3) << " ms/m^2, intercept "
          << num(fit->intercept, 3) << " ms, R^2 " << num(fit->r_squared, 4) << " over " << fit->points
          << " rows\n";
    }
    return o.str();
}

std::string format_correlation_report(const CorrelationResult& result) {
    std::ostringstream o;
    o << "correlation study\n";
    o << "  paired distances: " << result.rows.size() << '\n';
    if (!result.excluded_distances.empty()) {
        o << "  excluded (T_c = inf):";
        for (double d : result.excluded_distances) o << ' ' << num(d, 2);
        o << '\n';
    }
    o << "  pearson(T_c device, T_c reader): "
      << (result.coefficient ? num(*result.coefficient, 6) : std::string("undefined")) << '\n';
    if (!result.warning.empty()) o << "  warning: " << result.warning << '\n';
    return o.str();
}

std::string format_benchmark_report(const BenchmarkResult& result) {
    std::ostringstream o;
    char buf[256];
    o << "policy benchmark\n";
    o << "  policy    d [m]   trials   success   mean latency\n";
    for (const auto& c : result.cells) {
        const std::string latency =
            c.mean_latency_ms ? num(*c.mean_latency_ms, 1) + " ms" : std::string("latency: n/a");
        std::snprintf(buf, sizeof buf, "  %-8s %6.2f %8d %8.0f%%   %s\n", policy_label(c.policy).c_str(),
                      c.d_m, c.trials, 100.0 * c.success_rate(), latency.c_str());
        o << buf;
    }
    int redraws = 0;
    int uncommenced = 0;
    for (const auto& t : result.trials) {
        redraws += t.redraws;
        if (!t.commenced) ++uncommenced;
    }
    o << "  re-drawn placements (task never commenced): " << redraws << '\n';
    if (uncommenced > 0) o << "  trials that never commenced after the re-draw cap: " << uncommenced << '\n';
    return o.str();
}

std::string format_calibration_report(const CalibrationResult& result) {
    std::ostringstream o;
    o << "calibration\n";
    o << "  status: " << (result.feasible ? "ok" : "not met") << '\n';
    o << "  " << result.message << '\n';
    o << "  achievable plateau: " << num(result.max_plateau_rr, 2) << " reads/s\n";
    return o.str();
}

std::string sweep_svg(std::span<const TimingRecord> rows) {
    Series tc{"T_c device [ms]", "#1f77b4", {}};
    Series est{"T_c reader [ms]", "#d62728", {}};
    for (const auto& r : rows) {
        tc.points.emplace_back(r.d_m, r.tc_ms);
        est.points.emplace_back(r.d_m, r.booted() ? r.tc_est_ms : NAN);
    }
    const std::vector<Series> s{tc, est};
    return chart_svg("Charge time vs distance", fit_axis("distance [m]", s, true),
                     fit_axis("time [ms]", s, false), s);
}

std::string correlate_svg(const CorrelationResult& result) {
    Series pts{"distances", "#1f77b4", {}, false};
    for (const auto& r : result.rows) pts.points.emplace_back(r.tc_ms, r.tc_est_ms);
    const std::vector<Series> s{pts};
    std::string title = "T_c device vs reader";
    if (result.coefficient) title += " (r = " + num(*result.coefficient, 4) + ")";
    return chart_svg(title, fit_axis("T_c device [ms]", s, true), fit_axis("T_c reader [ms]", s, false),
                     s);
}

std::string benchmark_svg(const BenchmarkResult& result) {
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c"};
    std::map<int, Series> by_policy;
    for (const auto& c : result.cells) {
        auto& s = by_policy[static_cast<int>(c.policy)];
        if (s.name.empty()) {
            s.name = policy_label(c.policy) + " success [%]";
            s.color = colors[static_cast<int>(c.policy) % 3];
        }
        s.points.emplace_back(c.d_m, 100.0 * c.success_rate());
    }
    std::vector<Series> s;
    for (auto& [k, v] : by_policy) s.push_back(v);
    Axis y{"success rate [%]", 0.0, 105.0};
    return chart_svg("Task success rate vs distance", fit_axis("distance [m]", s, true), y, s);
}

void emit_report(const std::string& dir, std::span<const TimingRecord> sweep,
                 const ReportOptions& opts) {
    if (sweep.empty()) throw std::invalid_argument("report: no sweep rows");
    ensure_dir(dir);
    write_csv_file(join(dir, "sweep.csv"), [&](std::ostream& o) { write_sweep_csv(o, sweep); });
    write_text_file(join(dir, "report.txt"), format_sweep_report(sweep));
    if (opts.plots) write_text_file(join(dir, "sweep.svg"), sweep_svg(sweep));
}

void emit_report(const std::string& dir, const CorrelationResult& result, const ReportOptions& opts) {
    ensure_dir(dir);
    write_csv_file(join(dir, "correlate.csv"), [&](std::ostream& o) { write_correlate_csv(o, result); });
    write_text_file(join(dir, "report.txt"), format_correlation_report(result));
    if (opts.plots) write_text_file(join(dir, "correlate.svg"), correlate_svg(result));
}

void emit_report(const std::string& dir, const BenchmarkResult& result, const ReportOptions& opts) {
    if (result.cells.empty()) throw std::invalid_argument("report: no benchmark results");
    ensure_dir(dir);
    write_csv_file(join(dir, "benchmark.csv"), [&](std::ostream& o) { write_benchmark_csv(o, result); });
    write_text_file(join(dir, "report.txt"), format_benchmark_report(result));
    if (opts.plots) write_text_file(join(dir, "benchmark.svg"), benchmark_svg(result));
}

void emit_report(const std::string& dir, const CalibrationResult& result) {
    ensure_dir(dir);
    write_text_file(join(dir, "report.txt"), format_calibration_report(result));
    if (result.feasible) {
        write_text_file(join(dir, "calibrated.cfg"),
                        "# rf-intermit-sim v1 calibrated configuration\n" + format_config(result.config));
    }
}

}  // namespace rfsim::harness
