#include "report.hpp"

#include <cstdio>
#include <ostream>
#include <string>

namespace etadrc::cli {
namespace {

std::string num(const nlohmann::json& j) {
    if (j.is_null()) return "-";
    if (!j.is_number()) return j.dump();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", j.get<double>());
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

void print_events(std::ostream& out, const nlohmann::json& ev) {
    out << "events (" << ev.value("paths", 0) << " paths, horizon " << num(ev["horizon"]) << ")\n";
    out << "  " << pad("mech", 6) << pad("mean", 12) << pad("min", 8) << pad("max", 8) << pad("gap_min", 12)
        << pad("gap_mean", 12) << "dwell_viol\n";
    for (const char* mech : {"eso", "ctrl"}) {
        const auto& m = ev[mech];
        out << "  " << pad(mech, 6) << pad(num(m["count_mean"]), 12) << pad(num(m["count_min"]), 8)
            << pad(num(m["count_max"]), 8) << pad(num(m["gap_min"]), 12) << pad(num(m["gap_mean"]), 12)
            << m["dwell_violations"].get<std::size_t>() << '\n';
    }
}

}  // namespace

void print_validation(std::ostream& out, const nlohmann::json& report) {
    out << "design validation: " << (report["all_passed"].get<bool>() ? "PASS" : "FAIL") << '\n';
    out << "  " << pad("check", 18) << pad("result", 8) << pad("value", 14) << pad("threshold", 14) << "detail\n";
    for (const auto& c : report["checks"]) {
        out << "  " << pad(c["name"].get<std::string>(), 18) << pad(c["passed"].get<bool>() ? "pass" : "FAIL", 8)
            << pad(num(c["value"]), 14) << pad(num(c["threshold"]), 14) << c["detail"].get<std::string>() << '\n';
    }
}

void print_mc_summary(std::ostream& out, const nlohmann::json& s) {
    const int n = s["n"].get<int>();
    out << "Monte Carlo summary: " << s["paths"].get<std::size_t>() << " paths, window [" << num(s["window_start"])
        << ", " << num(s["horizon"]) << "]\n";
    out << "  " << pad("state", 8) << pad("mse", 14) << pad("stderr", 14) << pad("sup_err_med", 14)
        << pad("sup_err_q90", 14) << "mean_sq\n";
    for (int i = 0; i <= n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out << "  " << pad("x" + std::to_string(i + 1), 8) << pad(num(s["window_mse"][k]), 14)
            << pad(num(s["window_mse_stderr"][k]), 14) << pad(num(s["sup_error"][k]["median"]), 14)
            << pad(num(s["sup_error"][k]["q90"]), 14) << (i < n ? num(s["window_mean_square"][k]) : "-") << '\n';
    }
    out << "  sum of mean squares: " << num(s["window_magnitude"]) << '\n';
    print_events(out, s["events"]);
}

void print_scaling_report(std::ostream& out, const nlohmann::json& report) {
    out << "scaling study: " << report["paths"].get<std::size_t>() << " paths per r, window fraction "
        << num(report["window_fraction"]) << '\n';
    for (const auto& p : report["points"]) {
        out << "  r = " << pad(num(p["r"]), 10);
        if (!p["ok"].get<bool>()) {
            out << "FAILED: " << p["failure"].get<std::string>() << '\n';
            continue;
        }
        out << "mse";
        for (const auto& v : p["window_mse"]) out << ' ' << pad(num(v), 13);
        out << " magnitude " << num(p["window_magnitude"]) << '\n';
    }
    out << "  slopes (log mse vs log r):";
    for (const auto& v : report["error_slopes"]) out << ' ' << num(v);
    out << "\n  magnitude slope: " << num(report["magnitude_slope"]) << '\n';
    out << "  decreasing in r:";
    for (const auto& v : report["error_decreasing"]) out << ' ' << (v.get<bool>() ? "yes" : "no");
    out << "\n  ordering at largest r: " << (report["ordering_at_largest_r"].get<bool>() ? "yes" : "no") << '\n';
    out << "  magnitude decreasing: " << (report["magnitude_decreasing"].get<bool>() ? "yes" : "no") << '\n';
    for (const auto& w : report["warnings"]) out << "  warning: " << w.get<std::string>() << '\n';
}

void print_manifest(std::ostream& out, const nlohmann::json& m) {
    out << "run manifest: " << m.value("command", "?") << " (" << m.value("tool", "?") << ' '
        << m.value("version", "?") << ")\n";
    out << "  status: " << m.value("status", "?") << '\n';
    if (m.contains("divergence")) {
        out << "  diverged at t = " << num(m["divergence"]["time"]) << " on stream "
            << m["divergence"]["stream_id"].get<std::uint64_t>() << '\n';
    }
    out << "  started: " << m.value("started_utc", "?") << "  finished: " << m.value("finished_utc", "-") << '\n';
    out << "  seed: " << m["config"]["simulation"]["seed"].get<std::uint64_t>() << '\n';
    if (m.contains("validation"))
        out << "  validation: " << (m["validation"]["all_passed"].get<bool>() ? "pass" : "FAIL") << " digest "
            << m["validation"]["digest"].get<std::string>() << '\n';
    for (const auto& [key, path] : m["outputs"].items()) out << "  " << pad(key, 12) << path.get<std::string>() << '\n';
}

bool print_any(std::ostream& out, const nlohmann::json& doc) {
    if (!doc.is_object()) return false;
    if (doc.contains("tool") && doc.contains("config")) {
        print_manifest(out, doc);
        return true;
    }
    const std::string kind = doc.value("kind", "");
    if (kind == "validation") print_validation(out, doc);
    else if (kind == "mc_summary") print_mc_summary(out, doc);
    else if (kind == "scaling_report") print_scaling_report(out, doc);
    else if (kind == "event_report") print_events(out, doc);
    else return false;
    return true;
}

}  // namespace etadrc::cli
