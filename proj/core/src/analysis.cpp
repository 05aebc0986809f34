#include "etadrc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

#include "etadrc/errors.hpp"

namespace etadrc {
namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

MechanismStats mechanism_stats(std::span<const EventLog> logs, bool eso) {
    MechanismStats s;
    std::vector<double> counts;
    std::vector<double> gaps;
    s.count_min = SIZE_MAX;
    for (const auto& log : logs) {
        const auto& events = eso ? log.eso : log.ctrl;
        counts.push_back(static_cast<double>(events.size()));
        s.count_min = std::min(s.count_min, events.size());
        s.count_max = std::max(s.count_max, events.size());
        for (std::size_t i = 1; i < events.size(); ++i) gaps.push_back(events[i].time - events[i - 1].time);
        s.dwell_violations += dwell_violations(events, eso ? log.tau : log.upsilon);
    }
    s.count_mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());
    s.count_median = median_of(counts);
    if (!gaps.empty()) {
        s.gap_min = *std::min_element(gaps.begin(), gaps.end());
        s.gap_mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
        s.gap_median = median_of(std::move(gaps));
    }
    return s;
}

}  // namespace

Quantiles quantiles(std::vector<double> values) {
    if (values.empty()) return {};
    std::sort(values.begin(), values.end());
    const auto at = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {at(0.5), at(0.9), values.back()};
}

EventReport event_stats(std::span<const EventLog> logs, double horizon) {
    if (logs.empty()) throw DomainError("event statistics need at least one log");
    EventReport out;
    out.paths = logs.size();
    out.horizon = horizon;
    out.eso = mechanism_stats(logs, true);
    out.ctrl = mechanism_stats(logs, false);
    return out;
}

EventReport event_stats(std::span<const Trajectory> ensemble, double horizon) {
    std::vector<EventLog> logs;
    logs.reserve(ensemble.size());
    for (const auto& tr : ensemble) logs.push_back(tr.events);
    return event_stats(std::span<const EventLog>(logs), horizon);
}

McAccumulator::McAccumulator(double window_start) : window_start_(window_start) {}

void McAccumulator::add(const Trajectory& tr) {
    const auto& rec = tr.record;
    if (stream_ids_.empty()) {
        if (rec.size() == 0 || !(window_start_ < rec.t.back()))
            throw DomainError("window start must precede the horizon");
        n_ = rec.n;
        t_ = rec.t;
        window_points_ = static_cast<std::size_t>(
            std::count_if(t_.begin(), t_.end(), [&](double t) { return t >= window_start_; }));
        const auto ni = static_cast<std::size_t>(n_);
        mse_sum_.assign(ni + 1, std::vector<double>(t_.size(), 0.0));
        ms_sum_.assign(ni, std::vector<double>(t_.size(), 0.0));
        path_window_mse_.assign(ni + 1, {});
        path_sup_error_.assign(ni + 1, {});
        path_sup_state_.assign(ni, {});
    } else if (rec.n != n_ || rec.t != t_) {
        throw InvalidDimensionError("ensemble trajectories do not share a time grid");
    }

    const auto ni = static_cast<std::size_t>(n_);
    std::vector<double> wmse(ni + 1, 0.0), sup_err(ni + 1, 0.0), sup_x(ni, 0.0);
    for (std::size_t k = 0; k < t_.size(); ++k) {
        const bool in_window = t_[k] >= window_start_;
        for (int i = 0; i <= n_; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const double e = rec.extended_state(k, i) - rec.estimate(k, i);
            mse_sum_[ii][k] += e * e;
            if (in_window) {
                wmse[ii] += e * e;
                sup_err[ii] = std::max(sup_err[ii], std::abs(e));
            }
        }
        for (int i = 0; i < n_; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const double xi = rec.state(k, i);
            ms_sum_[ii][k] += xi * xi;
            if (in_window) sup_x[ii] = std::max(sup_x[ii], std::abs(xi));
        }
    }
    for (std::size_t i = 0; i <= ni; ++i) {
        path_window_mse_[i].push_back(wmse[i] / static_cast<double>(window_points_));
        path_sup_error_[i].push_back(sup_err[i]);
    }
    for (std::size_t i = 0; i < ni; ++i) path_sup_state_[i].push_back(sup_x[i]);
    stream_ids_.push_back(tr.stream_id);
    logs_.push_back(tr.events);
}

McSummary McAccumulator::finish() const {
    if (stream_ids_.empty()) throw DomainError("Monte Carlo summary needs a non-empty ensemble");
    McSummary s;
    s.n = n_;
    s.paths = stream_ids_.size();
    s.stream_ids = stream_ids_;
    s.window_start = window_start_;
    s.t = t_;
    const double inv_paths = 1.0 / static_cast<double>(s.paths);
    s.mse = mse_sum_;
    s.mean_square = ms_sum_;
    for (auto& row : s.mse)
        for (double& v : row) v *= inv_paths;
    for (auto& row : s.mean_square)
        for (double& v : row) v *= inv_paths;

    auto window_mean = [&](const std::vector<double>& curve) {
        double acc = 0.0;
        for (std::size_t k = 0; k < t_.size(); ++k)
            if (t_[k] >= window_start_) acc += curve[k];
        return acc / static_cast<double>(window_points_);
    };
    const auto ni = static_cast<std::size_t>(n_);
    for (std::size_t i = 0; i <= ni; ++i) {
        s.window_mse.push_back(window_mean(s.mse[i]));
        const auto& v = path_window_mse_[i];
        const double m = static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - s.window_mse[i]) * (x - s.window_mse[i]);
        s.window_mse_stderr.push_back(v.size() > 1 ? std::sqrt(var / (m - 1.0) / m) : 0.0);
        s.sup_error.push_back(quantiles(path_sup_error_[i]));
    }
    for (std::size_t i = 0; i < ni; ++i) {
        s.window_mean_square.push_back(window_mean(s.mean_square[i]));
        s.sup_state.push_back(quantiles(path_sup_state_[i]));
    }
    s.window_magnitude = std::accumulate(s.window_mean_square.begin(), s.window_mean_square.end(), 0.0);
    s.events = event_stats(std::span<const EventLog>(logs_), t_.back());
    return s;
}

McSummary mc_summary(std::span<const Trajectory> ensemble, double window_start) {
    if (ensemble.empty()) throw DomainError("Monte Carlo summary needs a non-empty ensemble");
    std::vector<const Trajectory*> paths;
    for (const auto& tr : ensemble) paths.push_back(&tr);
    std::stable_sort(paths.begin(), paths.end(),
                     [](const Trajectory* a, const Trajectory* b) { return a->stream_id < b->stream_id; });
    McAccumulator acc(window_start);
    for (const auto* p : paths) acc.add(*p);
    return acc.finish();
}

McSummary run_mc_summary(const SimConfig& cfg, std::size_t paths, double window_start, unsigned threads) {
    if (paths < 1) throw DomainError("ensemble size must be >= 1");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t chunk = std::max<std::size_t>(8, 2 * static_cast<std::size_t>(threads));
    McAccumulator acc(window_start);
    for (std::size_t first = 0; first < paths; first += chunk) {
        const auto count = std::min(chunk, paths - first);
        for (const auto& tr : run_ensemble(cfg, count, threads, first)) acc.add(tr);
    }
    return acc.finish();
}

std::size_t ScalingReport::succeeded() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return p.ok; }));
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs >= 2 paired points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

ScalingReport scaling_study(const SimConfig& base, std::span<const double> r_values, std::size_t paths,
                            double window_fraction, unsigned threads) {
    if (r_values.size() < 2) throw DomainError("scaling study needs at least two r values");
    for (std::size_t i = 1; i < r_values.size(); ++i)
        if (!(r_values[i] > r_values[i - 1])) throw DomainError("r values must be strictly increasing");
    if (paths < 1) throw DomainError("scaling study needs >= 1 path per r");
    if (!(window_fraction >= 0.0 && window_fraction < 1.0)) throw DomainError("window fraction must be in [0, 1)");

    ScalingReport report;
    report.paths = paths;
    report.window_fraction = window_fraction;
    if (paths == 1) report.warnings.push_back("single path per r: Monte Carlo averages have no variance estimate");

    for (double r : r_values) {
        ScalingPoint point;
        point.r = r;
        SimConfig cfg = base;
        cfg.design.r = r;
        try {
            if (!cfg.force) {
                const auto validation = validate_design(cfg.design, cfg.spec);
                if (!validation.all_passed()) throw PreconditionError("design validation failed at this r");
            }
            point.summary = run_mc_summary(cfg, paths, window_fraction * cfg.horizon, threads);
            point.ok = true;
        } catch (const Error& e) {
            point.failure = e.what();
        }
        report.points.push_back(std::move(point));
    }

    std::vector<const ScalingPoint*> good;
    for (const auto& p : report.points)
        if (p.ok) good.push_back(&p);
    if (good.size() < report.points.size())
        report.warnings.push_back(std::to_string(report.points.size() - good.size()) + " r value(s) failed");
    if (good.size() < 2) return report;

    const int n = good.front()->summary.n;
    std::vector<double> rs;
    for (const auto* p : good) rs.push_back(p->r);
    for (int i = 0; i <= n; ++i) {
        std::vector<double> ys;
        bool decreasing = true;
        for (const auto* p : good) {
            const double y = p->summary.window_mse[static_cast<std::size_t>(i)];
            if (!ys.empty() && !(y < ys.back())) decreasing = false;
            ys.push_back(y);
        }
        report.error_decreasing.push_back(decreasing);
        const bool positive = std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0.0; });
        report.error_slopes.push_back(positive ? loglog_slope(rs, ys) : NAN);
    }
    std::vector<double> mags;
    report.magnitude_decreasing = true;
    for (const auto* p : good) {
        if (!mags.empty() && !(p->summary.window_magnitude < mags.back())) report.magnitude_decreasing = false;
        mags.push_back(p->summary.window_magnitude);
    }
    const bool positive = std::all_of(mags.begin(), mags.end(), [](double v) { return v > 0.0; });
    report.magnitude_slope = positive ? loglog_slope(rs, mags) : NAN;

    const auto& last = good.back()->summary.window_mse;
    report.ordering_at_largest_r = true;
    for (std::size_t i = 1; i < last.size(); ++i)
        if (!(last[i - 1] < last[i])) report.ordering_at_largest_r = false;
    return report;
}

namespace {

nlohmann::json to_json(const MechanismStats& s) {
    return {{"count_mean", s.count_mean}, {"count_median", s.count_median}, {"count_min", s.count_min},
            {"count_max", s.count_max},   {"gap_min", s.gap_min},           {"gap_mean", s.gap_mean},
            {"gap_median", s.gap_median}, {"dwell_violations", s.dwell_violations}};
}

nlohmann::json to_json(const Quantiles& q) { return {{"median", q.median}, {"q90", q.q90}, {"max", q.max}}; }

nlohmann::json nullable(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const EventReport& report) {
    return {{"kind", "event_report"},
            {"paths", report.paths},
            {"horizon", report.horizon},
            {"eso", to_json(report.eso)},
            {"ctrl", to_json(report.ctrl)}};
}

nlohmann::json to_json(const McSummary& s) {
    nlohmann::json sup_err = nlohmann::json::array(), sup_x = nlohmann::json::array();
    for (const auto& q : s.sup_error) sup_err.push_back(to_json(q));
    for (const auto& q : s.sup_state) sup_x.push_back(to_json(q));
    return {{"kind", "mc_summary"},
            {"n", s.n},
            {"paths", s.paths},
            {"stream_ids", s.stream_ids},
            {"window_start", s.window_start},
            {"horizon", s.t.empty() ? 0.0 : s.t.back()},
            {"samples", s.t.size()},
            {"window_mse", s.window_mse},
            {"window_mse_stderr", s.window_mse_stderr},
            {"window_mean_square", s.window_mean_square},
            {"window_magnitude", s.window_magnitude},
            {"sup_error", sup_err},
            {"sup_state", sup_x},
            {"events", to_json(s.events)}};
}

nlohmann::json to_json(const ScalingReport& report) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : report.points) {
        nlohmann::json j = {{"r", p.r}, {"ok", p.ok}};
        if (p.ok) {
            j["window_mse"] = p.summary.window_mse;
            j["window_mse_stderr"] = p.summary.window_mse_stderr;
            j["window_magnitude"] = p.summary.window_magnitude;
            j["window_start"] = p.summary.window_start;
            j["eso_count_mean"] = p.summary.events.eso.count_mean;
            j["ctrl_count_mean"] = p.summary.events.ctrl.count_mean;
        } else {
            j["failure"] = p.failure;
        }
        points.push_back(std::move(j));
    }
    nlohmann::json slopes = nlohmann::json::array();
    for (double v : report.error_slopes) slopes.push_back(nullable(v));
    return {{"kind", "scaling_report"},
            {"paths", report.paths},
            {"window_fraction", report.window_fraction},
            {"points", points},
            {"error_slopes", slopes},
            {"magnitude_slope", nullable(report.magnitude_slope)},
            {"error_decreasing", report.error_decreasing},
            {"ordering_at_largest_r", report.ordering_at_largest_r},
            {"magnitude_decreasing", report.magnitude_decreasing},
            {"warnings", report.warnings}};
}

nlohmann::json to_json(const ValidationReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"value", nullable(c.value)},
                          {"threshold", nullable(c.threshold)},
                          {"detail", c.detail}});
    return {{"kind", "validation"},
            {"all_passed", report.all_passed()},
            {"q1_lambda_max", nullable(report.q1_lambda_max)},
            {"theta_threshold", nullable(report.theta_threshold)},
            {"dwell_product", report.dwell_product},
            {"checks", checks}};
}

namespace {

void curve_header(std::ostream& out, int n) {
    for (int i = 1; i <= n + 1; ++i) out << ",mse" << i;
    for (int i = 1; i <= n; ++i) out << ",ms" << i;
    out << '\n';
}

void curve_rows(std::ostream& out, const McSummary& s, const std::string& prefix) {
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        out << prefix << format_double(s.t[k]);
        for (const auto& row : s.mse) out << ',' << format_double(row[k]);
        for (const auto& row : s.mean_square) out << ',' << format_double(row[k]);
        out << '\n';
    }
}

}  // namespace

void write_mc_curves_csv(std::ostream& out, const McSummary& s) {
    out << "t";
    curve_header(out, s.n);
    curve_rows(out, s, "");
}

void write_scaling_curves_csv(std::ostream& out, const ScalingReport& report) {
    int n = 0;
    for (const auto& p : report.points)
        if (p.ok) n = p.summary.n;
    out << "r,t";
    curve_header(out, n);
    for (const auto& p : report.points)
        if (p.ok) curve_rows(out, p.summary, format_double(p.r) + ",");
}

}  // namespace etadrc
