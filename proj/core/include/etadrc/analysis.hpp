#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "etadrc/simulator.hpp"

namespace etadrc {

struct Quantiles {
    double median = 0.0;
    double q90 = 0.0;
    double max = 0.0;
};

Quantiles quantiles(std::vector<double> values);

struct MechanismStats {
    double count_mean = 0.0;
    double count_median = 0.0;
    std::size_t count_min = 0;
    std::size_t count_max = 0;
    double gap_min = 0.0;
    double gap_mean = 0.0;
    double gap_median = 0.0;
    std::size_t dwell_violations = 0;
};

struct EventReport {
    std::size_t paths = 0;
    double horizon = 0.0;
    MechanismStats eso;
    MechanismStats ctrl;
};

/// Count distribution, inter-event gaps (pooled over paths) and dwell
/// violations per mechanism. Throws DomainError for an empty input.
EventReport event_stats(std::span<const EventLog> logs, double horizon);
EventReport event_stats(std::span<const Trajectory> ensemble, double horizon);

/// Monte Carlo moments of an ensemble on its shared time grid.
///
/// Index i runs over 0..n for errors (i = n is the extended state) and
/// over 0..n-1 for the state magnitudes. "window" quantities average over
/// grid points with t >= window_start; sup quantities take the per-path
/// maximum over the same window and then quantiles across paths.
struct McSummary {
    int n = 0;
    std::size_t paths = 0;
    std::vector<std::uint64_t> stream_ids;
    double window_start = 0.0;
    std::vector<double> t;
    std::vector<std::vector<double>> mse;          // E|x_i - xhat_i|^2 per grid point
    std::vector<std::vector<double>> mean_square;  // E|x_i|^2 per grid point
    std::vector<double> window_mse;
    std::vector<double> window_mse_stderr;
    std::vector<double> window_mean_square;
    double window_magnitude = 0.0;  // sum_i window_mean_square[i]
    std::vector<Quantiles> sup_error;
    std::vector<Quantiles> sup_state;
    EventReport events;
};

/// Streaming form of mc_summary: only the per-grid sums and per-path window
/// statistics are kept, so ensembles need not fit in memory at once. The
/// result depends on the order of add() calls only through rounding.
class McAccumulator {
public:
    explicit McAccumulator(double window_start);

    /// Throws InvalidDimensionError when the grid differs from earlier paths
    /// and DomainError when the window starts at or after the horizon.
    void add(const Trajectory& trajectory);
    std::size_t paths() const noexcept { return stream_ids_.size(); }
    /// Throws DomainError when nothing was added.
    McSummary finish() const;

private:
    double window_start_;
    int n_ = 0;
    std::vector<double> t_;
    std::size_t window_points_ = 0;
    std::vector<std::uint64_t> stream_ids_;
    std::vector<std::vector<double>> mse_sum_;
    std::vector<std::vector<double>> ms_sum_;
    std::vector<std::vector<double>> path_window_mse_;
    std::vector<std::vector<double>> path_sup_error_;
    std::vector<std::vector<double>> path_sup_state_;
    std::vector<EventLog> logs_;
};

/// Paths are aggregated in stream_id order, so the result does not depend
/// on the order of `ensemble`. Throws DomainError for an empty ensemble or
/// a window past the horizon, InvalidDimensionError for mismatched grids.
McSummary mc_summary(std::span<const Trajectory> ensemble, double window_start);

/// Runs streams 0..paths-1 in chunks and summarizes them; equal to
/// mc_summary(run_ensemble(cfg, paths), window_start) without holding every
/// trajectory at once.
McSummary run_mc_summary(const SimConfig& cfg, std::size_t paths, double window_start, unsigned threads = 0);

struct ScalingPoint {
    double r = 0.0;
    bool ok = false;
    std::string failure;
    McSummary summary;
};

struct ScalingReport {
    std::size_t paths = 0;
    double window_fraction = 0.75;
    std::vector<ScalingPoint> points;
    std::vector<double> error_slopes;  // d log(window MSE_i) / d log r, i = 0..n
    double magnitude_slope = 0.0;
    std::vector<bool> error_decreasing;  // strictly decreasing in r, per i
    bool ordering_at_largest_r = false;  // MSE_1 < MSE_2 < ... < MSE_{n+1}
    bool magnitude_decreasing = false;
    std::vector<std::string> warnings;

    std::size_t succeeded() const;
};

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Re-runs `base` for every r (dwell times and thresholds follow r) with
/// `paths` trajectories each, measuring over the last (1 - window_fraction)
/// of the horizon. A failing r is recorded and the study continues.
/// Throws DomainError unless r_values has >= 2 strictly increasing entries.
ScalingReport scaling_study(const SimConfig& base, std::span<const double> r_values, std::size_t paths,
                            double window_fraction = 0.75, unsigned threads = 0);

nlohmann::json to_json(const EventReport& report);
nlohmann::json to_json(const McSummary& summary);
nlohmann::json to_json(const ScalingReport& report);
nlohmann::json to_json(const ValidationReport& report);

/// t,mse1..mse{n+1},ms1..msn
void write_mc_curves_csv(std::ostream& out, const McSummary& summary);
/// r,t,mse1..mse{n+1},ms1..msn for every successful r.
void write_scaling_curves_csv(std::ostream& out, const ScalingReport& report);

}  // namespace etadrc
