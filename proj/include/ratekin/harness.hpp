#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ratekin/particle.hpp"
#include "ratekin/types.hpp"

namespace ratekin {

/// Parameters shared by the studies. Each study reads the fields it needs.
struct StudyConfig {
  ModelParams params{0.99, 1.0};
  std::vector<std::size_t> n_grid{100, 1000, 10000};
  std::vector<double> beta2_grid{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> lambda_grid{0.95, 0.99, 0.995, 1.0};
  std::vector<double> eta_list{0.0, 0.5, 0.9};
  std::size_t horizon = 200;
  std::size_t replicates = 8;
  std::uint64_t master_seed = 42;

  /// Controls of the convergence study.
  ControlTriple controls{0.1, 0.0, 1.0};
  double r0 = 0.0;
  /// Smallest N entering the slope fit.
  std::size_t fit_min_n = 0;

  /// Population, gain and initial accuracy of the invariance study.
  std::size_t invariance_n = 10000;
  double invariance_gain = 0.9;
  double invariance_r0 = 0.1;
  ScaleSource scale_source = ScaleSource::mean_field;

  /// Worker threads for independent cells; 0 picks hardware concurrency.
  unsigned threads = 0;
};

/// Throws std::invalid_argument on empty grids or a zero horizon.
void validate(const StudyConfig& cfg);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// OLS of log(ys) on log(xs). Needs at least 3 points, all positive.
LogLogFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys);

/// E_N = sqrt(mean_{t=1..T} (r_t^(N) - r_t^(inf))^2).
double time_averaged_l2_error(std::span<const double> accuracy, std::span<const double> reference);

struct ConvergenceResult {
  std::vector<std::size_t> n_values;
  std::vector<double> l2_errors;     ///< mean over replicates
  std::vector<double> l2_std_errors; ///< standard error of that mean
  std::vector<std::vector<double>> per_replicate;  ///< [n index][replicate]
  std::optional<LogLogFit> fit;      ///< empty when an error is zero (degenerate)
  std::size_t replicates = 0;
};

ConvergenceResult convergence_study(const StudyConfig& cfg);

struct RedQueenRow {
  double lambda = 0.0;
  double beta2 = 0.0;
  double r_infinity = 0.0;
};

/// r_inf over lambda_grid x beta2_grid; lambda = 1 rows are the static limit 1.0.
std::vector<RedQueenRow> red_queen_study(const StudyConfig& cfg);

enum class ScaleRegime { fixed_scale, adaptive_scale };
std::string to_string(ScaleRegime regime);

struct InvarianceCell {
  ScaleRegime regime = ScaleRegime::fixed_scale;
  double eta = 0.0;
  Trajectory trajectory;
};

struct InvarianceResult {
  std::vector<InvarianceCell> cells;
  double fixed_spread = 0.0;
  double adaptive_spread = 0.0;
};

/// max_t (max_eta r_t - min_eta r_t) over a set of equally long series.
double cross_spread(std::span<const std::vector<double>> series);

/// Matched-seed runs per (regime, eta): every cell shares the initial
/// population and all shock streams.
InvarianceResult invariance_study(const StudyConfig& cfg);

struct PhaseRow {
  double r = 0.0;
  double eta_star = 0.0;
  double value = 0.0;
};

std::vector<PhaseRow> phase_transition_study(double kappa_c, std::span<const double> r_grid);

}  // namespace ratekin
