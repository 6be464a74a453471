#include "ratekin/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "ratekin/control.hpp"
#include "ratekin/meanfield.hpp"

namespace ratekin {

namespace {

// Runs job(i) for i in [0, count) on up to `threads` workers. Jobs write only
// to their own output slot, so results do not depend on scheduling.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job job) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
}

constexpr std::uint64_t kInvarianceLabel = 0x1f;

}  // namespace

void validate(const StudyConfig& cfg) {
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (cfg.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (cfg.n_grid.empty() || cfg.beta2_grid.empty() || cfg.lambda_grid.empty() ||
      cfg.eta_list.empty()) {
    throw std::invalid_argument("study grids must be non-empty");
  }
}

LogLogFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit: size mismatch");
  if (xs.size() < 3) throw std::invalid_argument("fit: need at least 3 points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0 && ys[i] > 0.0)) throw std::domain_error("fit: inputs must be positive");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::domain_error("fit: xs must not all be equal");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

double time_averaged_l2_error(std::span<const double> accuracy,
                              std::span<const double> reference) {
  if (accuracy.size() != reference.size() || accuracy.size() < 2) {
    throw std::invalid_argument("l2 error: series must match and cover t >= 1");
  }
  double acc = 0.0;
  for (std::size_t t = 1; t < accuracy.size(); ++t) {
    const double d = accuracy[t] - reference[t];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(accuracy.size() - 1));
}

ConvergenceResult convergence_study(const StudyConfig& cfg) {
  validate(cfg);
  const std::size_t reps = cfg.replicates;
  const std::size_t cells = cfg.n_grid.size() * reps;
  std::vector<double> errors(cells);

  PolicySpec policy;
  policy.mode = PolicyMode::fixed;
  policy.fixed_controls = cfg.controls;
  const RngStream master(cfg.master_seed);

  parallel_for(cells, cfg.threads, [&](std::size_t cell) {
    const std::size_t ni = cell / reps;
    const std::size_t rep = cell % reps;
    TrajectoryOptions opts;
    opts.n = cfg.n_grid[ni];
    opts.horizon = cfg.horizon;
    opts.r0 = cfg.r0;
    const RngStream stream = master.derive(cfg.n_grid[ni]).derive(rep);
    const Trajectory tr = run_trajectory(opts, policy, cfg.params, stream);
    errors[cell] = time_averaged_l2_error(tr.accuracy, tr.reference);
  });

  ConvergenceResult out;
  out.replicates = reps;
  out.n_values = cfg.n_grid;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    std::vector<double> row(errors.begin() + ni * reps, errors.begin() + (ni + 1) * reps);
    double mean = 0.0;
    for (double e : row) mean += e;
    mean /= static_cast<double>(reps);
    double ss = 0.0;
    for (double e : row) ss += (e - mean) * (e - mean);
    out.l2_errors.push_back(mean);
    out.l2_std_errors.push_back(
        reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps)) : 0.0);
    out.per_replicate.push_back(std::move(row));
  }

  std::vector<double> xs;
  std::vector<double> ys;
  bool degenerate = false;
  for (std::size_t ni = 0; ni < out.n_values.size(); ++ni) {
    if (out.n_values[ni] < cfg.fit_min_n) continue;
    if (!(out.l2_errors[ni] > 0.0)) degenerate = true;
    xs.push_back(static_cast<double>(out.n_values[ni]));
    ys.push_back(out.l2_errors[ni]);
  }
  if (!degenerate && xs.size() >= 3) out.fit = fit_loglog_slope(xs, ys);
  return out;
}

std::vector<RedQueenRow> red_queen_study(const StudyConfig& cfg) {
  validate(cfg);
  std::vector<RedQueenRow> rows;
  for (double lambda : cfg.lambda_grid) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
      throw std::domain_error("red queen: lambda must lie in (0,1]");
    }
    for (double beta2 : cfg.beta2_grid) {
      const double r_inf = lambda == 1.0 ? 1.0 : fixed_point(ModelParams(lambda, beta2));
      rows.push_back({lambda, beta2, r_inf});
    }
  }
  return rows;
}

std::string to_string(ScaleRegime regime) {
  return regime == ScaleRegime::fixed_scale ? "fixed" : "adaptive";
}

double cross_spread(std::span<const std::vector<double>> series) {
  if (series.empty()) return 0.0;
  const std::size_t len = series.front().size();
  double spread = 0.0;
  for (std::size_t t = 0; t < len; ++t) {
    double lo = series.front()[t];
    double hi = lo;
    for (const auto& s : series) {
      if (s.size() != len) throw std::invalid_argument("cross_spread: length mismatch");
      lo = std::min(lo, s[t]);
      hi = std::max(hi, s[t]);
    }
    spread = std::max(spread, hi - lo);
  }
  return spread;
}

InvarianceResult invariance_study(const StudyConfig& cfg) {
  validate(cfg);
  const std::array<ScaleRegime, 2> regimes{ScaleRegime::fixed_scale, ScaleRegime::adaptive_scale};
  InvarianceResult out;
  for (ScaleRegime regime : regimes) {
    for (double eta : cfg.eta_list) out.cells.push_back({regime, eta, {}});
  }

  const RngStream shared = RngStream(cfg.master_seed).derive(kInvarianceLabel);
  parallel_for(out.cells.size(), cfg.threads, [&](std::size_t i) {
    InvarianceCell& cell = out.cells[i];
    PolicySpec policy;
    policy.fixed_controls = {cfg.invariance_gain, cell.eta, 1.0};
    policy.mode = cell.regime == ScaleRegime::fixed_scale ? PolicyMode::fixed
                                                          : PolicyMode::signal_matched;
    TrajectoryOptions opts;
    opts.n = cfg.invariance_n;
    opts.horizon = cfg.horizon;
    opts.r0 = cfg.invariance_r0;
    opts.scale_source = cfg.scale_source;
    cell.trajectory = run_trajectory(opts, policy, cfg.params, shared);
  });

  for (ScaleRegime regime : regimes) {
    std::vector<std::vector<double>> series;
    for (const auto& cell : out.cells) {
      if (cell.regime == regime) series.push_back(cell.trajectory.accuracy);
    }
    (regime == ScaleRegime::fixed_scale ? out.fixed_spread : out.adaptive_spread) =
        cross_spread(series);
  }
  return out;
}

std::vector<PhaseRow> phase_transition_study(double kappa_c, std::span<const double> r_grid) {
  const CostParams cost{kappa_c, 0.5};
  validate(cost);
  std::vector<PhaseRow> rows;
  rows.reserve(r_grid.size());
  for (double r : r_grid) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("phase: r must lie in [0,1]");
    rows.push_back({r, optimal_eta(r, cost), envelope_value(r, cost)});
  }
  return rows;
}

}  // namespace ratekin
