// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ratekin/cli.hpp"
#include "ratekin/control.hpp"
#include "ratekin/harness.hpp"
#include "ratekin/meanfield.hpp"
#include "ratekin/oracle.hpp"
#include "ratekin/particle.hpp"

using namespace ratekin;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a = 0.0, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

const double kLatR[] = {0.05, 0.25, 0.5, 0.75, 0.95};
const double kLatSigma[] = {0.2, 0.6, 1.0, 1.4, 2.0};
const double kLatGain[] = {0.05, 0.25, 0.5, 1.0, 2.0};
const double kLatEta[] = {0.0, 0.25, 0.5, 0.75, 0.95};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Outcome closed_form_identities() {
  const ModelParams params(0.99, 1.0);
  const double beta2 = params.beta2();
  double worst_sum = 0.0, worst_quad = 0.0, worst_disc = 0.0, worst_coef = 0.0;
  for (double r : kLatR)
    for (double s : kLatSigma)
      for (double k : kLatGain)
        for (double e : kLatEta) {
          const ControlTriple c{k, e, s};
          const VarianceBreakdown v = pre_scaling_variance(r, c, params);
          const double lam2 = oracle::lambda2_direct(r, s, k, e, beta2);
          const double sum = v.var_rating + v.var_skill_mismatch + v.var_outcome_noise + v.cross_cov;
          worst_sum = std::max({worst_sum, rel(sum, lam2), rel(v.total, lam2)});
          const QuadraticForm q = variance_quadratic(s, r, e, params);
          worst_quad = std::max(worst_quad, rel(q.u + q.v * k + q.w * k * k, lam2));
          const double disc_expected =
              4 * s * s * (beta2 + 2 * (1 - r * r) + (1 - e * e) * (s - r) * (s - r));
          worst_disc = std::max(worst_disc, rel(4 * q.u * q.w - q.v * q.v, disc_expected));
          worst_disc = std::max(worst_disc, rel(variance_discriminant(s, r, e, params), disc_expected));
          const EnvelopeCoefficients g = envelope_coefficients(r, e, params);
          worst_coef = std::max(worst_coef, std::abs(r * r * g.c - g.a - (1 - r * r) * (1 - r * r)));
        }
  const bool pass = worst_sum <= 1e-12 && worst_quad <= 1e-12 && worst_disc <= 1e-12 &&
                    worst_coef <= 1e-12;
  std::ostringstream d;
  d << "max rel err: components " << worst_sum << ", quadratic " << worst_quad << ", discriminant "
    << worst_disc << "; max |r^2 C - A - (1-r^2)^2| " << worst_coef;
  return {pass, d.str()};
}

Outcome invariance_exact() {
  const ModelParams params(0.99, 1.0);
  double worst_eta = 0.0, worst_phi = 0.0;
  for (double r : kLatR)
    for (double k : kLatGain)
      for (double e : kLatEta) {
        const double a = transition_psi(r, {k, e, r}, params);
        const double b = transition_psi(r, {k, 0.0, r}, params);
        worst_eta = std::max(worst_eta, std::abs(a - b));
      }
  for (double r : kLatR)
    for (double e : kLatEta) {
      const double psi = transition_psi(r, {optimal_gain(r, params), e, r}, params);
      worst_phi = std::max(worst_phi, std::abs(psi - invariant_phi(r, params)));
    }
  return {worst_eta <= 1e-12 && worst_phi <= 1e-12,
          fmt("max |Psi(eta) - Psi(0)| = %.3g, max |Psi(K*) - Phi| = %.3g", worst_eta, worst_phi)};
}

Outcome envelope_optimality() {
  const ModelParams params(0.99, 1.0);
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> us(0.2, 1.5), ur(0.1, 0.9), ue(0.0, 0.95);
  double worst = 0.0;
  bool inside = true;
  for (int i = 0; i < 20; ++i) {
    const double s = us(gen), r = ur(gen), e = ue(gen);
    const KSharp ks = k_sharp(s, r, e, params);
    inside = inside && ks.gain > -5.0 && ks.gain < 5.0;
    const double grid = oracle::grid_envelope(r, s, e, params.beta2(), -5.0, 5.0, 1e-4);
    worst = std::max(worst, std::abs(ks.envelope - grid));
  }
  double worst_arg = 0.0;
  for (double r : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double e : {0.0, 0.5, 0.9}) {
      double best = -1.0, arg = 0.0;
      for (int j = 1; j <= 2000; ++j) {
        const double s = j * 1e-3;
        const double v = envelope_over_k(s, r, e, params);
        if (v > best) {
          best = v;
          arg = s;
        }
      }
      worst_arg = std::max(worst_arg, std::abs(arg - r));
    }
  const bool pass = inside && worst <= 1e-6 && worst_arg <= 1e-3 + 1e-12;
  return {pass, fmt("max |closed form - grid| = %.3g; max |argmax sigma - r| = %.3g; K# in grid: %g",
                    worst, worst_arg, inside ? 1.0 : 0.0)};
}

Outcome fixed_point_check() {
  const ModelParams params(0.99, 1.0);
  const double r = fixed_point(params);
  const double ref = oracle::fixed_point_bisection(0.99, 1.0);
  const double resid = std::abs(invariant_phi(r, params) - r);
  bool monotone = true;
  double worst_end = 0.0;
  for (double r0 : {0.0, 0.99}) {
    const auto path = iterate_phi(r0, 500, params);
    const double dir = r0 < r ? 1.0 : -1.0;
    for (std::size_t t = 1; t < path.size(); ++t) {
      monotone = monotone && dir * (path[t] - path[t - 1]) >= 0.0;
    }
    worst_end = std::max(worst_end, std::abs(path.back() - r));
  }
  const bool pass =
      std::abs(r - ref) <= 1e-12 && r < 0.99 && resid <= 1e-10 && monotone && worst_end <= 1e-10;
  return {pass, fmt("r_inf = %.15f, |r - bisection| = %.3g, |Phi(r) - r| = %.3g", r,
                    std::abs(r - ref), resid) +
                    fmt("; 500-step gap %.3g, monotone %g", worst_end, monotone ? 1.0 : 0.0)};
}

Outcome monte_carlo_agreement() {
  const ModelParams params(0.99, 1.0);
  const double rs[] = {0.1, 0.5, 0.9};
  const double sigmas[] = {0.5, 1.0, 1.5};
  const double gains[] = {0.1, 0.5, 1.0};
  const double etas[] = {0.0, 0.5, 0.9};
  const RngStream master(2025);
  int total = 0, good = 0;
  std::uint64_t label = 0;
  for (double r : rs)
    for (double s : sigmas)
      for (double k : gains)
        for (double e : etas) {
          RngStream stream = derive(master.derive(label++), StreamPurpose::oracle);
          const ControlTriple c{k, e, s};
          const AccuracyState st{r, s};
          const ShadowStepEstimate est = sample_shadow_step(st, c, params, 1000000, stream);
          const VarianceBreakdown v = pre_scaling_variance(st, c, params);
          const bool ok = est.psi.covers(transition_psi(st, c, params)) &&
                          est.var_rating.covers(v.var_rating) &&
                          est.var_skill.covers(v.var_skill_mismatch) &&
                          est.var_noise.covers(v.var_outcome_noise) &&
                          est.cross_cov.covers(v.cross_cov);
          ++total;
          good += ok ? 1 : 0;
        }
  return {good >= 0.95 * total, fmt("%g of %g lattice points within 3 standard errors", good, total)};
}

Outcome one_step_particle() {
  const ModelParams params(0.99, 1.0);
  PolicySpec policy;
  policy.fixed_controls = {0.3, 0.5, 1.0};
  TrajectoryOptions opts;
  opts.n = 100000;
  opts.horizon = 1;
  opts.r0 = 0.4;
  const double expected = transition_psi(0.4, policy.fixed_controls, params);
  const double tol = 3.0 / std::sqrt(static_cast<double>(opts.n));
  int good = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Trajectory tr = run_trajectory(opts, policy, params, RngStream(seed));
    const double err = std::abs(tr.accuracy[1] - expected);
    worst = std::max(worst, err);
    good += err <= tol ? 1 : 0;
  }
  return {good >= 17, fmt("%g of 20 seeds within %.4f (max error %.4f)", good, tol, worst)};
}

Outcome convergence_scaling() {
  StudyConfig cfg;  // desk defaults: N in {1e2,1e3,1e4}, T = 200, 8 replicates, (0.1, 0, 1)
  const ConvergenceResult res = convergence_study(cfg);
  if (!res.fit) return {false, "degenerate fit"};
  std::ostringstream d;
  d << "slope " << res.fit->slope << " (r^2 " << res.fit->r_squared << "); E_N =";
  for (double e : res.l2_errors) d << ' ' << e;
  return {res.fit->slope >= -0.65 && res.fit->slope <= -0.35, d.str()};
}

Outcome red_queen() {
  StudyConfig cfg;
  cfg.lambda_grid = {0.95, 0.99, 1.0};
  cfg.beta2_grid = {0.25, 1.0, 4.0};
  const auto rows = red_queen_study(cfg);
  bool pass = rows.size() == 9;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].lambda == 1.0) {
      pass = pass && rows[i].r_infinity == 1.0;
      continue;
    }
    pass = pass && rows[i].r_infinity < rows[i].lambda;
    if (i % 3 != 0) pass = pass && rows[i].r_infinity < rows[i - 1].r_infinity;
  }
  return {pass, fmt("lambda=0.95: %.6f > %.6f > %.6f", rows[0].r_infinity, rows[1].r_infinity,
                    rows[2].r_infinity) +
                    fmt("; lambda=0.99: %.6f > %.6f > %.6f", rows[3].r_infinity,
                        rows[4].r_infinity, rows[5].r_infinity)};
}

Outcome data_collapse() {
  StudyConfig cfg;
  cfg.invariance_n = 10000;
  cfg.horizon = 100;
  cfg.invariance_r0 = 0.1;
  cfg.master_seed = 42;
  const InvarianceResult res = invariance_study(cfg);
  const bool pass = res.fixed_spread > 0.05 && res.adaptive_spread <= 0.25 * res.fixed_spread;
  return {pass, fmt("fixed spread %.4f, adaptive spread %.4f, ratio %.2f", res.fixed_spread,
                    res.adaptive_spread, res.fixed_spread / res.adaptive_spread) +
                    fmt(" (gain %.2f)", cfg.invariance_gain)};
}

Outcome phase_transition() {
  const CostParams cost{0.04, 0.95};
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i * 0.01);
  const auto rows = phase_transition_study(0.04, grid);
  bool below = true;
  for (const auto& row : rows) {
    if (row.r <= 0.2) below = below && row.eta_star == 0.0;
  }
  const double at = optimal_eta(0.5, cost);
  const double val = envelope_value(0.5, cost);
  // Continuity at r_c: one grid step above r_c, eta* may rise by at most the
  // step times its largest slope 1/sqrt(kappa_c).
  const double rc = std::sqrt(cost.kappa_c);
  const double step = 0.01;
  const double jump = optimal_eta(rc + step, cost) - optimal_eta(rc, cost);
  const double tiny = optimal_eta(rc + 1e-6, cost);
  const bool pass = below && at == 0.6 && val == 0.09 && jump <= step / rc + 1e-12 && tiny < 1e-5;
  return {pass, fmt("eta*(0.5) == 0.6: %g, V(0.5) == 0.09: %g, ", at == 0.6, val == 0.09) +
                    fmt("step above r_c raises eta* by %.4f (bound %.4f)", jump, step / rc)};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "ratekin_acceptance_rerun";
  fs::remove_all(root);
  struct Study {
    std::vector<std::string> args;
    std::string csv;
  };
  const std::vector<Study> studies{
      {{"simulate", "--n", "1000", "--horizon", "50", "--seed", "7"}, "trajectory.csv"},
      {{"converge", "--n-grid", "100,300,1000", "--horizon", "50", "--replicates", "3"},
       "converge.csv"},
      {{"red-queen"}, "red_queen.csv"},
      {{"invariance", "--n", "2000", "--horizon", "40"}, "invariance.csv"},
      {{"phase"}, "phase.csv"},
  };
  std::ostringstream sink;
  int identical = 0;
  for (const Study& s : studies) {
    const fs::path first = root / (s.args[0] + "_a");
    const fs::path second = root / (s.args[0] + "_b");
    std::vector<std::string> args = s.args;
    args.insert(args.end(), {"--out", first.string()});
    if (cli::run(args, sink, sink) != 0) return {false, s.args[0] + " failed: " + sink.str()};
    const std::vector<std::string> rerun{s.args[0], "--config", (first / "manifest.json").string(),
                                         "--out", second.string()};
    if (cli::run(rerun, sink, sink) != 0) return {false, s.args[0] + " rerun failed"};
    const std::string a = slurp(first / s.csv);
    identical += (!a.empty() && a == slurp(second / s.csv)) ? 1 : 0;
  }
  fs::remove_all(root);
  return {identical == static_cast<int>(studies.size()),
          fmt("%g of %g studies byte-identical after rerun from manifest", identical,
              static_cast<double>(studies.size()))};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "closed-form identities", closed_form_identities},
      {2, "exact eta invariance at sigma = r", invariance_exact},
      {3, "envelope optimality", envelope_optimality},
      {4, "fixed point", fixed_point_check},
      {5, "Monte Carlo oracle agreement", monte_carlo_agreement},
      {6, "one-step particle agreement", one_step_particle},
      {7, "convergence scaling", convergence_scaling},
      {8, "Red Queen bound", red_queen},
      {9, "data collapse", data_collapse},
      {10, "phase transition", phase_transition},
      {11, "determinism", determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
