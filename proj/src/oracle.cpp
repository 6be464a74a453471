#include "ratekin/oracle.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace ratekin {

bool MomentEstimate::covers(double target, double k) const {
  return std::abs(value - target) <= k * std_error;
}

namespace {

double mean_of(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

MomentEstimate from_influence(double value, std::span<const double> influence) {
  const double m = mean_of(influence);
  double ss = 0.0;
  for (double v : influence) ss += (v - m) * (v - m);
  const double n = static_cast<double>(influence.size());
  return {value, std::sqrt(ss / (n - 1.0)) / std::sqrt(n), influence.size()};
}

MomentEstimate estimate_covariance(std::span<const double> xs, std::span<const double> ys,
                                   double factor = 1.0) {
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  std::vector<double> terms(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) terms[i] = factor * (xs[i] - mx) * (ys[i] - my);
  return from_influence(mean_of(terms), terms);
}

MomentEstimate estimate_variance(std::span<const double> xs) {
  return estimate_covariance(xs, xs);
}

// Delta-method standard error through the influence function
// a b - r (a^2 + b^2) / 2 of the standardised variables.
MomentEstimate estimate_correlation(std::span<const double> xs, std::span<const double> ys) {
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double n = static_cast<double>(xs.size());
  const double sx = std::sqrt(sxx / n);
  const double sy = std::sqrt(syy / n);
  if (!(sx > 0.0 && sy > 0.0)) return {0.0, 0.0, xs.size()};

  double sab = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sab += (xs[i] - mx) * (ys[i] - my);
  const double r = sab / (n * sx * sy);
  std::vector<double> influence(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double a = (xs[i] - mx) / sx;
    const double b = (ys[i] - my) / sy;
    influence[i] = a * b - 0.5 * r * (a * a + b * b);
  }
  return from_influence(r, influence);
}

MomentEstimate estimate_skewness(std::span<const double> xs) {
  const double m = mean_of(xs);
  double m2 = 0.0;
  for (double x : xs) m2 += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  const double sd = std::sqrt(m2 / n);
  std::vector<double> z(xs.size());
  double m3 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    z[i] = (xs[i] - m) / sd;
    m3 += z[i] * z[i] * z[i];
  }
  const double g = m3 / n;
  std::vector<double> influence(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    influence[i] = z[i] * z[i] * z[i] - 3.0 * z[i] - 1.5 * g * (z[i] * z[i] - 1.0);
  }
  return from_influence(g, influence);
}

void check_oracle_inputs(const AccuracyState& state, double sigma, double eta) {
  if (!(sigma > 0.0)) throw DegenerateScaleError("oracle needs a positive rating dispersion");
  if (!(state.r >= 0.0 && state.r < 1.0)) throw std::domain_error("oracle needs r in [0,1)");
  if (!(eta >= 0.0 && eta < 1.0)) throw std::domain_error("oracle needs eta in [0,1)");
}

}  // namespace

ShadowSample draw_shadow_sample(const AccuracyState& state, const ControlTriple& control,
                                const ModelParams& params, RngStream& stream) {
  const double r = state.r;
  const double sigma = control.scale;
  const double eta = control.assortativity;
  const double k = control.gain;
  const double resid = std::sqrt(1.0 - r * r);

  ShadowSample s;
  s.rho = stream.normal();
  s.x = sigma * (r * s.rho + resid * stream.normal());
  const double z = sigma * stream.normal();
  s.x_op = eta * s.x + std::sqrt(1.0 - eta * eta) * z;
  s.rho_op = (r / sigma) * s.x_op + resid * stream.normal();
  const double omega = std::sqrt(params.beta2()) * stream.normal();
  s.x_tilde_next = (1.0 - k) * s.x + k * s.x_op + k * (s.rho - s.rho_op) + k * omega;
  const double lambda = params.lambda();
  s.rho_next = lambda * s.rho + std::sqrt(1.0 - lambda * lambda) * stream.normal();
  return s;
}

ShadowStepEstimate sample_shadow_step(const AccuracyState& state, const ControlTriple& control,
                                      const ModelParams& params, std::size_t n_samples,
                                      RngStream& stream) {
  validate(control);
  check_oracle_inputs(state, control.scale, control.assortativity);
  if (n_samples < 10000) throw std::invalid_argument("oracle needs at least 10^4 samples");

  const double k = control.gain;
  std::vector<double> rho(n_samples);
  std::vector<double> rho_next(n_samples);
  std::vector<double> x_tilde(n_samples);
  std::vector<double> retained(n_samples);
  std::vector<double> skill_gap(n_samples);
  std::vector<double> noise(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const ShadowSample s = draw_shadow_sample(state, control, params, stream);
    rho[i] = s.rho;
    rho_next[i] = s.rho_next;
    x_tilde[i] = s.x_tilde_next;
    retained[i] = (1.0 - k) * s.x + k * s.x_op;
    skill_gap[i] = k * (s.rho - s.rho_op);
    noise[i] = s.x_tilde_next - retained[i] - skill_gap[i];
  }

  ShadowStepEstimate out;
  out.psi = estimate_correlation(rho_next, x_tilde);
  out.lambda2 = estimate_variance(x_tilde);
  out.var_rating = estimate_variance(retained);
  out.var_skill = estimate_variance(skill_gap);
  out.var_noise = estimate_variance(noise);
  out.cross_cov = estimate_covariance(retained, skill_gap, 2.0);
  out.numerator = estimate_covariance(rho, x_tilde);
  out.skewness = estimate_skewness(x_tilde);
  return out;
}

OpponentMoments opponent_moment_checks(const AccuracyState& state, double eta,
                                       std::size_t n_samples, RngStream& stream) {
  check_oracle_inputs(state, state.sigma, eta);
  if (n_samples < 2) throw std::invalid_argument("need at least two samples");
  const ModelParams unit(1.0, 1.0);
  const ControlTriple control{0.0, eta, state.sigma};

  std::vector<double> rho(n_samples);
  std::vector<double> x(n_samples);
  std::vector<double> rho_op(n_samples);
  std::vector<double> x_op(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const ShadowSample s = draw_shadow_sample(state, control, unit, stream);
    rho[i] = s.rho;
    x[i] = s.x;
    rho_op[i] = s.rho_op;
    x_op[i] = s.x_op;
  }

  OpponentMoments out;
  out.corr_x_xop = estimate_correlation(x, x_op);
  out.cov_rho_xop = estimate_covariance(rho, x_op);
  out.cov_rho_rhoop = estimate_covariance(rho, rho_op);
  out.var_rhoop = estimate_variance(rho_op);
  return out;
}

}  // namespace ratekin
