#include "ratekin/meanfield.hpp"

#include <cmath>
#include <string>

namespace ratekin {

ModelParams::ModelParams(double lambda, double beta2) : lambda_(lambda), beta2_(beta2) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::domain_error("lambda must lie in [0,1], got " + std::to_string(lambda));
  }
  if (!(beta2 > 0.0) || !std::isfinite(beta2)) {
    throw std::domain_error("beta2 must be positive, got " + std::to_string(beta2));
  }
}

void validate(const ControlTriple& control) {
  if (!(control.gain >= 0.0) || !std::isfinite(control.gain)) {
    throw std::domain_error("gain must be non-negative, got " + std::to_string(control.gain));
  }
  if (!(control.assortativity >= 0.0 && control.assortativity < 1.0)) {
    throw std::domain_error("assortativity must lie in [0,1), got " +
                            std::to_string(control.assortativity));
  }
  if (!(control.scale >= 0.0) || !std::isfinite(control.scale)) {
    throw std::domain_error("scale must be non-negative, got " + std::to_string(control.scale));
  }
}

namespace {

void check_accuracy(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::domain_error("accuracy must lie in [0,1], got " + std::to_string(r));
  }
}

void check_envelope_args(double sigma, double r, double eta) {
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
  if (!(r >= 0.0 && r < 1.0)) throw std::domain_error("r must lie in [0,1)");
  if (!(eta >= 0.0 && eta < 1.0)) throw std::domain_error("eta must lie in [0,1)");
}

}  // namespace

double covariance_numerator(double r, const ControlTriple& control) {
  check_accuracy(r);
  validate(control);
  const double k = control.gain;
  const double eta = control.assortativity;
  const double sigma = control.scale;
  return r * sigma * (1.0 - k * (1.0 - eta)) + k * (1.0 - eta * r * r);
}

double covariance_numerator(const AccuracyState& state, const ControlTriple& control) {
  return covariance_numerator(state.r, control);
}

VarianceBreakdown pre_scaling_variance(double r, const ControlTriple& control,
                                       const ModelParams& params) {
  check_accuracy(r);
  validate(control);
  const double k = control.gain;
  const double eta = control.assortativity;
  const double sigma = control.scale;

  VarianceBreakdown out;
  out.var_rating = sigma * sigma * ((1.0 - k) * (1.0 - k) + k * k + 2.0 * k * (1.0 - k) * eta);
  out.var_skill_mismatch = 2.0 * k * k * (1.0 - eta * r * r);
  out.var_outcome_noise = k * k * params.beta2();
  out.cross_cov = 2.0 * k * (1.0 - eta) * r * sigma * (1.0 - 2.0 * k);
  out.total = out.var_rating + out.var_skill_mismatch + out.var_outcome_noise + out.cross_cov;
  return out;
}

VarianceBreakdown pre_scaling_variance(const AccuracyState& state, const ControlTriple& control,
                                       const ModelParams& params) {
  return pre_scaling_variance(state.r, control, params);
}

double transition_psi(double r, const ControlTriple& control, const ModelParams& params) {
  const double numerator = covariance_numerator(r, control);
  const double variance = pre_scaling_variance(r, control, params).total;
  if (!(variance > 0.0)) {
    throw DegenerateScaleError("pre-scaling variance vanishes (scale 0 with gain 0)");
  }
  return params.lambda() * numerator / std::sqrt(variance);
}

double transition_psi(const AccuracyState& state, const ControlTriple& control,
                      const ModelParams& params) {
  return transition_psi(state.r, control, params);
}

QuadraticForm variance_quadratic(double sigma, double r, double eta, const ModelParams& params) {
  const double s = sigma - r;
  return {sigma * sigma, 2.0 * (1.0 - eta) * sigma * (r - sigma),
          params.beta2() + 2.0 * (1.0 - r * r) + 2.0 * (1.0 - eta) * s * s};
}

AffineForm numerator_affine(double sigma, double r, double eta) {
  return {r * sigma, 1.0 - eta * r * r - (1.0 - eta) * r * sigma};
}

double variance_discriminant(double sigma, double r, double eta, const ModelParams& params) {
  const double s = sigma - r;
  return 4.0 * sigma * sigma * (params.beta2() + 2.0 * (1.0 - r * r) + (1.0 - eta * eta) * s * s);
}

double invariant_phi(double r, const ModelParams& params) {
  check_accuracy(r);
  const double slack = 1.0 - r * r;
  return params.lambda() * std::sqrt(r * r + slack * slack / (params.beta2() + 2.0 * slack));
}

double optimal_gain(double r, const ModelParams& params) {
  check_accuracy(r);
  const double slack = 1.0 - r * r;
  return slack / (2.0 * slack + params.beta2());
}

double optimal_scale(double r) {
  check_accuracy(r);
  return r;
}

KSharp k_sharp(double sigma, double r, double eta, const ModelParams& params) {
  check_envelope_args(sigma, r, eta);
  const auto [u, v, w] = variance_quadratic(sigma, r, eta, params);
  const auto [p, q] = numerator_affine(sigma, r, eta);
  KSharp out;
  out.gain = (-p * v + 2.0 * q * u) / (2.0 * p * w - q * v);
  out.envelope = 4.0 * (p * p * w - p * q * v + q * q * u) / (4.0 * u * w - v * v);
  return out;
}

double envelope_over_k(double sigma, double r, double eta, const ModelParams& params) {
  return params.lambda() * std::sqrt(k_sharp(sigma, r, eta, params).envelope);
}

EnvelopeCoefficients envelope_coefficients(double r, double eta, const ModelParams& params) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("r must lie in [0,1]");
  if (!(eta >= 0.0 && eta < 1.0)) throw std::domain_error("eta must lie in [0,1)");
  const double r2 = r * r;
  const double beta2 = params.beta2();
  const double sort_slack = 1.0 - eta * eta;
  return {r2 * r2 - r2 * beta2 - 1.0, -sort_slack * r2, 2.0 * r2 - beta2 - 2.0, -sort_slack};
}

namespace {

// H(x) = x (1 - lambda^2)(beta^2 + 2 - 2x) - lambda^2 (1 - x)^2.
double steady_state_residual(double x, double lambda2, double beta2) {
  return x * (1.0 - lambda2) * (beta2 + 2.0 - 2.0 * x) - lambda2 * (1.0 - x) * (1.0 - x);
}

}  // namespace

double fixed_point(const ModelParams& params, double tol) {
  const double lambda = params.lambda();
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::domain_error("fixed_point requires 0 < lambda < 1 (lambda = 1 is the static limit)");
  }
  if (!(tol > 0.0)) throw std::domain_error("tolerance must be positive");

  const double lambda2 = lambda * lambda;
  const double beta2 = params.beta2();
  // H(x) = a2 x^2 + a1 x + a0 with a2 < 0, a0 < 0, a1 > 0; both roots are
  // positive and the smaller one lies in (0, lambda^2).
  const double a2 = lambda2 - 2.0;
  const double a1 = (1.0 - lambda2) * (beta2 + 2.0) + 2.0 * lambda2;
  const double a0 = -lambda2;
  const double disc = a1 * a1 - 4.0 * a2 * a0;
  double x = 2.0 * lambda2 / (a1 + std::sqrt(disc));

  for (int i = 0; i < 3; ++i) {
    const double slope = 2.0 * a2 * x + a1;
    if (slope == 0.0) break;
    x -= steady_state_residual(x, lambda2, beta2) / slope;
  }

  double r = std::sqrt(x);
  if (!(x > 0.0 && x < lambda2) || std::abs(invariant_phi(r, params) - r) > tol) {
    double lo = 0.0;
    double hi = lambda2;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (steady_state_residual(mid, lambda2, beta2) < 0.0 ? lo : hi) = mid;
    }
    r = std::sqrt(0.5 * (lo + hi));
    if (std::abs(invariant_phi(r, params) - r) > tol) {
      throw std::runtime_error("fixed_point: residual above tolerance");
    }
  }
  return r;
}

std::vector<double> iterate_phi(double r0, std::size_t steps, const ModelParams& params) {
  check_accuracy(r0);
  std::vector<double> out;
  out.reserve(steps + 1);
  out.push_back(r0);
  for (std::size_t t = 0; t < steps; ++t) out.push_back(invariant_phi(out.back(), params));
  return out;
}

}  // namespace ratekin
