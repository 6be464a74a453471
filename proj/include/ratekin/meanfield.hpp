#pragma once

#include <vector>

#include "ratekin/types.hpp"

namespace ratekin {

/// Components of the pre-scaling rating variance Var(X~_{t+1}).
///
/// X~ = A + B_rho + B_omega with A = (1-K)X + K X', B_rho = K(rho - rho')
/// and B_omega = K omega; omega is independent of everything else, so the
/// only cross term is 2 Cov(A, B_rho).
struct VarianceBreakdown {
  double var_rating = 0.0;
  double var_skill_mismatch = 0.0;
  double var_outcome_noise = 0.0;
  double cross_cov = 0.0;
  double total = 0.0;
};

/// Coefficients of Lambda^2(K) = u + v K + w K^2 at a fixed scale.
struct QuadraticForm {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
};

/// Coefficients of the covariance numerator N(K) = p + q K at a fixed scale.
struct AffineForm {
  double p = 0.0;
  double q = 0.0;
};

/// The K-envelope as a fractional-linear function of y = (sigma - r)^2:
/// G(y) = (a + b y) / (c + d y).
struct EnvelopeCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double evaluate(double y) const { return (a + b * y) / (c + d * y); }
};

struct KSharp {
  double gain = 0.0;
  double envelope = 0.0;
};

// All maps below read the current dispersion from control.scale. The
// AccuracyState overloads take r from the state; state.sigma is not used.

/// Cov(rho_t, X~_{t+1}) = r sigma (1 - K(1-eta)) + K (1 - eta r^2).
double covariance_numerator(double r, const ControlTriple& control);
double covariance_numerator(const AccuracyState& state, const ControlTriple& control);

VarianceBreakdown pre_scaling_variance(double r, const ControlTriple& control,
                                       const ModelParams& params);
VarianceBreakdown pre_scaling_variance(const AccuracyState& state, const ControlTriple& control,
                                       const ModelParams& params);

/// One-step accuracy map r_{t+1} = lambda N / sqrt(Lambda^2).
///
/// At scale 0 with positive gain the value is the Dirac-kernel limit.
/// Throws DegenerateScaleError when Lambda^2 == 0 (scale 0 and gain 0).
double transition_psi(double r, const ControlTriple& control, const ModelParams& params);
double transition_psi(const AccuracyState& state, const ControlTriple& control,
                      const ModelParams& params);

QuadraticForm variance_quadratic(double sigma, double r, double eta, const ModelParams& params);
AffineForm numerator_affine(double sigma, double r, double eta);

/// 4uw - v^2, written as 4 sigma^2 (beta^2 + 2(1-r^2) + (1-eta^2)(sigma-r)^2).
double variance_discriminant(double sigma, double r, double eta, const ModelParams& params);

/// Phi(r) = lambda sqrt(r^2 + (1-r^2)^2 / (beta^2 + 2(1-r^2))).
double invariant_phi(double r, const ModelParams& params);

/// Kalman-type gain K*(r) = (1-r^2) / (2(1-r^2) + beta^2).
double optimal_gain(double r, const ModelParams& params);

/// Signal-matched scale sigma*(r) = r.
double optimal_scale(double r);

/// Maximiser over real K of F(K) = N(K)^2 / Lambda^2(K) at fixed sigma, and the
/// maximum itself, 4(p^2 w - p q v + q^2 u) / (4uw - v^2).
KSharp k_sharp(double sigma, double r, double eta, const ModelParams& params);

/// Same envelope as k_sharp, square-rooted and scaled by lambda: the best
/// attainable next accuracy at scale sigma.
double envelope_over_k(double sigma, double r, double eta, const ModelParams& params);

EnvelopeCoefficients envelope_coefficients(double r, double eta, const ModelParams& params);

/// Unique root r_inf in (0, lambda) of r = Phi(r), for 0 < lambda < 1.
///
/// Takes the small root of the quadratic
///   x (1-lambda^2)(beta^2 + 2 - 2x) = lambda^2 (1-x)^2,  x = r^2,
/// polishes it with Newton steps and checks |Phi(r) - r| <= tol, falling back
/// to bisection if the check fails. lambda == 1 is the static limit
/// (r_inf = 1) and must be handled by the caller.
double fixed_point(const ModelParams& params, double tol = 1e-12);

/// (r0, Phi(r0), Phi(Phi(r0)), ...), steps + 1 values.
std::vector<double> iterate_phi(double r0, std::size_t steps, const ModelParams& params);

}  // namespace ratekin
