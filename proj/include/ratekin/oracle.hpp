#pragma once

#include <cstddef>

#include "ratekin/rng.hpp"
#include "ratekin/types.hpp"

namespace ratekin {

/// Monte Carlo estimate; std_error is the sample standard deviation of the
/// per-draw influence values divided by sqrt(n_samples).
struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;

  /// |value - target| <= k * std_error.
  bool covers(double target, double k = 3.0) const;
};

/// One draw of a representative agent, its shadow opponent and the updates.
struct ShadowSample {
  double rho = 0.0;
  double x = 0.0;
  double rho_op = 0.0;
  double x_op = 0.0;
  double x_tilde_next = 0.0;
  double rho_next = 0.0;
};

struct ShadowStepEstimate {
  MomentEstimate psi;           ///< Corr(rho_{t+1}, X~_{t+1})
  MomentEstimate lambda2;       ///< Var(X~_{t+1})
  MomentEstimate var_rating;    ///< Var(A)
  MomentEstimate var_skill;     ///< Var(B_rho)
  MomentEstimate var_noise;     ///< Var(B_omega)
  MomentEstimate cross_cov;     ///< 2 Cov(A, B_rho)
  MomentEstimate numerator;     ///< Cov(rho_t, X~_{t+1})
  MomentEstimate skewness;      ///< sample skewness of X~_{t+1}
};

/// Draws one coupled sample. (rho, x) is bivariate normal with unit skill
/// variance, rating variance sigma^2 and correlation r; the opponent rating is
/// X' = eta X + sqrt(1-eta^2) Z with Z ~ N(0, sigma^2), and the opponent skill
/// rho' = (r/sigma) X' + sqrt(1-r^2) zeta.
ShadowSample draw_shadow_sample(const AccuracyState& state, const ControlTriple& control,
                                const ModelParams& params, RngStream& stream);

/// Brute-force single-step McKean-Vlasov estimate of the accuracy map and the
/// pre-scaling variance with its components. Uses control.scale as the
/// current dispersion. Requires control.scale > 0, r in [0,1) and
/// n_samples >= 10^4.
ShadowStepEstimate sample_shadow_step(const AccuracyState& state, const ControlTriple& control,
                                      const ModelParams& params, std::size_t n_samples,
                                      RngStream& stream);

struct OpponentMoments {
  MomentEstimate corr_x_xop;      ///< Corr(X, X')     -> eta
  MomentEstimate cov_rho_xop;     ///< Cov(rho, X')    -> eta r sigma
  MomentEstimate cov_rho_rhoop;   ///< Cov(rho, rho')  -> eta r^2
  MomentEstimate var_rhoop;       ///< Var(rho')       -> 1
};

/// Sampled opponent moments at dispersion state.sigma > 0.
OpponentMoments opponent_moment_checks(const AccuracyState& state, double eta,
                                       std::size_t n_samples, RngStream& stream);

}  // namespace ratekin
