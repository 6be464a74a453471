#pragma once

#include <span>
#include <string_view>

#include "ratekin/types.hpp"

namespace ratekin {

/// Barrier sorting cost coefficient and welfare discount factor.
struct CostParams {
  double kappa_c = 0.04;
  double discount = 0.95;
};

/// Throws std::domain_error unless kappa_c > 0 and 0 < discount < 1.
void validate(const CostParams& cost);

enum class PolicyMode {
  fixed,             ///< constant (K, eta, sigma)
  signal_matched,    ///< constant (K, eta), sigma_t = r_t
  optimal_separated  ///< (K*(r_t), eta*(r_t), r_t)
};

std::string_view to_string(PolicyMode mode);
PolicyMode parse_policy_mode(std::string_view text);

/// Platform policy. `fixed_controls` is read by the fixed and signal-matched
/// modes (the latter ignores its scale); `cost` drives the matching choice of
/// the separated policy and the utility accounting of every mode.
struct PolicySpec {
  PolicyMode mode = PolicyMode::fixed;
  ControlTriple fixed_controls{0.1, 0.0, 1.0};
  CostParams cost{};
};

/// Controls the policy applies when the controller's accuracy estimate is r.
/// r is clamped to [0, 1) before use.
ControlTriple decide(const PolicySpec& policy, double r, const ModelParams& params);

/// C(eta) = kappa_c (1/(1-eta) - 1). Throws std::domain_error for eta outside [0,1).
double barrier_cost(double eta, const CostParams& cost);

/// U(r, eta) = eta r^2 - C(eta).
double net_utility(double r, double eta, const CostParams& cost);

/// eta*(r) = max(0, 1 - sqrt(kappa_c)/r), and 0 at r = 0.
double optimal_eta(double r, const CostParams& cost);

/// V(r) = max_eta U(r, eta) = max(0, r - sqrt(kappa_c))^2 for the barrier cost.
double envelope_value(double r, const CostParams& cost);

struct PolicyStep {
  ControlTriple control;
  double next_r = 0.0;
  double utility = 0.0;
};

/// One step of the separated policy: greedy filtering plus myopic matching.
PolicyStep separated_policy_step(const AccuracyState& state, const CostParams& cost,
                                 const ModelParams& params);

/// sum_t discount^t utilities[t].
double discounted_welfare(std::span<const double> utilities, double discount);

}  // namespace ratekin
