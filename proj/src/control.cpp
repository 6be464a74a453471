#include "ratekin/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ratekin/meanfield.hpp"

namespace ratekin {

void validate(const CostParams& cost) {
  if (!(cost.kappa_c > 0.0) || !std::isfinite(cost.kappa_c)) {
    throw std::domain_error("kappa_c must be positive, got " + std::to_string(cost.kappa_c));
  }
  if (!(cost.discount > 0.0 && cost.discount < 1.0)) {
    throw std::domain_error("discount must lie in (0,1), got " + std::to_string(cost.discount));
  }
}

std::string_view to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::fixed:
      return "fixed";
    case PolicyMode::signal_matched:
      return "signal-matched";
    case PolicyMode::optimal_separated:
      return "optimal";
  }
  return "unknown";
}

PolicyMode parse_policy_mode(std::string_view text) {
  if (text == "fixed") return PolicyMode::fixed;
  if (text == "signal-matched" || text == "signal_matched") return PolicyMode::signal_matched;
  if (text == "optimal" || text == "optimal-separated" || text == "optimal_separated") {
    return PolicyMode::optimal_separated;
  }
  throw std::invalid_argument("unknown policy '" + std::string(text) + "'");
}

ControlTriple decide(const PolicySpec& policy, double r, const ModelParams& params) {
  const double acc = std::clamp(r, 0.0, std::nextafter(1.0, 0.0));
  switch (policy.mode) {
    case PolicyMode::fixed:
      return policy.fixed_controls;
    case PolicyMode::signal_matched:
      return {policy.fixed_controls.gain, policy.fixed_controls.assortativity, acc};
    case PolicyMode::optimal_separated:
      return {optimal_gain(acc, params), optimal_eta(acc, policy.cost), optimal_scale(acc)};
  }
  throw std::logic_error("unhandled policy mode");
}

double barrier_cost(double eta, const CostParams& cost) {
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw std::domain_error("sorting cost diverges outside eta in [0,1), got " +
                            std::to_string(eta));
  }
  return cost.kappa_c * (1.0 / (1.0 - eta) - 1.0);
}

double net_utility(double r, double eta, const CostParams& cost) {
  return eta * r * r - barrier_cost(eta, cost);
}

double optimal_eta(double r, const CostParams& cost) {
  if (!(r > 0.0)) return 0.0;
  return std::max(0.0, 1.0 - std::sqrt(cost.kappa_c) / r);
}

double envelope_value(double r, const CostParams& cost) {
  const double gap = std::max(0.0, r - std::sqrt(cost.kappa_c));
  return gap * gap;
}

PolicyStep separated_policy_step(const AccuracyState& state, const CostParams& cost,
                                 const ModelParams& params) {
  const double r = state.r;
  PolicyStep step;
  step.control = {optimal_gain(r, params), optimal_eta(r, cost), optimal_scale(r)};
  step.next_r = invariant_phi(r, params);
  step.utility = envelope_value(r, cost);
  return step;
}

double discounted_welfare(std::span<const double> utilities, double discount) {
  if (!(discount > 0.0 && discount < 1.0)) {
    throw std::domain_error("discount must lie in (0,1)");
  }
  double total = 0.0;
  double weight = 1.0;
  for (double u : utilities) {
    total += weight * u;
    weight *= discount;
  }
  return total;
}

}  // namespace ratekin
