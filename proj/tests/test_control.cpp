#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "ratekin/control.hpp"
#include "ratekin/meanfield.hpp"

using namespace ratekin;

TEST_CASE("barrier cost") {
  const CostParams cost{0.04, 0.95};
  CHECK(barrier_cost(0.0, cost) == 0.0);
  CHECK(barrier_cost(0.5, cost) == doctest::Approx(0.04));
  CHECK(barrier_cost(0.9, cost) == doctest::Approx(0.36));
  CHECK_THROWS_AS(barrier_cost(1.0, cost), std::domain_error);
  CHECK_THROWS_AS(barrier_cost(-0.1, cost), std::domain_error);
  CHECK(net_utility(0.5, 0.5, cost) == doctest::Approx(0.125 - 0.04));
}

TEST_CASE("cost parameters are validated") {
  CHECK_THROWS_AS(validate(CostParams{0.0, 0.95}), std::domain_error);
  CHECK_THROWS_AS(validate(CostParams{0.04, 1.0}), std::domain_error);
  CHECK_NOTHROW(validate(CostParams{1.0, 0.5}));
}

TEST_CASE("optimal matching intensity and its value") {
  const CostParams cost{0.04, 0.95};
  CHECK(optimal_eta(0.5, cost) == 0.6);
  CHECK(envelope_value(0.5, cost) == 0.09);
  CHECK(optimal_eta(0.2, cost) == 0.0);
  CHECK(optimal_eta(0.2 + 1e-6, cost) < 1e-5);
  CHECK(optimal_eta(0.0, cost) == 0.0);
  CHECK(envelope_value(0.1, cost) == 0.0);
  for (double r = 0.0; r <= 1.0; r += 0.05) {
    CHECK(optimal_eta(r, CostParams{1.0, 0.5}) == 0.0);
  }
}

TEST_CASE("optimal matching property: agrees with dense search and the envelope") {
  const CostParams cost{0.04, 0.95};
  for (double r : {0.1, 0.25, 0.4, 0.6, 0.8, 0.95}) {
    const double eta = optimal_eta(r, cost);
    CHECK(eta == doctest::Approx(oracle::eta_star_grid(r, 0.04)).epsilon(1e-5));
    CHECK(net_utility(r, eta, cost) == doctest::Approx(envelope_value(r, cost)).epsilon(1e-12));
    for (double e = 0.0; e < 0.99; e += 0.01) {
      CHECK(net_utility(r, e, cost) <= envelope_value(r, cost) + 1e-12);
    }
  }
}

TEST_CASE("policy modes") {
  const ModelParams params(0.99, 1.0);
  PolicySpec fixed;
  fixed.fixed_controls = {0.2, 0.3, 1.0};
  const ControlTriple f = decide(fixed, 0.5, params);
  CHECK(f.gain == 0.2);
  CHECK(f.assortativity == 0.3);
  CHECK(f.scale == 1.0);

  PolicySpec matched = fixed;
  matched.mode = PolicyMode::signal_matched;
  const ControlTriple m = decide(matched, 0.5, params);
  CHECK(m.gain == 0.2);
  CHECK(m.scale == 0.5);

  PolicySpec opt;
  opt.mode = PolicyMode::optimal_separated;
  const ControlTriple o = decide(opt, 0.5, params);
  CHECK(o.gain == doctest::Approx(optimal_gain(0.5, params)));
  CHECK(o.assortativity == 0.6);
  CHECK(o.scale == 0.5);
  // r at or above 1 is clamped below 1 so the controls stay valid.
  CHECK_NOTHROW(validate(decide(opt, 1.0, params)));
  CHECK(decide(opt, -0.2, params).scale == 0.0);

  CHECK(parse_policy_mode("optimal") == PolicyMode::optimal_separated);
  CHECK(parse_policy_mode("signal-matched") == PolicyMode::signal_matched);
  CHECK(parse_policy_mode("fixed") == PolicyMode::fixed);
  CHECK_THROWS_AS(parse_policy_mode("greedy"), std::invalid_argument);
  CHECK(parse_policy_mode(to_string(PolicyMode::signal_matched)) == PolicyMode::signal_matched);
}

TEST_CASE("separated policy step") {
  const ModelParams params(0.99, 1.0);
  const CostParams cost{0.04, 0.95};
  const PolicyStep step = separated_policy_step({0.5, 1.0}, cost, params);
  CHECK(step.next_r == doctest::Approx(0.682310413228466).epsilon(1e-13));
  CHECK(step.utility == 0.09);
  CHECK(step.control.assortativity == 0.6);
  CHECK(step.control.scale == 0.5);
  // The matching choice never changes the next accuracy at sigma = r.
  ControlTriple alt = step.control;
  alt.assortativity = 0.0;
  CHECK(transition_psi(0.5, alt, params) == doctest::Approx(step.next_r).epsilon(1e-13));
}

TEST_CASE("discounted welfare") {
  const std::vector<double> ones(50, 1.0);
  CHECK(discounted_welfare(ones, 0.9) == doctest::Approx((1 - std::pow(0.9, 50)) / 0.1));
  const std::vector<double> single{2.0};
  CHECK(discounted_welfare(single, 0.5) == 2.0);
  CHECK(discounted_welfare({}, 0.5) == 0.0);

  // Along the separated policy the welfare is bounded by V(r_inf)/(1-delta) plus
  // the transient, and accuracy stays below lambda.
  const ModelParams params(0.99, 1.0);
  const CostParams cost{0.04, 0.9};
  std::vector<double> utils;
  AccuracyState s{0.3, 0.3};
  for (int t = 0; t < 200; ++t) {
    const PolicyStep step = separated_policy_step(s, cost, params);
    utils.push_back(step.utility);
    CHECK(step.next_r < 0.99);
    s = {step.next_r, step.next_r};
  }
  CHECK(discounted_welfare(utils, 0.9) <= envelope_value(0.99, cost) / 0.1);
  CHECK(s.r == doctest::Approx(fixed_point(params)).epsilon(1e-9));
}
