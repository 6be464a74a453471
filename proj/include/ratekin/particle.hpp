#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ratekin/control.hpp"
#include "ratekin/rng.hpp"
#include "ratekin/types.hpp"

namespace ratekin {

/// Skills, scaled ratings and pre-scaled (post-update) ratings of N agents.
struct Population {
  std::vector<double> skills;
  std::vector<double> ratings;
  std::vector<double> pre_scaled;
  std::size_t epoch = 0;

  std::size_t size() const { return skills.size(); }
};

/// Perfect matching between two disjoint halves: first from group 1, second
/// from group 2.
struct Pairing {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Exact-moment initial population: both vectors have empirical mean 0 and
/// population variance 1, and their empirical correlation is exactly r0.
/// Requires n even, n >= 4 and r0 in [0,1). pre_scaled is a copy of ratings.
Population init_population(std::size_t n, double r0, RngStream& stream);

/// rho <- lambda rho + sqrt(1 - lambda^2) xi. Skills are untouched at lambda = 1.
void skill_step(Population& pop, const ModelParams& params, RngStream& stream);

/// Recentres pre_scaled and rescales it to population standard deviation
/// sigma_target into `ratings`. Returns the applied factor sigma_target / Lambda
/// (0 when sigma_target is 0). Throws DegenerateScaleError if the pre-scaled
/// ratings are constant and sigma_target > 0.
double scale_step(Population& pop, double sigma_target);

/// Rank-based correlated matching. Splits the population uniformly at random
/// into two halves, scores group 1 by Y = eta X + sqrt(1-eta^2) v with v
/// normal at the current empirical rating variance, then pairs the k-th
/// smallest score with the k-th smallest group-2 rating. Ties break by index.
/// When every rating is equal the halves are paired in shuffled order.
Pairing match_step(const Population& pop, double eta, RngStream& stream);

/// Gaussian outcome S = rho_i - rho_j + omega per pair and the zero-sum
/// linear update into pre_scaled.
void update_step(Population& pop, const Pairing& pairing, double gain, const ModelParams& params,
                 RngStream& stream);

/// Population-moment (divide by N) accuracy of `values` against `skills`.
/// r is 0 when the values have zero dispersion.
AccuracyState moment_state(std::span<const double> skills, std::span<const double> values);

/// moment_state of the scaled ratings.
AccuracyState empirical_state(const Population& pop);

enum class ScaleSource { mean_field, empirical };
enum class InitMode { exact_moments, zero_ratings };

std::string_view to_string(ScaleSource source);
ScaleSource parse_scale_source(std::string_view text);

struct TrajectoryOptions {
  std::size_t n = 1000;
  std::size_t horizon = 100;
  double r0 = 0.0;
  InitMode init = InitMode::exact_moments;
  ScaleSource scale_source = ScaleSource::mean_field;
};

struct RunDescriptor {
  std::size_t n = 0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  double lambda = 0.0;
  double beta2 = 0.0;
  PolicyMode policy = PolicyMode::fixed;
  ScaleSource scale_source = ScaleSource::mean_field;
};

/// Per-period record of a particle run. All series have horizon + 1 entries.
///
/// accuracy[t] and dispersion[t] are the empirical correlation and standard
/// deviation of the ratings entering period t, before rescaling. reference[t]
/// is the mean-field accuracy of the same policy from the same initial
/// moments. controls[t] is the policy decision at t (the last one is not
/// applied), policy_accuracy[t] the accuracy it was decided on, and
/// utility[t] = U(policy_accuracy[t], eta_t).
struct Trajectory {
  std::vector<double> accuracy;
  std::vector<double> dispersion;
  std::vector<double> reference;
  std::vector<double> policy_accuracy;
  std::vector<ControlTriple> controls;
  std::vector<double> utility;
  RunDescriptor meta;
};

/// Runs the N-agent system: per period scale, match, update, drift.
///
/// With InitMode::zero_ratings the run starts from all-zero ratings, performs
/// one degenerate bootstrap period at scale 0 and reports from the first
/// non-degenerate period onwards, relabelled t = 0.
Trajectory run_trajectory(const TrajectoryOptions& options, const PolicySpec& policy,
                          const ModelParams& params, const RngStream& stream);

}  // namespace ratekin
