#include "ratekin/particle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ratekin/meanfield.hpp"

namespace ratekin {

namespace {

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_variance(std::span<const double> xs, double mean) {
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(xs.size());
}

void centre_and_normalise(std::vector<double>& xs) {
  const double m = mean_of(xs);
  for (double& x : xs) x -= m;
  const double sd = std::sqrt(population_variance(xs, 0.0));
  for (double& x : xs) x /= sd;
}

}  // namespace

Population init_population(std::size_t n, double r0, RngStream& stream) {
  if (n < 4 || n % 2 != 0) {
    throw std::invalid_argument("population size must be even and >= 4, got " +
                                std::to_string(n));
  }
  if (!(r0 >= 0.0 && r0 < 1.0)) {
    throw std::domain_error("initial accuracy must lie in [0,1), got " + std::to_string(r0));
  }

  Population pop;
  pop.skills.resize(n);
  std::vector<double> noise(n);
  for (double& s : pop.skills) s = stream.normal();
  for (double& z : noise) z = stream.normal();

  centre_and_normalise(pop.skills);
  const double m = mean_of(noise);
  for (double& z : noise) z -= m;
  // Gram-Schmidt against the skills, then renormalise.
  const double proj = std::inner_product(noise.begin(), noise.end(), pop.skills.begin(), 0.0) /
                      std::inner_product(pop.skills.begin(), pop.skills.end(),
                                         pop.skills.begin(), 0.0);
  for (std::size_t i = 0; i < n; ++i) noise[i] -= proj * pop.skills[i];
  centre_and_normalise(noise);

  const double orth = std::sqrt(1.0 - r0 * r0);
  pop.ratings.resize(n);
  for (std::size_t i = 0; i < n; ++i) pop.ratings[i] = r0 * pop.skills[i] + orth * noise[i];
  pop.pre_scaled = pop.ratings;
  return pop;
}

void skill_step(Population& pop, const ModelParams& params, RngStream& stream) {
  const double lambda = params.lambda();
  if (lambda == 1.0) return;
  const double shock = std::sqrt(1.0 - lambda * lambda);
  for (double& s : pop.skills) s = lambda * s + shock * stream.normal();
}

double scale_step(Population& pop, double sigma_target) {
  if (!(sigma_target >= 0.0) || !std::isfinite(sigma_target)) {
    throw std::domain_error("scale target must be non-negative");
  }
  pop.ratings.resize(pop.pre_scaled.size());
  if (sigma_target == 0.0) {
    std::fill(pop.ratings.begin(), pop.ratings.end(), 0.0);
    return 0.0;
  }
  const double m = mean_of(pop.pre_scaled);
  const double spread = std::sqrt(population_variance(pop.pre_scaled, m));
  if (!(spread > 0.0)) {
    throw DegenerateScaleError("cannot rescale constant ratings to a positive dispersion");
  }
  const double factor = sigma_target / spread;
  for (std::size_t i = 0; i < pop.ratings.size(); ++i) {
    pop.ratings[i] = factor * (pop.pre_scaled[i] - m);
  }
  return factor;
}

Pairing match_step(const Population& pop, double eta, RngStream& stream) {
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw std::domain_error("eta must lie in [0,1), got " + std::to_string(eta));
  }
  const std::size_t n = pop.size();
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("matching needs an even population");
  const std::size_t half = n / 2;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), stream.engine());
  std::vector<std::size_t> group1(order.begin(), order.begin() + half);
  std::vector<std::size_t> group2(order.begin() + half, order.end());

  const double var = population_variance(pop.ratings, mean_of(pop.ratings));
  const double noise_sd = std::sqrt(var);
  const double mix = std::sqrt(1.0 - eta * eta);
  std::vector<double> score(n, 0.0);
  // Draw the score noise even when unused so that the stream advances the
  // same way for every eta.
  for (std::size_t i : group1) score[i] = eta * pop.ratings[i] + mix * noise_sd * stream.normal();

  Pairing out;
  out.pairs.reserve(half);
  if (var > 0.0) {
    const auto by = [](const std::vector<double>& key) {
      return [&key](std::size_t a, std::size_t b) {
        return key[a] < key[b] || (key[a] == key[b] && a < b);
      };
    };
    std::sort(group1.begin(), group1.end(), by(score));
    std::sort(group2.begin(), group2.end(), by(pop.ratings));
  }
  for (std::size_t k = 0; k < half; ++k) out.pairs.emplace_back(group1[k], group2[k]);
  return out;
}

void update_step(Population& pop, const Pairing& pairing, double gain, const ModelParams& params,
                 RngStream& stream) {
  if (!(gain >= 0.0) || !std::isfinite(gain)) throw std::domain_error("gain must be >= 0");
  if (pairing.pairs.size() * 2 != pop.size()) {
    throw std::invalid_argument("pairing does not cover the population");
  }
  const double noise_sd = std::sqrt(params.beta2());
  // Outcome noise is indexed by the group-1 agent rather than by pair rank, so
  // runs that differ only in the matching reuse the same shock per agent.
  std::vector<double> shock(pop.size());
  for (double& w : shock) w = noise_sd * stream.normal();
  pop.pre_scaled.resize(pop.size());
  for (const auto& [i, j] : pairing.pairs) {
    const double outcome = pop.skills[i] - pop.skills[j] + shock[i];
    const double xi = pop.ratings[i];
    const double xj = pop.ratings[j];
    pop.pre_scaled[i] = xi + gain * (outcome - (xi - xj));
    pop.pre_scaled[j] = xj + gain * (-outcome - (xj - xi));
  }
}

AccuracyState moment_state(std::span<const double> skills, std::span<const double> values) {
  if (skills.size() != values.size() || skills.empty()) {
    throw std::invalid_argument("moment_state: size mismatch");
  }
  const double ms = mean_of(skills);
  const double mv = mean_of(values);
  double ss = 0.0;
  double vv = 0.0;
  double sv = 0.0;
  for (std::size_t i = 0; i < skills.size(); ++i) {
    const double a = skills[i] - ms;
    const double b = values[i] - mv;
    ss += a * a;
    vv += b * b;
    sv += a * b;
  }
  const double n = static_cast<double>(skills.size());
  AccuracyState out;
  out.sigma = std::sqrt(vv / n);
  if (vv > 0.0 && ss > 0.0) out.r = sv / std::sqrt(ss * vv);
  return out;
}

AccuracyState empirical_state(const Population& pop) {
  return moment_state(pop.skills, pop.ratings);
}

std::string_view to_string(ScaleSource source) {
  return source == ScaleSource::mean_field ? "mean-field" : "empirical";
}

ScaleSource parse_scale_source(std::string_view text) {
  if (text == "mean-field" || text == "mean_field") return ScaleSource::mean_field;
  if (text == "empirical") return ScaleSource::empirical;
  throw std::invalid_argument("unknown scale source '" + std::string(text) + "'");
}

namespace {

struct CycleStreams {
  RngStream skill;
  RngStream match;
  RngStream outcome;
};

void run_cycle(Population& pop, const ControlTriple& c, const ModelParams& params,
               CycleStreams& streams) {
  scale_step(pop, c.scale);
  const Pairing pairing = match_step(pop, c.assortativity, streams.match);
  update_step(pop, pairing, c.gain, params, streams.outcome);
  skill_step(pop, params, streams.skill);
  ++pop.epoch;
}

}  // namespace

Trajectory run_trajectory(const TrajectoryOptions& options, const PolicySpec& policy,
                          const ModelParams& params, const RngStream& stream) {
  RngStream init_stream = derive(stream, StreamPurpose::init);
  CycleStreams streams{derive(stream, StreamPurpose::skill), derive(stream, StreamPurpose::match),
                       derive(stream, StreamPurpose::outcome)};

  Population pop;
  double r_mf = 0.0;
  if (options.init == InitMode::exact_moments) {
    pop = init_population(options.n, options.r0, init_stream);
    r_mf = options.r0;
  } else {
    pop = init_population(options.n, 0.0, init_stream);
    std::fill(pop.ratings.begin(), pop.ratings.end(), 0.0);
    std::fill(pop.pre_scaled.begin(), pop.pre_scaled.end(), 0.0);
    ControlTriple boot = decide(policy, 0.0, params);
    boot.scale = 0.0;
    run_cycle(pop, boot, params, streams);
    r_mf = transition_psi(0.0, boot, params);
    pop.epoch = 0;
  }

  Trajectory tr;
  tr.meta = {options.n,         options.horizon, stream.seed(), stream.stream_id(),
             params.lambda(),   params.beta2(),  policy.mode,   options.scale_source};
  const std::size_t rows = options.horizon + 1;
  tr.accuracy.reserve(rows);
  tr.dispersion.reserve(rows);
  tr.reference.reserve(rows);
  tr.policy_accuracy.reserve(rows);
  tr.controls.reserve(rows);
  tr.utility.reserve(rows);

  for (std::size_t t = 0; t <= options.horizon; ++t) {
    const AccuracyState observed = moment_state(pop.skills, pop.pre_scaled);
    const double r_policy =
        options.scale_source == ScaleSource::mean_field ? r_mf : std::clamp(observed.r, 0.0, 1.0);
    const ControlTriple control = decide(policy, r_policy, params);

    tr.accuracy.push_back(observed.r);
    tr.dispersion.push_back(observed.sigma);
    tr.reference.push_back(r_mf);
    tr.policy_accuracy.push_back(r_policy);
    tr.controls.push_back(control);
    tr.utility.push_back(net_utility(r_policy, control.assortativity, policy.cost));

    if (t == options.horizon) break;
    run_cycle(pop, control, params, streams);
    r_mf = transition_psi(r_mf, decide(policy, r_mf, params), params);
  }
  return tr;
}

}  // namespace ratekin
