#pragma once

#include <stdexcept>
#include <string>

namespace ratekin {

/// Raised when a rating dispersion collapses to zero where a positive one is
/// required (e.g. rescaling an all-equal rating vector to a positive target).
class DegenerateScaleError : public std::domain_error {
 public:
  explicit DegenerateScaleError(const std::string& what) : std::domain_error(what) {}
};

/// Environment constants: skill persistence and outcome-noise variance.
class ModelParams {
 public:
  ModelParams(double lambda, double beta2);

  double lambda() const { return lambda_; }
  double beta2() const { return beta2_; }

 private:
  double lambda_;
  double beta2_;
};

/// Per-period platform controls.
///
/// `gain` is the Elo-style step size K, `assortativity` the matched-rating
/// correlation eta in [0,1), and `scale` the target rating standard deviation.
/// The closed-form maps also accept gain == 0 as the no-update limit.
struct ControlTriple {
  double gain = 0.0;
  double assortativity = 0.0;
  double scale = 0.0;
};

/// Throws std::domain_error unless gain >= 0, 0 <= assortativity < 1 and
/// scale >= 0.
void validate(const ControlTriple& control);

/// Scalar state of the reduced dynamics. sigma == 0 implies r == 0.
struct AccuracyState {
  double r = 0.0;
  double sigma = 0.0;
};

}  // namespace ratekin
