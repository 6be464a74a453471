#pragma once

#include <cstdint>
#include <random>

namespace ratekin {

/// Seeded random stream.
///
/// The engine is a std::mt19937_64 seeded through std::seed_seq with the four
/// 32-bit halves of (seed, stream_id). Sub-streams are derived by hashing the
/// parent stream id with a label (splitmix64 finaliser), so a tree of
/// (replicate, purpose) labels maps to distinct, reproducible engines.
/// Normal deviates come from std::normal_distribution; sequences are
/// reproducible for a fixed build and standard library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Fresh stream for a child label; does not advance this stream.
  RngStream derive(std::uint64_t label) const;

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Labels for the per-purpose sub-streams of a simulation run.
enum class StreamPurpose : std::uint64_t {
  init = 1,
  skill = 2,
  match = 3,
  outcome = 4,
  oracle = 5,
};

inline RngStream derive(const RngStream& parent, StreamPurpose purpose) {
  return parent.derive(static_cast<std::uint64_t>(purpose));
}

}  // namespace ratekin
