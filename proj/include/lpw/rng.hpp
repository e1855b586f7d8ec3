#pragma once

#include <cstdint>
#include <random>

namespace lpw {

/// Purpose tags keep streams derived from the same (seed, id) disjoint.
enum class StreamPurpose : std::uint64_t {
  General = 0,
  Settings = 1,
  Lambda = 2,
  Outcome = 3,
  Strategy = 4,
  Initializer = 5,
  Perturbation = 6,
};

/// A reproducible random stream keyed by (master seed, stream id, purpose).
///
/// Streams are derived counter-style from the key alone, so a run's draws
/// never depend on how many other streams were created before it or on the
/// order in which runs execute.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
            StreamPurpose purpose = StreamPurpose::General);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double normal();
  std::uint64_t bits() { return engine_(); }

  /// The derived 64-bit seed of this stream (recorded in run ledgers).
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace lpw
