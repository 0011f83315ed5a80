#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace almostcomm {

/// Seed plus stream id. Disjoint stream ids give independent sequences, which
/// is how Monte-Carlo work is sharded.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// Deterministic derived stream, used for per-instance and retry sequences.
  [[nodiscard]] RngSeed child(std::uint64_t k) const;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

class Rng {
 public:
  explicit Rng(RngSeed seed);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Standard complex normal: E|z|^2 = 1.
  std::complex<double> complex_normal();
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace almostcomm
