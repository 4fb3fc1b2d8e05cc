#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace hgcml {

/// Counter-based generator: output i is a SplitMix64 finalizer applied to
/// key + (i + 1) * golden_gamma. Any stream can be reproduced from its key,
/// and independent substreams are derived by hashing names into the key.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform in [0, n). Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t n);
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  Rng substream(std::string_view name, std::uint64_t index = 0) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_key(std::uint64_t key, std::string_view name, std::uint64_t index = 0);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace hgcml
