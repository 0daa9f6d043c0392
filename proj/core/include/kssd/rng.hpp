#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace kssd {

/// One SplitMix64 step; used for seeding and seed derivation.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Deterministically mixes a base seed with a sequence of stream labels
/// (grid index, trial index, ...) into an independent-looking 64-bit seed.
/// Results depend only on the arguments, never on scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> labels) noexcept;

/// xoshiro256** (Blackman & Vigna) seeded through SplitMix64.
///
/// Normal variates use the basic Box-Muller transform on two uniforms
/// in (0, 1]; the second variate of each pair is cached. Streams are
/// reproducible within this implementation for a fixed seed.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  result_type operator()() noexcept { return next_u64(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Uniform integer in [0, bound) without modulo bias. bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;

  /// Standard normal variate.
  double normal() noexcept;

private:
  std::array<std::uint64_t, 4> s_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// k distinct indices from [0, n), uniformly, via a partial Fisher-Yates
/// shuffle. Returned in draw order (not sorted). Requires k <= n.
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k);

}  // namespace kssd
