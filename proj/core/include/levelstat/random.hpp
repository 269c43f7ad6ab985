#pragma once

#include <array>
#include <cstdint>

namespace levelstat {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A pure function of (key, counter): there is no state to advance, so any
/// draw can be recomputed in isolation and parallel workers never share state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  [[nodiscard]] Counter operator()(Counter counter) const;

 private:
  Key key_;
};

/// Uniform double in [0, 1) at a fixed lattice point of the stream space.
/// `stream` separates independent uses of the same (sample, site) pair.
[[nodiscard]] double uniform01(std::uint64_t seed, std::uint64_t sample_index, std::uint32_t site,
                               std::uint32_t stream = 0);

}  // namespace levelstat
