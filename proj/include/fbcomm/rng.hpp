// Counter-based random numbers: every sample is a pure function of
// (seed, trial, stream, t), so trials can run in any order or in parallel
// and still reproduce bit-for-bit.
#pragma once

#include <array>
#include <cstdint>

namespace fbcomm {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}
  explicit Philox4x32(Key key) : key_(key) {}

  Counter operator()(Counter ctr) const;

 private:
  Key key_;
};

/// Identifies an independent noise sequence within a trial.
enum class Stream : std::uint32_t {
  InitialState = 0,
  Process = 1,
  Measurement = 2,
  Channel = 3,
  Feedback = 4,
};

/// Uniform on the open interval (0, 1) with 52 random bits.
double uniform_open(std::uint32_t hi, std::uint32_t lo);

/// Standard normal sample keyed by (seed, trial, stream, t). Uses the
/// cosine branch of Box-Muller on the first two 32-bit word pairs.
double standard_normal(std::uint64_t seed, std::uint64_t trial, Stream stream,
                       std::uint32_t t);

}  // namespace fbcomm
