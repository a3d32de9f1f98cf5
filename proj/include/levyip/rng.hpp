#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace levyip {

// Philox4x32-10 (Salmon, Moraes, Dror, Shaw; SC'11). Stateless bijection of a
// 128-bit counter under a 64-bit key.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = Counter{static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                    static_cast<std::uint32_t>(p1),
                    static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                    static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// Coordinates of an independent random stream. Every (seed, replica,
/// particle, step) tuple addresses a disjoint slice of the Philox counter
/// space, so streams can be created anywhere without coordination.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint32_t replica = 0;
  std::uint32_t particle = 0;
  std::uint32_t step = 0;
};

/// Step tag reserved for initial-condition sampling.
inline constexpr std::uint32_t kInitialStep = 0xFFFFFFFFu;

/// Sequential view over one counter-based stream. Copying a stream copies its
/// position; two copies produce the same values.
class CounterStream {
 public:
  explicit CounterStream(StreamId id) noexcept
      : key_{static_cast<std::uint32_t>(id.seed),
             static_cast<std::uint32_t>(id.seed >> 32)},
        ctr_{0u, id.step, id.particle, id.replica} {}

  std::uint32_t next_u32() noexcept {
    if (lane_ == 4) {
      block_ = Philox4x32::generate(ctr_, key_);
      ++ctr_[0];
      lane_ = 0;
    }
    return block_[lane_++];
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    const std::uint64_t hi = next_u32() >> 5;
    const std::uint64_t lo = next_u32() >> 6;
    return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
  }

  double exponential() noexcept { return -std::log(uniform()); }

  /// Standard normal by Box-Muller; the second variate is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int lane_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace levyip
