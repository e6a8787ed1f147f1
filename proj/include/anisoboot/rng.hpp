#pragma once

// Counter-based random numbers.
//
// Every random cell value is a pure function of (seed, trial, stream, cell).
// That makes fills independent of thread scheduling and lets one uniform per
// cell be shared between runs at different p (common random numbers).

#include <array>
#include <cmath>
#include <cstdint>

namespace anisoboot {

/// Philox4x32-10 block function (Salmon et al., Random123).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Separates independent uses of one seed.
enum class Stream : std::uint32_t {
  fill = 0,
  stepping_stone = 1,
  auxiliary = 2,
};

/// Integer cutoff such that `word < cutoff` happens with probability p for a
/// uniform 32-bit word. Monotone in p, exact at p = 0 and p = 1.
inline std::uint64_t occupancy_cutoff(double p) noexcept {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return std::uint64_t{1} << 32;
  return static_cast<std::uint64_t>(std::ldexp(p, 32));
}

/// Random 32-bit words indexed by cell: word(i) for any i in any order.
class CellStream {
 public:
  CellStream(std::uint64_t seed, std::uint64_t trial, Stream stream = Stream::fill) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        trial_(static_cast<std::uint32_t>(trial)),
        stream_((static_cast<std::uint32_t>(trial >> 32) << 8) ^ static_cast<std::uint32_t>(stream)) {}

  std::uint32_t word(std::uint64_t cell) const noexcept {
    return block(cell >> 2)[cell & 3u];
  }

  /// Four consecutive words for cells 4*b .. 4*b+3.
  Philox4x32::Counter block(std::uint64_t b) const noexcept {
    return Philox4x32::generate(
        {static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), trial_, stream_}, key_);
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t trial_;
  std::uint32_t stream_;
};

/// Sequential engine over a CellStream; satisfies UniformRandomBitGenerator.
/// Distributions from <random> are not bit-stable across standard libraries,
/// so use the helpers below for anything that must reproduce exactly.
class CounterEngine {
 public:
  using result_type = std::uint32_t;

  CounterEngine(std::uint64_t seed, std::uint64_t trial, Stream stream) noexcept
      : cells_(seed, trial, stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return 0xFFFFFFFFu; }

  result_type operator()() noexcept {
    if (pos_ == 4) {
      buf_ = cells_.block(next_++);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform() noexcept {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Number of failures before the first success of a Bernoulli(p) sequence.
  std::uint64_t geometric(double p) noexcept {
    if (p >= 1.0) return 0;
    const double g = std::floor(std::log(uniform()) / std::log1p(-p));
    return g >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(g);
  }

 private:
  CellStream cells_;
  Philox4x32::Counter buf_{};
  std::uint64_t next_ = 0;
  int pos_ = 4;
};

}  // namespace anisoboot
