#pragma once

#include <array>
#include <cstdint>
#include <cmath>

#include "slfv/vec.hpp"

namespace slfv {

/// splitmix64 finalizer; used to derive stream identifiers.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Philox4x32-10 block function (counter-based, Random123 family).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
  }
  return ctr;
}

/// Splittable counter-based random stream.
///
/// A stream is identified by (seed, stream_id). The 128-bit Philox counter is
/// split as (block index, stream id), so streams with distinct ids draw from
/// provably disjoint counter ranges. Derived streams (child/substream) hash the
/// parent id with a tag, which makes replicate- and node-keyed streams
/// independent of scheduling order.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id),
        seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Deterministic child stream; independent of the order children are made.
  RngStream child(std::uint64_t tag) const {
    return RngStream(seed_, mix64(stream_id_ ^ mix64(tag + 0x632BE59BD9B4E019ull)));
  }

  std::uint32_t next_u32() {
    if (have_ == 0) refill();
    return block_[--have_];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer on [0,n), n >= 1.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Standard normal (Box-Muller; second value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0,1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform point in the unit ball (rejection from the cube).
  template <int D>
  Vec<D> unit_ball() {
    Vec<D> p;
    for (;;) {
      double s = 0;
      for (int i = 0; i < D; ++i) {
        p[i] = uniform(-1.0, 1.0);
        s += p[i] * p[i];
      }
      if (s <= 1.0) return p;
    }
  }

  template <int D>
  Vec<D> point_in_ball(const Vec<D>& center, double radius) {
    Vec<D> b = unit_ball<D>();
    return center + radius * b;
  }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
        static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
    block_ = philox4x32(ctr, key_);
    ++block_index_;
    have_ = 4;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_id_;
  std::uint64_t seed_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int have_ = 0;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace slfv
