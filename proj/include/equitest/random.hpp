#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace equitest {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure: the same
/// (counter, key) always yields the same four words.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// A reproducible random stream addressed by (seed, stream id).
///
/// The seed becomes the Philox key and the stream id occupies the upper half of
/// the 128-bit counter, so every replication owns a disjoint, order-independent
/// sequence. Draws from one stream are strictly sequential: each uniform consumes
/// one 64-bit word and each normal consumes exactly one uniform.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal by inversion of the uniform.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace equitest
