#include "equitest/random.hpp"

#include "equitest/mathcore.hpp"

namespace equitest {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMul0, ctr[0], lo0, hi0);
    mulhilo(kMul1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

void RandomStream::refill() {
  const Philox4x32::Counter ctr = {
      static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed_),
                               static_cast<std::uint32_t>(seed_ >> 32)};
  buffer_ = Philox4x32::block(ctr, key);
  ++block_index_;
  used_ = 0;
}

RandomStream::result_type RandomStream::operator()() {
  if (used_ >= 4) refill();
  const std::uint64_t lo = buffer_[used_];
  const std::uint64_t hi = buffer_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double RandomStream::uniform() {
  // Midpoint of one of 2^53 equal cells: never 0, never 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return -normal_quantile(uniform()); }

}  // namespace equitest
