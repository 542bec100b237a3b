#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace stefan::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Counter philox4x32_10(Counter ctr, Key key);

/// Independent purposes sharing one seed never reuse a counter.
enum class Stream : std::uint32_t {
  common = 1,
  idiosyncratic = 2,
  bridge = 3,
  picard_idiosyncratic = 4,
  picard_bridge = 5,
};

/// Raw block for (seed, stream, id, index). Every draw in the library is a
/// pure function of these four numbers, so results do not depend on thread
/// count or on the order in which draws are requested.
Counter block(std::uint64_t seed, Stream stream, std::uint64_t id, std::uint64_t index);

/// Uniform on [0, 1) with 53 random bits.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Two uniforms on [0, 1) from one block.
std::pair<double, double> uniform_pair(std::uint64_t seed, Stream stream, std::uint64_t id,
                                       std::uint64_t index);

/// Two independent standard normals from one block (Box–Muller).
std::pair<double, double> normal_pair(std::uint64_t seed, Stream stream, std::uint64_t id,
                                      std::uint64_t index);

/// k-th standard normal of the (seed, stream, id) sequence: component k & 1
/// of normal_pair(..., k >> 1).
double normal(std::uint64_t seed, Stream stream, std::uint64_t id, std::uint64_t k);

/// k-th uniform of the (seed, stream, id) sequence, same pairing as normal().
double uniform(std::uint64_t seed, Stream stream, std::uint64_t id, std::uint64_t k);

/// SplitMix64 finalizer, used to derive replica seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of replica r derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replica);

/// Sequential reader over normal(seed, stream, id, k), k = start, start + 1, ...
/// that spends one block per two draws.
class NormalSequence {
 public:
  NormalSequence(std::uint64_t seed, Stream stream, std::uint64_t id, std::uint64_t start = 0)
      : seed_(seed), stream_(stream), id_(id), next_(start) {}

  double operator()();

 private:
  std::uint64_t seed_;
  Stream stream_;
  std::uint64_t id_;
  std::uint64_t next_;
  std::uint64_t cached_index_ = ~std::uint64_t{0};
  std::pair<double, double> cached_{};
};

}  // namespace stefan::rng
