#include "stefan/rng.hpp"

#include <cmath>
#include <numbers>

namespace stefan::rng {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline Counter round(const Counter& c, const Key& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kM0, c[0], hi0, lo0);
  mulhilo(kM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Counter philox4x32_10(Counter ctr, Key key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    ctr = round(ctr, key);
  }
  return ctr;
}

Counter block(std::uint64_t seed, Stream stream, std::uint64_t id, std::uint64_t index) {
  const Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const Counter ctr{static_cast<std::uint32_t>(id),
                    (static_cast<std::uint32_t>(stream) << 24) |
                        (static_cast<std::uint32_t>(id >> 32) & 0xFFFFFFu),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return philox4x32_10(ctr, key);
}

std::pair<double, double> uniform_pair(std::uint64_t seed, Stream stream, std::uint64_t id,
                                       std::uint64_t index) {
  const Counter b = block(seed, stream, id, index);
  return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
}

std::pair<double, double> normal_pair(std::uint64_t seed, Stream stream, std::uint64_t id,
                                      std::uint64_t index) {
  const auto [u1, u2] = uniform_pair(seed, stream, id, index);
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

double normal(std::uint64_t seed, Stream stream, std::uint64_t id, std::uint64_t k) {
  const auto p = normal_pair(seed, stream, id, k >> 1);
  return (k & 1) ? p.second : p.first;
}

double uniform(std::uint64_t seed, Stream stream, std::uint64_t id, std::uint64_t k) {
  const auto p = uniform_pair(seed, stream, id, k >> 1);
  return (k & 1) ? p.second : p.first;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replica) {
  return splitmix64(base ^ splitmix64(replica + 1));
}

double NormalSequence::operator()() {
  const std::uint64_t k = next_++;
  const std::uint64_t pair = k >> 1;
  if (pair != cached_index_) {
    cached_ = normal_pair(seed_, stream_, id_, pair);
    cached_index_ = pair;
  }
  return (k & 1) ? cached_.second : cached_.first;
}

}  // namespace stefan::rng
