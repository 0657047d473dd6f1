#include "firpriv/random.hpp"

#include <cmath>
#include <numbers>

namespace firpriv {
namespace {

// splitmix64 finalizer
constexpr std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_id(StreamTag tag, std::uint64_t replicate) noexcept {
  return (replicate << 8) | static_cast<std::uint64_t>(tag);
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t stream)
    : key_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL))) {}

CounterStream::CounterStream(std::uint64_t seed, StreamTag tag, std::uint64_t replicate)
    : CounterStream(seed, stream_id(tag, replicate)) {}

std::uint64_t CounterStream::bits(std::uint64_t index) const noexcept {
  return mix(key_ ^ mix(index * 0xA24BAED4963EE407ULL + 0x5851F42D4C957F2DULL));
}

double CounterStream::uniform(std::uint64_t index) const noexcept {
  constexpr double kScale = 0x1.0p-53;
  return (static_cast<double>(bits(index) >> 11) + 0.5) * kScale;
}

double CounterStream::gaussian(std::uint64_t index) const noexcept {
  const double u1 = uniform(2 * index);
  const double u2 = uniform(2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double CounterStream::unit(std::uint64_t index, NoiseDistribution dist) const noexcept {
  if (dist == NoiseDistribution::uniform) {
    return std::sqrt(3.0) * (2.0 * uniform(index) - 1.0);
  }
  return gaussian(index);
}

}  // namespace firpriv
