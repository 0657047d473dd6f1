#pragma once

#include <cstdint>

namespace firpriv {

/// Noise families the simulator can feed through the privacy filter. Both
/// have zero mean and unit variance.
enum class NoiseDistribution { gaussian, uniform };

/// Stream tags; combined with a replicate index into a stream id.
enum class StreamTag : std::uint64_t {
  input = 1,
  privacy = 2,
  sensor = 3,
  mechanism = 4,
  length = 5,
};

/// Counter-based random stream: draw i of stream s under seed k is a pure
/// function of (k, s, i). No state is mutated by drawing, so any partition of
/// the index space across threads reproduces the serial result.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream);
  CounterStream(std::uint64_t seed, StreamTag tag, std::uint64_t replicate = 0);

  std::uint64_t bits(std::uint64_t index) const noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t index) const noexcept;
  /// Standard normal (Box-Muller over draws 2i and 2i+1).
  double gaussian(std::uint64_t index) const noexcept;
  /// Zero-mean unit-variance draw from the chosen family.
  double unit(std::uint64_t index, NoiseDistribution dist) const noexcept;

 private:
  std::uint64_t key_;
};

std::uint64_t stream_id(StreamTag tag, std::uint64_t replicate) noexcept;

}  // namespace firpriv
