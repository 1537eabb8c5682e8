#ifndef VIA_RNG_HPP
#define VIA_RNG_HPP

#include <cstdint>
#include <random>

namespace via {

/// SplitMix64 finalizer; used to decorrelate (seed, stream) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded, splittable random stream.
///
/// Each (seed, stream) pair maps to an independent mt19937_64 instance. The
/// uniform and Bernoulli draws are built directly from the engine's raw
/// 64-bit output, so trajectories are bit-identical across standard library
/// implementations.
class RngHandle {
 public:
  explicit RngHandle(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), engine_(mix_seed(seed, stream)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with probability `prob`; prob = 0 never fires, prob = 1 always does.
  bool bernoulli(double prob) { return uniform() < prob; }

  /// Child stream keyed by `sub`; independent of the parent's position.
  RngHandle split(std::uint64_t sub) const {
    return RngHandle(mix_seed(seed_, stream_), sub);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace via

#endif  // VIA_RNG_HPP
