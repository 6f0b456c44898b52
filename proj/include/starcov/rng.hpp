#ifndef STARCOV_RNG_HPP
#define STARCOV_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace starcov {

/// SplitMix64 finalizer, used to derive independent substream keys.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seedable, splittable generator. A stream is identified by a 64-bit key;
/// split(i) yields the key of child stream i, so a tree of substreams can be
/// handed to parallel workers and still reproduce bit-for-bit.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : key_(splitmix64(seed)), engine_(make_engine(key_)) {}

  [[nodiscard]] Rng split(std::uint64_t stream) const {
    return Rng(Key{splitmix64(key_ ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))});
  }

  [[nodiscard]] std::uint64_t key() const { return key_; }

  Engine& engine() { return engine_; }

  template <typename Scalar = double>
  Scalar uniform(Scalar lo, Scalar hi) {
    return std::uniform_real_distribution<Scalar>(lo, hi)(engine_);
  }

  template <typename Scalar = double>
  Scalar normal(Scalar mean = Scalar(0), Scalar sd = Scalar(1)) {
    return std::normal_distribution<Scalar>(mean, sd)(engine_);
  }

  template <typename Scalar = double>
  Scalar exponential(Scalar mean) {
    return std::exponential_distribution<Scalar>(Scalar(1) / mean)(engine_);
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
  template <typename Scalar = double>
  std::complex<Scalar> complex_normal() {
    std::normal_distribution<Scalar> nd(Scalar(0), Scalar(0.70710678118654752440L));
    const Scalar re = nd(engine_);
    const Scalar im = nd(engine_);
    return {re, im};
  }

 private:
  struct Key {
    std::uint64_t value;
  };
  explicit Rng(Key k) : key_(k.value), engine_(make_engine(key_)) {}

  static Engine make_engine(std::uint64_t key) {
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(splitmix64(key)),
                      static_cast<std::uint32_t>(splitmix64(key) >> 32)};
    return Engine(seq);
  }

  std::uint64_t key_;
  Engine engine_;
};

}  // namespace starcov

#endif  // STARCOV_RNG_HPP
