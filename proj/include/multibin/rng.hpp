#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace multibin {

/// SplitMix64 finalizer. Used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

/// Stable 64-bit FNV-1a hash, used to key per-condition seed streams.
std::uint64_t stable_hash(std::string_view text);

/// Seeded generator passed explicitly to every stochastic operation.
///
/// The engine is xoshiro256++ (state seeded through SplitMix64). The variates
/// below are written out so the stream of draws depends only on the seed, not
/// on standard library distribution internals.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  /// Generator for child stream `index` of `seed`. Children of the same
  /// parent seed are independent of each other and of the parent.
  static Rng derive(std::uint64_t seed, std::uint64_t index);
  static Rng derive(std::uint64_t seed, std::uint64_t key, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const result_type out = rotl(state_[0] + state_[3], 23) + state_[0];
    const result_type t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return out;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal (ziggurat, 128 layers).
  double normal();
  /// Standard exponential (ziggurat, 256 layers).
  inline double exponential();

  /// Gamma(shape, 1). Valid for every shape > 0.
  double gamma(double shape);

  /// log of a Gamma(shape, 1) variate; does not underflow for tiny shapes.
  double log_gamma_variate(double shape);

  /// Index drawn from the distribution given by cumulative probabilities
  /// (last entry is treated as 1).
  std::size_t categorical(std::span<const double> cumulative);

 private:
  static result_type rotl(result_type x, int k) { return (x << k) | (x >> (64 - k)); }

  result_type state_[4];
};

namespace detail {

// Exponential ziggurat, 256 layers (Marsaglia & Tsang 2000 constants).
inline constexpr int kExpLayers = 256;
inline constexpr double kExpTailStart = 7.69711747013104972;
inline constexpr double kExpLayerArea = 3.9496598225815571993e-3;

struct ExpZiggurat {
  ExpZiggurat();
  double x[kExpLayers + 1];
  double f[kExpLayers + 1];
  double ratio[kExpLayers];
};

extern const ExpZiggurat exp_ziggurat;

// Wedge and tail of the exponential ziggurat.
double exponential_edge(Rng& rng, int layer, double u);

}  // namespace detail

inline double Rng::exponential() {
  const result_type bits = (*this)();
  const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
  const int i = static_cast<int>(bits & 0xFF);
  if (u < detail::exp_ziggurat.ratio[i]) return u * detail::exp_ziggurat.x[i];
  return detail::exponential_edge(*this, i, u);
}

/// Gamma(shape, 1) sampler with the shape-dependent constants precomputed.
/// Shapes below 1 use Gamma(a) = Gamma(a + 1) * U^(1/a).
class GammaSampler {
 public:
  explicit GammaSampler(double shape);

  double shape() const { return shape_; }
  double operator()(Rng& rng) const {
    if (small_integer_ > 0) {
      double g = 0.0;
      for (int i = 0; i < small_integer_; ++i) g += rng.exponential();
      return g;
    }
    return sample_general(rng);
  }

 private:
  double sample_general(Rng& rng) const;

  double shape_;
  double d_;
  double c_;
  double inv_shape_;
  bool boosted_;
  int small_integer_;
};

}  // namespace multibin
