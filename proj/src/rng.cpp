#include "multibin/rng.hpp"

#include <array>
#include <cmath>

#include "multibin/error.hpp"

namespace multibin {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : state_) {
    s = mix64(x);
    x += 0x9e3779b97f4a7c15ULL;
  }
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t key, std::uint64_t index) {
  return derive(mix64(seed) ^ key, index);
}

namespace {

// Ziggurat tables after Doornik (2005), "An improved ziggurat method to
// generate normal random samples".
constexpr int kLayers = 128;
constexpr double kTailStart = 3.442619855899;
constexpr double kLayerArea = 9.91256303526217e-3;

struct ZigguratTables {
  std::array<double, kLayers + 1> x{};
  std::array<double, kLayers> ratio{};

  ZigguratTables() {
    double f = std::exp(-0.5 * kTailStart * kTailStart);
    x[0] = kLayerArea / f;
    x[1] = kTailStart;
    x[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(kLayerArea / x[i - 1] + f));
      f = std::exp(-0.5 * x[i] * x[i]);
    }
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

double normal_tail(Rng& rng, bool negative) {
  double x, y;
  do {
    x = std::log(rng.uniform()) / kTailStart;
    y = std::log(rng.uniform());
  } while (-2.0 * y < x * x);
  return negative ? x - kTailStart : kTailStart - x;
}

// Marsaglia & Tsang (2000); d = shape - 1/3, c = 1 / sqrt(9 d), shape >= 1.
double marsaglia_tsang(Rng& rng, double d, double c) {
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double Rng::normal() {
  const auto& z = ziggurat();
  for (;;) {
    const result_type bits = (*this)();
    // High 53 bits give u in (-1, 1); low 7 bits pick the layer.
    const double u = 2.0 * ((static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53) - 1.0;
    const int i = static_cast<int>(bits & 0x7F);
    if (std::abs(u) < z.ratio[i]) return u * z.x[i];
    if (i == 0) return normal_tail(*this, u < 0.0);
    const double x = u * z.x[i];
    const double f0 = std::exp(-0.5 * (z.x[i] * z.x[i] - x * x));
    const double f1 = std::exp(-0.5 * (z.x[i + 1] * z.x[i + 1] - x * x));
    if (f1 + uniform() * (f0 - f1) < 1.0) return x;
  }
}

namespace detail {

ExpZiggurat::ExpZiggurat() {
  x[0] = kExpLayerArea / std::exp(-kExpTailStart);
  x[1] = kExpTailStart;
  for (int i = 2; i < kExpLayers; ++i) x[i] = -std::log(kExpLayerArea / x[i - 1] + std::exp(-x[i - 1]));
  x[kExpLayers] = 0.0;
  for (int i = 0; i <= kExpLayers; ++i) f[i] = std::exp(-x[i]);
  for (int i = 0; i < kExpLayers; ++i) ratio[i] = x[i + 1] / x[i];
}

const ExpZiggurat exp_ziggurat;

double exponential_edge(Rng& rng, int i, double u) {
  const auto& z = exp_ziggurat;
  double base = 0.0;
  for (;;) {
    if (i == 0) {
      // memoryless tail: restart shifted by the tail start
      base += kExpTailStart;
    } else {
      const double x = u * z.x[i];
      if (z.f[i] + rng.uniform() * (z.f[i + 1] - z.f[i]) < std::exp(-x)) return base + x;
    }
    const Rng::result_type bits = rng();
    u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    i = static_cast<int>(bits & 0xFF);
    if (u < z.ratio[i]) return base + u * z.x[i];
  }
}

}  // namespace detail

double Rng::gamma(double shape) { return GammaSampler(shape)(*this); }

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0)) throw InvalidParams("gamma shape must be positive");
  if (shape >= 1.0) return std::log(gamma(shape));
  const double d = shape + 1.0 - 1.0 / 3.0;
  const double g = marsaglia_tsang(*this, d, 1.0 / std::sqrt(9.0 * d));
  return std::log(g) + std::log(uniform()) / shape;
}

GammaSampler::GammaSampler(double shape) : shape_(shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw InvalidParams("gamma shape must be positive and finite");
  boosted_ = shape < 1.0;
  // Small integer shapes: sum of exponentials is cheaper than rejection.
  small_integer_ = (shape <= 8.0 && shape == std::floor(shape)) ? static_cast<int>(shape) : 0;
  d_ = (boosted_ ? shape + 1.0 : shape) - 1.0 / 3.0;
  c_ = 1.0 / std::sqrt(9.0 * d_);
  inv_shape_ = 1.0 / shape;
}

double GammaSampler::sample_general(Rng& rng) const {
  const double g = marsaglia_tsang(rng, d_, c_);
  if (!boosted_) return g;
  return g * std::pow(rng.uniform(), inv_shape_);
}

std::size_t Rng::categorical(std::span<const double> cumulative) {
  const double u = uniform();
  const std::size_t last = cumulative.size() - 1;
  for (std::size_t q = 0; q < last; ++q) {
    if (u < cumulative[q]) return q;
  }
  return last;
}

}  // namespace multibin
