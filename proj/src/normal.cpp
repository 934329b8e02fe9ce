#include "multibin/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "multibin/error.hpp"
#include "multibin/rng.hpp"

namespace multibin {

double norm_cdf(double x) {
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal quantile needs p in (0, 1)");
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

namespace {

template <unsigned N>
double bvn_lowcorr(double h, double k, double r) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  const double hk = h * k;
  const double hs = (h * h + k * k) / 2.0;
  const double asr = std::asin(r);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      const double sn = std::sin(asr * (sgn * x[i] + 1.0) / 2.0);
      sum += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
  }
  // gauss<> weights are for [-1, 1]; the sum above covers it once
  return sum * asr / (4.0 * std::numbers::pi) + norm_cdf(-h) * norm_cdf(-k);
}

// Upper orthant P(X > h, Y > k).
double bvnu(double h, double k, double r) {
  if (std::abs(r) < 0.3) return bvn_lowcorr<6>(h, k, r);
  if (std::abs(r) < 0.75) return bvn_lowcorr<12>(h, k, r);
  if (std::abs(r) < 0.925) return bvn_lowcorr<20>(h, k, r);

  using G = boost::math::quadrature::gauss<double, 20>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  const double two_pi = 2.0 * std::numbers::pi;
  if (r < 0.0) k = -k;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * norm_cdf(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double xs = std::pow(a * (sgn * x[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          bvn += a * w[i] * std::exp(asr) *
                 (std::exp(-hk * xs / (2.0 * std::pow(1.0 + rs, 2))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
        }
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + norm_cdf(-std::max(h, k));
  return -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-k));
}

// Cholesky of a correlation matrix; throws when not positive definite enough.
std::vector<double> cholesky(std::span<const double> a, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t p = 0; p < j; ++p) s -= l[i * n + p] * l[j * n + p];
      if (i == j) {
        if (s <= 1e-14) throw InvalidArgument("correlation matrix is not positive definite");
        l[i * n + i] = std::sqrt(s);
      } else {
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }
  return l;
}

constexpr std::array<double, 15> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};

// Genz separation of variables with a randomly shifted Richtmyer lattice.
double mvn_qmc(std::span<const double> b, std::span<const double> corr) {
  const std::size_t n = b.size();
  if (n - 1 > kPrimes.size()) throw InvalidArgument("too many dimensions for the normal CDF");
  const auto l = cholesky(corr, n);
  constexpr int kShifts = 8;
  constexpr int kPoints = 4096;
  Rng rng(0x6d766e63646621ULL);
  std::vector<double> y(n);
  std::vector<double> shift(n);
  double total = 0.0;
  for (int s = 0; s < kShifts; ++s) {
    for (auto& u : shift) u = rng.uniform();
    double acc = 0.0;
    for (int p = 1; p <= kPoints; ++p) {
      double f = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        double t = b[i];
        for (std::size_t j = 0; j < i; ++j) t -= l[i * n + j] * y[j];
        const double e = norm_cdf(t / l[i * n + i]);
        f *= e;
        if (i + 1 == n || f == 0.0) break;
        double u = p * std::sqrt(kPrimes[i]) + shift[i];
        u -= std::floor(u);
        u = std::abs(2.0 * u - 1.0);  // baker's transform
        const double v = std::clamp(u * e, 1e-300, 1.0 - 1e-16);
        y[i] = norm_quantile(v);
      }
      acc += f;
    }
    total += acc / kPoints;
  }
  return total / kShifts;
}

}  // namespace

double bvn_cdf(double h, double k, double r) {
  if (!(r >= -1.0 && r <= 1.0)) throw InvalidArgument("correlation must lie in [-1, 1]");
  if (std::isinf(h) || std::isinf(k)) {
    if (h == -std::numeric_limits<double>::infinity() || k == -std::numeric_limits<double>::infinity()) return 0.0;
    return std::isinf(h) ? norm_cdf(k) : norm_cdf(h);
  }
  return std::clamp(bvnu(-h, -k, r), 0.0, 1.0);
}

double mvn_cdf(std::span<const double> b, std::span<const double> corr) {
  const std::size_t n = b.size();
  if (n == 0) throw InvalidArgument("normal CDF needs at least one dimension");
  if (corr.size() != n * n) throw DimensionMismatch("correlation matrix size does not match bounds");
  if (n == 1) return norm_cdf(b[0]);
  if (n == 2) return bvn_cdf(b[0], b[1], corr[1]);
  return std::clamp(mvn_qmc(b, corr), 0.0, 1.0);
}

}  // namespace multibin
