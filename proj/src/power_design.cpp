#include "multibin/power_design.hpp"

#include <cmath>

#include "multibin/error.hpp"
#include "multibin/normal.hpp"

namespace multibin {

namespace {

constexpr double kEffectTolerance = 1e-15;

long ceil_n(double x) {
  // Guard against 75.0000000001 style round-off.
  return static_cast<long>(std::ceil(x - 1e-9));
}

double bernoulli_var(double t) { return t * (1.0 - t); }

// Covariance of outcomes k and l within one arm.
double outcome_cov(const CellProbabilities& phi, std::span<const double> theta, int k, int l) {
  if (k == l) return bernoulli_var(theta[static_cast<std::size_t>(k)]);
  return joint_success(phi.values(), phi.outcomes(), k, l) - theta[static_cast<std::size_t>(k)] * theta[static_cast<std::size_t>(l)];
}

}  // namespace

void DesignTarget::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  if (phi_e.size() != phi_c.size()) throw DimensionMismatch("arms have different outcome counts");
}

std::vector<double> DesignTarget::delta() const {
  auto te = margins_of(phi_e);
  auto tc = margins_of(phi_c);
  std::vector<double> d(static_cast<std::size_t>(outcomes()));
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = te[k] - tc[k];
  return d;
}

double weighted_variance(const CellProbabilities& phi, std::span<const double> w) {
  const int kk = phi.outcomes();
  if (static_cast<int>(w.size()) != kk) throw DimensionMismatch("weight count does not match outcomes");
  const auto theta = margins_of(phi);
  double v = 0.0;
  for (int k = 0; k < kk; ++k) {
    for (int l = 0; l < kk; ++l) {
      v += w[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(l)] * outcome_cov(phi, theta.values(), k, l);
    }
  }
  return v;
}

long sample_size_single(const DesignTarget& target, int k) {
  target.validate();
  if (k < 0 || k >= target.outcomes()) throw InvalidArgument("outcome index out of range");
  std::vector<double> w(static_cast<std::size_t>(target.outcomes()), 0.0);
  w[static_cast<std::size_t>(k)] = 1.0;
  return sample_size_compensatory(target, w);
}

long sample_size_compensatory(const DesignTarget& target, std::span<const double> w) {
  target.validate();
  const auto d = target.delta();
  if (w.size() != d.size()) throw DimensionMismatch("weight count does not match outcomes");
  double effect = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) effect += w[k] * d[k];
  if (std::abs(effect) < kEffectTolerance) throw ZeroEffect("anticipated weighted difference is zero");
  if (effect < 0.0) throw InfeasibleRule("anticipated weighted difference is negative");
  const double z = norm_quantile(1.0 - target.alpha) + norm_quantile(1.0 - target.beta);
  const double v = weighted_variance(target.phi_e, w) + weighted_variance(target.phi_c, w);
  return std::max(2L, ceil_n(z * z * v / (effect * effect)));
}

double mvn_power(const DecisionRule& rule, const DesignTarget& target, long n, const MvnOptions& options) {
  target.validate();
  if (!rule.is_any() && !rule.is_all()) throw InvalidArgument("normal-approximation power is for the any and all rules");
  const int kk = target.outcomes();
  const auto te = margins_of(target.phi_e);
  const auto tc = margins_of(target.phi_c);
  const auto ku = static_cast<std::size_t>(kk);

  std::vector<double> cov(ku * ku);
  for (int k = 0; k < kk; ++k) {
    for (int l = 0; l < kk; ++l) {
      cov[static_cast<std::size_t>(k) * ku + static_cast<std::size_t>(l)] =
          outcome_cov(target.phi_e, te.values(), k, l) + outcome_cov(target.phi_c, tc.values(), k, l);
    }
  }
  bool pooled = options.variance == VarianceConvention::PooledNull;
  if (options.variance == VarianceConvention::Default) pooled = rule.is_all();

  const double z = norm_quantile(rule.is_any() ? 1.0 - target.alpha / 2.0 : 1.0 - target.alpha);
  const double root_n = std::sqrt(static_cast<double>(n));
  // Standardized critical points c_k: rejection on k is (Z_k > c_k).
  std::vector<double> c(ku);
  std::vector<double> corr(ku * ku);
  for (std::size_t k = 0; k < ku; ++k) {
    const double v = cov[k * ku + k];
    if (!(v > 0.0)) throw DegenerateVariance("outcome " + std::to_string(k + 1) + " has zero variance");
    double v0 = v;
    if (pooled) {
      const double p = (te[k] + tc[k]) / 2.0;
      v0 = 2.0 * p * (1.0 - p);
    }
    c[k] = (z * std::sqrt(v0) - (te[k] - tc[k]) * root_n) / std::sqrt(v);
    for (std::size_t l = 0; l < ku; ++l) {
      corr[k * ku + l] = cov[k * ku + l] / std::sqrt(cov[k * ku + k] * cov[l * ku + l]);
    }
  }
  if (rule.is_any()) return 1.0 - mvn_cdf(c, corr);
  // P(all Z_k > c_k) = P(all -Z_k < -c_k)
  for (double& x : c) x = -x;
  return mvn_cdf(c, corr);
}

long sample_size_mvn(const DecisionRule& rule, const DesignTarget& target, const MvnOptions& options) {
  target.validate();
  const auto d = target.delta();
  if (rule.is_all()) {
    for (double x : d) {
      if (!(x > 0.0)) throw InfeasibleRule("the all rule needs every anticipated difference to be positive");
    }
  } else if (rule.is_any()) {
    bool some = false;
    for (double x : d) some = some || x > 0.0;
    if (!some) throw InfeasibleRule("the any rule needs at least one positive anticipated difference");
  } else {
    throw InvalidArgument("normal-approximation sample size is for the any and all rules");
  }
  const double goal = 1.0 - target.beta;
  for (long n = 2; n <= options.max_n; ++n) {
    if (mvn_power(rule, target, n, options) >= goal) return n;
  }
  throw InfeasibleRule("power target not reached below n = " + std::to_string(options.max_n));
}

long sample_size(const DecisionRule& rule, const DesignTarget& target) {
  if (rule.is_any() || rule.is_all()) return sample_size_mvn(rule, target);
  if (rule.is_single()) return sample_size_single(target, std::get<rules::Single>(rule.variant()).k);
  return sample_size_compensatory(target, std::get<rules::Compensatory>(rule.variant()).w);
}

}  // namespace multibin
