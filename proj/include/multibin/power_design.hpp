#pragma once

// Frequentist-approximation sample sizes per arm, equal allocation.

#include <vector>

#include "multibin/core_model.hpp"
#include "multibin/decision_rules.hpp"

namespace multibin {

/// alpha is one-sided; power target is 1 - beta. phi_e / phi_c are the
/// anticipated cell probabilities per arm.
struct DesignTarget {
  double alpha;
  double beta;
  CellProbabilities phi_e;
  CellProbabilities phi_c;

  void validate() const;
  int outcomes() const { return phi_e.outcomes(); }
  std::vector<double> delta() const;
};

/// Variance of sum_k w_k Y_k for a single subject with cell probabilities phi.
double weighted_variance(const CellProbabilities& phi, std::span<const double> w);

/// Two-proportion z-test size for outcome k (0-based).
/// ZeroEffect when delta_k == 0, InfeasibleRule when delta_k < 0.
long sample_size_single(const DesignTarget& target, int k);

long sample_size_compensatory(const DesignTarget& target, std::span<const double> w);

enum class VarianceConvention {
  Default,     // pooled null variance for All, unpooled for Any
  Unpooled,    // alternative-hypothesis variance in the critical value
  PooledNull,  // 2 p(1 - p) with p the average of the arm margins
};

struct MvnOptions {
  VarianceConvention variance = VarianceConvention::Default;
  long max_n = 1000000;
};

/// Approximate power of the Any / All rule at n per arm.
double mvn_power(const DecisionRule& rule, const DesignTarget& target, long n, const MvnOptions& options = {});

/// Smallest n >= 2 whose approximate power reaches 1 - beta.
/// InfeasibleRule unless All has every delta_k > 0 / Any has some delta_k > 0.
long sample_size_mvn(const DecisionRule& rule, const DesignTarget& target, const MvnOptions& options = {});

/// Dispatches on the rule kind.
long sample_size(const DecisionRule& rule, const DesignTarget& target);

}  // namespace multibin
