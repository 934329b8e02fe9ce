#pragma once

// Efficiency weights for the compensatory rule under a normal approximation
// of the posterior of delta.

#include <vector>

#include "multibin/core_model.hpp"

namespace multibin {

struct DeltaMoments {
  std::vector<double> mu;     // K
  std::vector<double> sigma;  // K x K covariance, row-major

  int outcomes() const { return static_cast<int>(mu.size()); }
  double cov(std::size_t k, std::size_t l) const { return sigma[k * mu.size() + l]; }
  /// From means, variances and a single K = 2 covariance.
  static DeltaMoments bivariate(double mu1, double mu2, double var1, double var2, double cov12);
};

inline constexpr double kReferencePriorCell = 0.01;

/// Monte Carlo moments of delta from the posteriors of two hypothetical
/// datasets, each arm with prior alpha = 0.01 per cell. Throws EmptyCounts.
DeltaMoments estimate_moments(const JointCounts& counts_e, const JointCounts& counts_c, std::size_t draws, Rng& rng,
                              double prior_cell = kReferencePriorCell);

/// Exact posterior moments of delta for the same two Dirichlet posteriors.
DeltaMoments analytic_moments(const DirichletParams& alpha_e, const DirichletParams& alpha_c);
DeltaMoments analytic_moments(const JointCounts& counts_e, const JointCounts& counts_c,
                              double prior_cell = kReferencePriorCell);

/// n * phi rounded to integers that still sum to n (largest remainder).
JointCounts expected_counts(const CellProbabilities& phi, std::int64_t n);

/// 1 - Phi(-w'mu / sqrt(w' Sigma w)). Throws DegenerateVariance.
double compensatory_evidence(std::span<const double> w, const DeltaMoments& m);

/// Simplex weights maximizing compensatory_evidence. Throws NoPositiveDirection.
std::vector<double> optimize_weights(const DeltaMoments& m);

}  // namespace multibin
