#pragma once

// Normal distribution helpers used by the sample-size and weight code.

#include <span>
#include <vector>

namespace multibin {

double norm_cdf(double x);
double norm_quantile(double p);

/// P(X <= h, Y <= k) for standard bivariate normal with correlation r.
/// Genz's BVND Gauss-Legendre scheme; absolute error around 1e-15.
double bvn_cdf(double h, double k, double r);

/// P(Z_1 <= b_1, ..., Z_K <= b_K) for a standard multivariate normal with
/// correlation matrix `corr` (row-major K x K). K = 1 and 2 are exact
/// (to double precision); K > 2 uses randomized lattice QMC with a fixed seed.
double mvn_cdf(std::span<const double> b, std::span<const double> corr);

}  // namespace multibin
