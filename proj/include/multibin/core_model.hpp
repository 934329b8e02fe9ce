#pragma once

// Multivariate Bernoulli data model with a conjugate Dirichlet prior.
//
// Joint response patterns are indexed in descending binary order: for K
// outcomes, index 0 is "1...11", index 1 is "1...10", and index 2^K - 1 is
// "0...00". The first character of a pattern string is outcome 1. Every
// cell-indexed vector in the library (probabilities, counts, Dirichlet
// parameters, draws) uses this order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multibin/rng.hpp"

namespace multibin {

inline constexpr int kMaxOutcomes = 16;

/// Number of joint response patterns, 2^K.
std::size_t pattern_count(int outcomes);

/// Outcome count K for a cell vector of length Q; throws unless Q == 2^K, K >= 1.
int outcomes_for_cells(std::size_t cells);

/// True when pattern `q` has a success on outcome `k` (0-based).
inline bool pattern_has(std::size_t q, int outcomes, int k) {
  const std::size_t code = ((std::size_t{1} << outcomes) - 1) - q;
  return ((code >> (outcomes - 1 - k)) & 1U) != 0;
}

/// "10" style string for pattern `q`.
std::string pattern_string(std::size_t q, int outcomes);

/// Pattern index for a string of '0'/'1' characters; throws InvalidArgument.
std::size_t parse_pattern(std::string_view bits);

/// Pattern index of a subject's K responses.
std::size_t pattern_index(std::span<const bool> responses);

class CellProbabilities {
 public:
  explicit CellProbabilities(std::vector<double> probs);

  int outcomes() const { return outcomes_; }
  std::size_t size() const { return probs_.size(); }
  std::span<const double> values() const { return probs_; }
  double operator[](std::size_t q) const { return probs_[q]; }

 private:
  std::vector<double> probs_;
  int outcomes_;
};

class MarginalProbabilities {
 public:
  explicit MarginalProbabilities(std::vector<double> theta);

  int outcomes() const { return static_cast<int>(theta_.size()); }
  std::span<const double> values() const { return theta_; }
  double operator[](std::size_t k) const { return theta_[k]; }

 private:
  std::vector<double> theta_;
};

class JointCounts {
 public:
  explicit JointCounts(std::vector<std::int64_t> counts);
  static JointCounts zeros(int outcomes);

  int outcomes() const { return outcomes_; }
  std::size_t size() const { return counts_.size(); }
  std::span<const std::int64_t> values() const { return counts_; }
  std::int64_t operator[](std::size_t q) const { return counts_[q]; }
  std::int64_t total() const;

  void add(std::size_t q, std::int64_t n = 1);
  JointCounts& operator+=(const JointCounts& other);
  friend JointCounts operator+(JointCounts a, const JointCounts& b) { return a += b; }
  friend bool operator==(const JointCounts&, const JointCounts&) = default;

 private:
  std::vector<std::int64_t> counts_;
  int outcomes_;
};

class DirichletParams {
 public:
  explicit DirichletParams(std::vector<double> alpha);

  int outcomes() const { return outcomes_; }
  std::size_t size() const { return alpha_.size(); }
  std::span<const double> values() const { return alpha_; }
  double operator[](std::size_t q) const { return alpha_[q]; }
  double total() const;
  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

 private:
  std::vector<double> alpha_;
  int outcomes_;
};

/// Prior as prior sample size times prior mean cell probabilities.
struct PriorSpec {
  double n0;
  CellProbabilities phi0;
};

/// L x Q matrix of simplex points, row-major.
class SimplexDraws {
 public:
  SimplexDraws(std::size_t rows, std::size_t cells);

  std::size_t rows() const { return rows_; }
  std::size_t cells() const { return cells_; }
  std::span<const double> row(std::size_t l) const { return {data_.data() + l * cells_, cells_}; }
  std::span<double> row(std::size_t l) { return {data_.data() + l * cells_, cells_}; }

 private:
  std::size_t rows_;
  std::size_t cells_;
  std::vector<double> data_;
};

/// L x K matrix of treatment differences theta_E - theta_C, row-major.
class DeltaDraws {
 public:
  DeltaDraws(std::size_t rows, int outcomes);

  std::size_t rows() const { return rows_; }
  int outcomes() const { return outcomes_; }
  std::span<const double> row(std::size_t l) const {
    return {data_.data() + l * static_cast<std::size_t>(outcomes_), static_cast<std::size_t>(outcomes_)};
  }
  std::span<double> row(std::size_t l) {
    return {data_.data() + l * static_cast<std::size_t>(outcomes_), static_cast<std::size_t>(outcomes_)};
  }
  /// Column means.
  std::vector<double> mean() const;

 private:
  std::size_t rows_;
  int outcomes_;
  std::vector<double> data_;
};

/// Cell probabilities of a bivariate Bernoulli with margins theta and
/// correlation rho. Throws InfeasibleCorrelation when phi_11 leaves
/// (max(0, t1 + t2 - 1), min(t1, t2)).
CellProbabilities cell_probs_from_margins(const MarginalProbabilities& theta, double rho);

MarginalProbabilities margins_of(const CellProbabilities& phi);

/// Marginal success probabilities of an arbitrary cell vector (no validation).
void margins_into(std::span<const double> cells, int outcomes, std::span<double> theta);

/// Probability that outcomes k and l (0-based) are both successes.
double joint_success(std::span<const double> cells, int outcomes, int k, int l);

/// Pearson correlation between binary outcomes k and l (0-based).
double pairwise_correlation(const CellProbabilities& phi, int k, int l);

DirichletParams posterior_update(const DirichletParams& prior, const JointCounts& counts);

DirichletParams prior_from_spec(const PriorSpec& spec);

SimplexDraws sample_dirichlet(const DirichletParams& params, std::size_t draws, Rng& rng);

JointCounts sample_multinomial(const CellProbabilities& phi, std::int64_t n, Rng& rng);

/// Row-paired differences of the margins of two draw matrices.
DeltaDraws delta_draws(const SimplexDraws& draws_e, const SimplexDraws& draws_c);

/// Posterior delta draws straight from the two Dirichlet parameter vectors;
/// same distribution as delta_draws(sample_dirichlet(E), sample_dirichlet(C))
/// without materializing the simplex matrices.
DeltaDraws sample_delta(const DirichletParams& alpha_e, const DirichletParams& alpha_c,
                        std::size_t draws, Rng& rng);

/// L independent Gamma particles per cell that represent Dirichlet draws and
/// can absorb new observations in place: if G ~ Gamma(a) and H ~ Gamma(m)
/// then G + H ~ Gamma(a + m), so adding m subjects to cell q only needs one
/// Gamma(m) variate per particle. Each state is an exact Dirichlet sample.
/// Only the per-outcome sums and the total of each particle are kept, which
/// is all the margins need.
class DirichletParticles {
 public:
  DirichletParticles(const DirichletParams& params, std::size_t draws, Rng& rng);

  std::size_t draws() const { return draws_; }
  int outcomes() const { return outcomes_; }
  const DirichletParams& params() const { return params_; }

  /// Moves the particles from Dirichlet(alpha) to Dirichlet(alpha + increments).
  void absorb(const JointCounts& increments, Rng& rng);

  /// Margins of particle l written to theta (length K).
  void margins(std::size_t l, std::span<double> theta) const;

 private:
  void add(std::size_t q, const GammaSampler& sampler, Rng& rng);

  DirichletParams params_;
  std::size_t draws_;
  int outcomes_;
  std::vector<double> sums_;   // draws_ x K, Gamma mass with outcome k set
  std::vector<double> total_;  // draws_
};

/// Delta draws from the current state of two particle sets.
DeltaDraws delta_draws(const DirichletParticles& e, const DirichletParticles& c);
/// Same, reusing `out` (resized if needed).
void delta_draws_into(const DirichletParticles& e, const DirichletParticles& c, DeltaDraws& out);

}  // namespace multibin
