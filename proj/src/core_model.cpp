#include "multibin/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "multibin/error.hpp"

namespace multibin {

namespace {

constexpr double kSimplexTolerance = 1e-12;
constexpr double kBoundaryTolerance = 1e-12;

void normalize_row(std::span<double> row) {
  double sum = 0.0;
  for (double g : row) sum += g;
  for (double& g : row) g /= sum;
}

class DirichletRowSampler {
 public:
  explicit DirichletRowSampler(std::span<const double> alpha) : alpha_(alpha) {
    small_ = std::any_of(alpha.begin(), alpha.end(), [](double a) { return a < 1.0; });
    samplers_.reserve(alpha.size());
    for (double a : alpha) samplers_.emplace_back(a);
  }

  // One Dirichlet draw into `row`. Tiny shapes go through log space so the
  // row never degenerates to all zeros.
  void operator()(std::span<double> row, Rng& rng) const {
    if (!small_) {
      for (std::size_t q = 0; q < samplers_.size(); ++q) row[q] = samplers_[q](rng);
      normalize_row(row);
      return;
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < alpha_.size(); ++q) {
      row[q] = rng.log_gamma_variate(alpha_[q]);
      top = std::max(top, row[q]);
    }
    for (double& g : row) g = std::exp(g - top);
    normalize_row(row);
  }

 private:
  std::span<const double> alpha_;
  std::vector<GammaSampler> samplers_;
  bool small_ = false;
};

}  // namespace

std::size_t pattern_count(int outcomes) {
  if (outcomes < 1 || outcomes > kMaxOutcomes) {
    throw InvalidArgument("outcome count must be in [1, " + std::to_string(kMaxOutcomes) + "]");
  }
  return std::size_t{1} << outcomes;
}

int outcomes_for_cells(std::size_t cells) {
  for (int k = 1; k <= kMaxOutcomes; ++k) {
    if ((std::size_t{1} << k) == cells) return k;
  }
  throw InvalidArgument("cell vector length " + std::to_string(cells) + " is not 2^K with K >= 1");
}

std::string pattern_string(std::size_t q, int outcomes) {
  std::string bits(static_cast<std::size_t>(outcomes), '0');
  for (int k = 0; k < outcomes; ++k) {
    if (pattern_has(q, outcomes, k)) bits[static_cast<std::size_t>(k)] = '1';
  }
  return bits;
}

std::size_t parse_pattern(std::string_view bits) {
  if (bits.empty() || bits.size() > static_cast<std::size_t>(kMaxOutcomes)) {
    throw InvalidArgument("pattern must have between 1 and " + std::to_string(kMaxOutcomes) + " bits");
  }
  std::size_t code = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw InvalidArgument("pattern '" + std::string(bits) + "' is not a bit string");
    code = (code << 1) | static_cast<std::size_t>(c == '1');
  }
  return pattern_count(static_cast<int>(bits.size())) - 1 - code;
}

std::size_t pattern_index(std::span<const bool> responses) {
  const int outcomes = static_cast<int>(responses.size());
  std::size_t code = 0;
  for (bool r : responses) code = (code << 1) | static_cast<std::size_t>(r);
  return pattern_count(outcomes) - 1 - code;
}

// --- value types -----------------------------------------------------------

CellProbabilities::CellProbabilities(std::vector<double> probs)
    : probs_(std::move(probs)), outcomes_(outcomes_for_cells(probs_.size())) {
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("cell probability outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw InvalidArgument("cell probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

MarginalProbabilities::MarginalProbabilities(std::vector<double> theta) : theta_(std::move(theta)) {
  if (theta_.empty()) throw InvalidArgument("marginal probabilities are empty");
  for (double t : theta_) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("marginal probability outside [0, 1]");
  }
}

JointCounts::JointCounts(std::vector<std::int64_t> counts)
    : counts_(std::move(counts)), outcomes_(outcomes_for_cells(counts_.size())) {
  for (auto c : counts_) {
    if (c < 0) throw InvalidArgument("joint counts must be nonnegative");
  }
}

JointCounts JointCounts::zeros(int outcomes) {
  return JointCounts(std::vector<std::int64_t>(pattern_count(outcomes), 0));
}

std::int64_t JointCounts::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

void JointCounts::add(std::size_t q, std::int64_t n) {
  if (q >= counts_.size()) throw InvalidArgument("pattern index out of range");
  if (counts_[q] + n < 0) throw InvalidArgument("joint counts must be nonnegative");
  counts_[q] += n;
}

JointCounts& JointCounts::operator+=(const JointCounts& other) {
  if (other.size() != size()) throw DimensionMismatch("joint count vectors differ in length");
  for (std::size_t q = 0; q < counts_.size(); ++q) counts_[q] += other.counts_[q];
  return *this;
}

DirichletParams::DirichletParams(std::vector<double> alpha)
    : alpha_(std::move(alpha)), outcomes_(outcomes_for_cells(alpha_.size())) {
  for (double a : alpha_) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidParams("Dirichlet parameters must be positive and finite");
  }
}

double DirichletParams::total() const { return std::accumulate(alpha_.begin(), alpha_.end(), 0.0); }

SimplexDraws::SimplexDraws(std::size_t rows, std::size_t cells)
    : rows_(rows), cells_(cells), data_(rows * cells, 0.0) {}

DeltaDraws::DeltaDraws(std::size_t rows, int outcomes)
    : rows_(rows), outcomes_(outcomes), data_(rows * static_cast<std::size_t>(outcomes), 0.0) {}

std::vector<double> DeltaDraws::mean() const {
  std::vector<double> m(static_cast<std::size_t>(outcomes_), 0.0);
  if (rows_ == 0) return m;
  for (std::size_t l = 0; l < rows_; ++l) {
    auto r = row(l);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += r[k];
  }
  for (double& v : m) v /= static_cast<double>(rows_);
  return m;
}

// --- transforms ------------------------------------------------------------

CellProbabilities cell_probs_from_margins(const MarginalProbabilities& theta, double rho) {
  if (theta.outcomes() != 2) {
    throw InvalidArgument("construction from margins and a correlation is defined for two outcomes");
  }
  const double t1 = theta[0];
  const double t2 = theta[1];
  if (!(t1 > 0.0 && t1 < 1.0 && t2 > 0.0 && t2 < 1.0)) {
    throw InvalidArgument("margins must lie strictly inside (0, 1)");
  }
  if (!(rho >= -1.0 && rho <= 1.0)) throw InvalidArgument("correlation must lie in [-1, 1]");

  const double p11 = rho * std::sqrt(t1 * (1.0 - t1) * t2 * (1.0 - t2)) + t1 * t2;
  const double lower = std::max(0.0, t1 + t2 - 1.0);
  const double upper = std::min(t1, t2);
  if (!(p11 > lower + kBoundaryTolerance && p11 < upper - kBoundaryTolerance)) {
    throw InfeasibleCorrelation("phi_11 = " + std::to_string(p11) + " outside (" + std::to_string(lower) + ", " +
                                std::to_string(upper) + ")");
  }
  return CellProbabilities({p11, t1 - p11, t2 - p11, 1.0 - t1 - t2 + p11});
}

void margins_into(std::span<const double> cells, int outcomes, std::span<double> theta) {
  std::fill(theta.begin(), theta.end(), 0.0);
  for (std::size_t q = 0; q < cells.size(); ++q) {
    for (int k = 0; k < outcomes; ++k) {
      if (pattern_has(q, outcomes, k)) theta[static_cast<std::size_t>(k)] += cells[q];
    }
  }
}

MarginalProbabilities margins_of(const CellProbabilities& phi) {
  std::vector<double> theta(static_cast<std::size_t>(phi.outcomes()));
  margins_into(phi.values(), phi.outcomes(), theta);
  // Summation can overshoot 1 by an ulp.
  for (double& t : theta) t = std::clamp(t, 0.0, 1.0);
  return MarginalProbabilities(std::move(theta));
}

double joint_success(std::span<const double> cells, int outcomes, int k, int l) {
  double sum = 0.0;
  for (std::size_t q = 0; q < cells.size(); ++q) {
    if (pattern_has(q, outcomes, k) && pattern_has(q, outcomes, l)) sum += cells[q];
  }
  return sum;
}

double pairwise_correlation(const CellProbabilities& phi, int k, int l) {
  const int outcomes = phi.outcomes();
  if (k == l || k < 0 || l < 0 || k >= outcomes || l >= outcomes) {
    throw InvalidArgument("correlation needs two distinct outcome indices");
  }
  const auto theta = margins_of(phi);
  const double tk = theta[static_cast<std::size_t>(k)];
  const double tl = theta[static_cast<std::size_t>(l)];
  if (tk <= 0.0 || tk >= 1.0 || tl <= 0.0 || tl >= 1.0) {
    throw DegenerateMargin("marginal probability at 0 or 1");
  }
  const double tkl = joint_success(phi.values(), outcomes, k, l);
  const double r = (tkl - tk * tl) / std::sqrt(tk * (1.0 - tk) * tl * (1.0 - tl));
  return std::clamp(r, -1.0, 1.0);
}

// --- conjugate update ------------------------------------------------------

DirichletParams posterior_update(const DirichletParams& prior, const JointCounts& counts) {
  if (prior.size() != counts.size()) throw DimensionMismatch("prior and counts differ in length");
  std::vector<double> alpha(prior.size());
  for (std::size_t q = 0; q < alpha.size(); ++q) alpha[q] = prior[q] + static_cast<double>(counts[q]);
  return DirichletParams(std::move(alpha));
}

DirichletParams prior_from_spec(const PriorSpec& spec) {
  if (!(spec.n0 > 0.0)) throw InvalidParams("prior sample size must be positive");
  std::vector<double> alpha(spec.phi0.size());
  for (std::size_t q = 0; q < alpha.size(); ++q) alpha[q] = spec.n0 * spec.phi0[q];
  return DirichletParams(std::move(alpha));
}

// --- sampling --------------------------------------------------------------

SimplexDraws sample_dirichlet(const DirichletParams& params, std::size_t draws, Rng& rng) {
  if (draws == 0) throw InvalidArgument("draw count must be at least 1");
  SimplexDraws out(draws, params.size());
  const DirichletRowSampler sampler(params.values());
  for (std::size_t l = 0; l < draws; ++l) sampler(out.row(l), rng);
  return out;
}

JointCounts sample_multinomial(const CellProbabilities& phi, std::int64_t n, Rng& rng) {
  if (n < 0) throw InvalidArgument("sample size must be nonnegative");
  std::vector<double> cumulative(phi.size());
  std::partial_sum(phi.values().begin(), phi.values().end(), cumulative.begin());
  auto counts = JointCounts::zeros(phi.outcomes());
  for (std::int64_t i = 0; i < n; ++i) counts.add(rng.categorical(cumulative));
  return counts;
}

DeltaDraws delta_draws(const SimplexDraws& draws_e, const SimplexDraws& draws_c) {
  if (draws_e.rows() != draws_c.rows() || draws_e.cells() != draws_c.cells()) {
    throw DimensionMismatch("draw matrices differ in shape");
  }
  const int outcomes = outcomes_for_cells(draws_e.cells());
  DeltaDraws out(draws_e.rows(), outcomes);
  std::vector<double> te(static_cast<std::size_t>(outcomes));
  std::vector<double> tc(static_cast<std::size_t>(outcomes));
  for (std::size_t l = 0; l < draws_e.rows(); ++l) {
    margins_into(draws_e.row(l), outcomes, te);
    margins_into(draws_c.row(l), outcomes, tc);
    auto d = out.row(l);
    for (std::size_t k = 0; k < te.size(); ++k) d[k] = te[k] - tc[k];
  }
  return out;
}

DeltaDraws sample_delta(const DirichletParams& alpha_e, const DirichletParams& alpha_c, std::size_t draws,
                        Rng& rng) {
  if (alpha_e.size() != alpha_c.size()) throw DimensionMismatch("arms differ in cell count");
  if (draws == 0) throw InvalidArgument("draw count must be at least 1");
  const int outcomes = alpha_e.outcomes();
  const std::size_t cells = alpha_e.size();
  const DirichletRowSampler sample_e(alpha_e.values());
  const DirichletRowSampler sample_c(alpha_c.values());

  DeltaDraws out(draws, outcomes);
  std::vector<double> row(cells);
  std::vector<double> te(static_cast<std::size_t>(outcomes));
  std::vector<double> tc(static_cast<std::size_t>(outcomes));
  for (std::size_t l = 0; l < draws; ++l) {
    sample_e(row, rng);
    margins_into(row, outcomes, te);
    sample_c(row, rng);
    margins_into(row, outcomes, tc);
    auto d = out.row(l);
    for (std::size_t k = 0; k < te.size(); ++k) d[k] = te[k] - tc[k];
  }
  return out;
}

DirichletParticles::DirichletParticles(const DirichletParams& params, std::size_t draws, Rng& rng)
    : params_(params),
      draws_(draws),
      outcomes_(params.outcomes()),
      sums_(draws * static_cast<std::size_t>(params.outcomes()), 0.0),
      total_(draws, 0.0) {
  if (draws == 0) throw InvalidArgument("draw count must be at least 1");
  const std::size_t cells = params.size();
  const auto kk = static_cast<std::size_t>(outcomes_);
  std::vector<GammaSampler> samplers;
  for (double a : params.values()) samplers.emplace_back(a);
  std::vector<double> g(cells);
  for (std::size_t l = 0; l < draws_; ++l) {
    double sum = 0.0;
    // With every shape tiny all cells can underflow together (probability
    // below 1e-12 per row); such a row is redrawn.
    do {
      sum = 0.0;
      for (std::size_t q = 0; q < cells; ++q) {
        g[q] = samplers[q](rng);
        sum += g[q];
      }
    } while (sum == 0.0);
    total_[l] = sum;
    margins_into(g, outcomes_, std::span<double>(sums_.data() + l * kk, kk));
  }
}

void DirichletParticles::add(std::size_t q, const GammaSampler& sampler, Rng& rng) {
  const auto kk = static_cast<std::size_t>(outcomes_);
  std::size_t hit[kMaxOutcomes];
  std::size_t nhit = 0;
  for (int k = 0; k < outcomes_; ++k) {
    if (pattern_has(q, outcomes_, k)) hit[nhit++] = static_cast<std::size_t>(k);
  }
  double* sums = sums_.data();
  for (std::size_t l = 0; l < draws_; ++l) {
    const double h = sampler(rng);
    total_[l] += h;
    for (std::size_t i = 0; i < nhit; ++i) sums[l * kk + hit[i]] += h;
  }
}

void DirichletParticles::absorb(const JointCounts& increments, Rng& rng) {
  if (increments.size() != params_.size()) throw DimensionMismatch("increments differ in cell count");
  for (std::size_t q = 0; q < increments.size(); ++q) {
    const auto m = increments[q];
    if (m == 0) continue;
    add(q, GammaSampler(static_cast<double>(m)), rng);
  }
  params_ = posterior_update(params_, increments);
}

void DirichletParticles::margins(std::size_t l, std::span<double> theta) const {
  const auto kk = static_cast<std::size_t>(outcomes_);
  const double inv = 1.0 / total_[l];
  for (std::size_t k = 0; k < kk; ++k) theta[k] = sums_[l * kk + k] * inv;
}

void delta_draws_into(const DirichletParticles& e, const DirichletParticles& c, DeltaDraws& out) {
  if (e.draws() != c.draws() || e.params().size() != c.params().size()) {
    throw DimensionMismatch("particle sets differ in shape");
  }
  const int outcomes = e.params().outcomes();
  if (out.rows() != e.draws() || out.outcomes() != outcomes) out = DeltaDraws(e.draws(), outcomes);
  double te[kMaxOutcomes];
  double tc[kMaxOutcomes];
  const auto kk = static_cast<std::size_t>(outcomes);
  for (std::size_t l = 0; l < e.draws(); ++l) {
    e.margins(l, {te, kk});
    c.margins(l, {tc, kk});
    auto d = out.row(l);
    for (std::size_t k = 0; k < kk; ++k) d[k] = te[k] - tc[k];
  }
}

DeltaDraws delta_draws(const DirichletParticles& e, const DirichletParticles& c) {
  DeltaDraws out(e.draws(), e.params().outcomes());
  delta_draws_into(e, c, out);
  return out;
}

}  // namespace multibin
