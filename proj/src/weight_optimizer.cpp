#include "multibin/weight_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "multibin/error.hpp"
#include "multibin/normal.hpp"

namespace multibin {

namespace {

void check_moments(const DeltaMoments& m) {
  if (m.mu.empty()) throw InvalidArgument("moments are empty");
  if (m.sigma.size() != m.mu.size() * m.mu.size()) throw DimensionMismatch("covariance does not match mean length");
}

double quad_form(std::span<const double> w, const DeltaMoments& m) {
  const std::size_t n = m.mu.size();
  double v = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) v += w[k] * w[l] * m.cov(k, l);
  }
  return v;
}

// Standardized mean w'mu / sqrt(w' Sigma w); -inf where the variance vanishes.
double ratio(std::span<const double> w, const DeltaMoments& m) {
  const double v = quad_form(w, m);
  if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
  double num = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) num += w[k] * m.mu[k];
  return num / std::sqrt(v);
}

// Gaussian elimination with partial pivoting; empty result if singular.
std::vector<double> solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    }
    if (std::abs(a[piv * n + c]) < 1e-300) return {};
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[c * n + j], a[piv * n + j]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      for (std::size_t j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}

// Euclidean projection onto the unit simplex.
void project_simplex(std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  for (double& x : v) x = std::max(0.0, x - tau);
}

std::vector<double> search_two(const DeltaMoments& m) {
  auto f = [&](double a) {
    const double w[2] = {a, 1.0 - a};
    return ratio(w, m);
  };
  constexpr int kGrid = 200;
  int best = 0;
  double best_val = f(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = f(static_cast<double>(i) / kGrid);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  // ratio is quasi-concave along the segment, so refine around the best cell
  double lo = std::max(0.0, (best - 1.0) / kGrid);
  double hi = std::min(1.0, (best + 1.0) / kGrid);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  double a = (lo + hi) / 2.0;
  if (f(a) < best_val) a = static_cast<double>(best) / kGrid;
  return {a, 1.0 - a};
}

std::vector<double> search_general(const DeltaMoments& m) {
  const std::size_t n = m.mu.size();
  Rng rng(0x77656967687473ULL);
  std::vector<double> best;
  double best_val = -std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& w) {
    const double v = ratio(w, m);
    if (v > best_val) {
      best_val = v;
      best = w;
    }
  };
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> e(n, 0.0);
    e[k] = 1.0;
    consider(e);
  }
  constexpr int kRestarts = 32;
  for (int r = 0; r < kRestarts; ++r) {
    std::vector<double> w(n);
    for (auto& x : w) x = rng.exponential();
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= s;
    double step = 0.1;
    double cur = ratio(w, m);
    for (int it = 0; it < 2000 && step > 1e-12; ++it) {
      const double v = quad_form(w, m);
      if (!(v > 0.0)) break;
      const double sd = std::sqrt(v);
      double num = 0.0;
      for (std::size_t k = 0; k < n; ++k) num += w[k] * m.mu[k];
      std::vector<double> grad(n);
      for (std::size_t k = 0; k < n; ++k) {
        double sw = 0.0;
        for (std::size_t l = 0; l < n; ++l) sw += m.cov(k, l) * w[l];
        grad[k] = m.mu[k] / sd - num * sw / (sd * v);
      }
      std::vector<double> next(n);
      for (std::size_t k = 0; k < n; ++k) next[k] = w[k] + step * grad[k];
      project_simplex(next);
      const double nv = ratio(next, m);
      if (nv > cur) {
        w = std::move(next);
        cur = nv;
        step *= 1.2;
      } else {
        step /= 2.0;
      }
    }
    consider(w);
  }
  return best;
}

}  // namespace

DeltaMoments DeltaMoments::bivariate(double mu1, double mu2, double var1, double var2, double cov12) {
  return DeltaMoments{{mu1, mu2}, {var1, cov12, cov12, var2}};
}

DeltaMoments estimate_moments(const JointCounts& counts_e, const JointCounts& counts_c, std::size_t draws, Rng& rng,
                              double prior_cell) {
  if (counts_e.total() == 0 || counts_c.total() == 0) throw EmptyCounts("hypothetical dataset has no subjects");
  if (counts_e.size() != counts_c.size()) throw DimensionMismatch("arms have different pattern counts");
  if (draws < 2) throw InvalidArgument("moment estimation needs at least 2 draws");
  const DirichletParams prior(std::vector<double>(counts_e.size(), prior_cell));
  const auto d = sample_delta(posterior_update(prior, counts_e), posterior_update(prior, counts_c), draws, rng);
  const std::size_t n = static_cast<std::size_t>(d.outcomes());
  DeltaMoments m{d.mean(), std::vector<double>(n * n, 0.0)};
  for (std::size_t l = 0; l < d.rows(); ++l) {
    const auto r = d.row(l);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m.sigma[i * n + j] += (r[i] - m.mu[i]) * (r[j] - m.mu[j]);
    }
  }
  for (double& s : m.sigma) s /= static_cast<double>(d.rows() - 1);
  return m;
}

DeltaMoments analytic_moments(const DirichletParams& alpha_e, const DirichletParams& alpha_c) {
  if (alpha_e.size() != alpha_c.size()) throw DimensionMismatch("arms have different pattern counts");
  const int kk = alpha_e.outcomes();
  const auto n = static_cast<std::size_t>(kk);
  DeltaMoments m{std::vector<double>(n, 0.0), std::vector<double>(n * n, 0.0)};
  for (const auto* alpha : {&alpha_e, &alpha_c}) {
    const double sign = alpha == &alpha_e ? 1.0 : -1.0;
    const double a = alpha->total();
    std::vector<double> ak(n, 0.0);
    for (std::size_t q = 0; q < alpha->size(); ++q) {
      for (int k = 0; k < kk; ++k) {
        if (pattern_has(q, kk, k)) ak[static_cast<std::size_t>(k)] += (*alpha)[q];
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      m.mu[k] += sign * ak[k] / a;
      for (std::size_t l = 0; l < n; ++l) {
        double akl = 0.0;
        for (std::size_t q = 0; q < alpha->size(); ++q) {
          if (pattern_has(q, kk, static_cast<int>(k)) && pattern_has(q, kk, static_cast<int>(l))) akl += (*alpha)[q];
        }
        m.sigma[k * n + l] += (akl / a - ak[k] * ak[l] / (a * a)) / (a + 1.0);
      }
    }
  }
  return m;
}

DeltaMoments analytic_moments(const JointCounts& counts_e, const JointCounts& counts_c, double prior_cell) {
  if (counts_e.total() == 0 || counts_c.total() == 0) throw EmptyCounts("hypothetical dataset has no subjects");
  const DirichletParams prior(std::vector<double>(counts_e.size(), prior_cell));
  return analytic_moments(posterior_update(prior, counts_e), posterior_update(prior, counts_c));
}

JointCounts expected_counts(const CellProbabilities& phi, std::int64_t n) {
  if (n < 0) throw InvalidArgument("sample size must be nonnegative");
  std::vector<std::int64_t> c(phi.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::int64_t used = 0;
  for (std::size_t q = 0; q < phi.size(); ++q) {
    const double x = phi[q] * static_cast<double>(n);
    c[q] = static_cast<std::int64_t>(std::floor(x));
    used += c[q];
    rem.emplace_back(x - std::floor(x), q);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < n; ++i, ++used) c[rem[i % rem.size()].second] += 1;
  return JointCounts(std::move(c));
}

double compensatory_evidence(std::span<const double> w, const DeltaMoments& m) {
  check_moments(m);
  if (w.size() != m.mu.size()) throw DimensionMismatch("weight count does not match moments");
  const double v = quad_form(w, m);
  if (!(v > 0.0)) throw DegenerateVariance("weighted variance is not positive");
  double num = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) num += w[k] * m.mu[k];
  return 1.0 - norm_cdf(-num / std::sqrt(v));
}

std::vector<double> optimize_weights(const DeltaMoments& m) {
  check_moments(m);
  if (std::none_of(m.mu.begin(), m.mu.end(), [](double x) { return x > 0.0; })) {
    throw NoPositiveDirection("no outcome has a positive expected difference");
  }
  const std::size_t n = m.mu.size();
  std::vector<double> w;
  auto x = solve(m.sigma, m.mu);
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  if (!x.empty() && sum > 0.0 && std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0; })) {
    w = x;
    for (double& v : w) v /= sum;
  } else if (n == 1) {
    w = {1.0};
  } else if (n == 2) {
    w = search_two(m);
  } else {
    w = search_general(m);
  }
  if (!(ratio(w, m) > 0.0)) throw NoPositiveDirection("no weighting gives evidence above 0.5");
  return w;
}

}  // namespace multibin
