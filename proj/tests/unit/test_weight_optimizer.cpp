#include <doctest.h>

#include <cmath>

#include "multibin/error.hpp"
#include "multibin/normal.hpp"
#include "multibin/sim_harness.hpp"
#include "multibin/weight_optimizer.hpp"

using namespace multibin;

namespace {

// Example counts in descending-binary order (11, 10, 01, 00).
JointCounts example_e() { return JointCounts({262, 358, 278, 102}); }
JointCounts example_c() { return JointCounts({102, 278, 358, 262}); }

}  // namespace

TEST_SUITE("weight_optimizer") {
  TEST_CASE("Monte Carlo moments from the example counts") {
    Rng rng(10);
    const auto m = estimate_moments(example_e(), example_c(), 100000, rng);
    CHECK(m.mu[0] == doctest::Approx(0.24).epsilon(0.02));
    CHECK(m.mu[1] == doctest::Approx(0.08).epsilon(0.05));
    CHECK(m.cov(0, 1) < 0.0);
    CHECK(m.cov(0, 1) == doctest::Approx(m.cov(1, 0)));
    // analytic: aggregate Dirichlet means (620.02 / 1000.04 and 380.02 / 1000.04)
    const auto a = analytic_moments(example_e(), example_c());
    CHECK(a.mu[0] == doctest::Approx(620.02 / 1000.04 - 380.02 / 1000.04).epsilon(1e-12));
    CHECK(std::abs(m.mu[0] - a.mu[0]) < 4 * std::sqrt(a.cov(0, 0) / 100000));
    CHECK(std::abs(m.cov(0, 0) - a.cov(0, 0)) < 0.03 * a.cov(0, 0));
    CHECK(std::abs(m.cov(0, 1) - a.cov(0, 1)) < 0.1 * std::abs(a.cov(0, 1)));
  }

  TEST_CASE("symmetric data give zero mean") {
    Rng rng(4);
    const JointCounts s({30, 20, 25, 25});
    const auto m = estimate_moments(s, s, 100000, rng);
    const auto a = analytic_moments(s, s);
    CHECK(std::abs(m.mu[0]) < 3 * std::sqrt(a.cov(0, 0) / 100000));
    CHECK(std::abs(m.mu[1]) < 3 * std::sqrt(a.cov(1, 1) / 100000));
    CHECK(a.mu[0] == 0.0);
    CHECK_THROWS_AS(estimate_moments(JointCounts::zeros(2), s, 10, rng), EmptyCounts);
    CHECK_THROWS_AS(analytic_moments(s, JointCounts::zeros(2)), EmptyCounts);
  }

  TEST_CASE("evidence") {
    const auto zero = DeltaMoments::bivariate(0, 0, 0.005, 0.005, -0.001);
    const double half[] = {0.5, 0.5};
    const double skew[] = {0.9, 0.1};
    CHECK(compensatory_evidence(half, zero) == doctest::Approx(0.5));
    CHECK(compensatory_evidence(skew, zero) == doctest::Approx(0.5));
    const auto m = DeltaMoments::bivariate(0.24, 0.08, 0.005, 0.005, -0.001);
    const double oracle = 1.0 - norm_cdf(-0.16 / std::sqrt(0.0020));
    CHECK(compensatory_evidence(half, m) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(compensatory_evidence(half, m) == doctest::Approx(0.99983).epsilon(1e-4));
    const auto bigger = DeltaMoments::bivariate(0.30, 0.08, 0.005, 0.005, -0.001);
    CHECK(compensatory_evidence(half, bigger) > compensatory_evidence(half, m));
    const auto flat = DeltaMoments::bivariate(0.1, 0.1, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(compensatory_evidence(half, flat), DegenerateVariance);
  }

  TEST_CASE("evidence is scale invariant in w") {
    const auto m = DeltaMoments::bivariate(0.2, -0.05, 0.004, 0.006, 0.001);
    const double w[] = {0.7, 0.3};
    const double w3[] = {2.1, 0.9};
    CHECK(compensatory_evidence(w, m) == doctest::Approx(compensatory_evidence(w3, m)).epsilon(1e-14));
  }

  TEST_CASE("optimal weights for the published examples") {
    const auto w10 = optimize_weights(analytic_moments(example_e(), example_c()));
    CHECK(w10[0] == doctest::Approx(0.64).epsilon(0.01 / 0.64));
    CHECK(w10[1] == doctest::Approx(0.36).epsilon(0.01 / 0.36));
    const auto w = optimize_weights(DeltaMoments::bivariate(0.30, 0.10, 0.01, 0.01, 0.0));
    CHECK(std::abs(w[0] - 0.75) < 1e-6);
    CHECK(std::abs(w[1] - 0.25) < 1e-6);
    const auto& d = find_dgm("8.2");
    const auto w82 = optimize_weights(
        analytic_moments(expected_counts(d.phi_e, 1000), expected_counts(d.phi_c, 1000)));
    CHECK(std::abs(w82[0] - 0.76) < 0.02);
    CHECK(std::abs(w82[1] - 0.24) < 0.02);
    // rounded moments give a different answer
    const auto rounded = optimize_weights(DeltaMoments::bivariate(0.24, 0.08, 0.005, 0.005, -0.001));
    CHECK(rounded[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  }

  TEST_CASE("expected counts keep the total") {
    const auto& d = find_dgm("8.1");
    for (std::int64_t n : {1, 7, 38, 1000, 1001}) {
      const auto c = expected_counts(d.phi_e, n);
      CHECK(c.total() == n);
      for (std::size_t q = 0; q < 4; ++q) CHECK(std::abs(static_cast<double>(c[q]) - n * d.phi_e[q]) < 1.0);
    }
  }

  TEST_CASE("grid certificate and proportional weights") {
    Rng rng(77);
    for (int rep = 0; rep < 200; ++rep) {
      const double mu1 = 0.3 * rng.uniform() - 0.05;
      const double mu2 = 0.3 * rng.uniform() - 0.05;
      if (mu1 <= 0 && mu2 <= 0) continue;
      const double v1 = 0.001 + 0.01 * rng.uniform();
      const double v2 = 0.001 + 0.01 * rng.uniform();
      const double r = 1.8 * rng.uniform() - 0.9;
      const auto m = DeltaMoments::bivariate(mu1, mu2, v1, v2, r * std::sqrt(v1 * v2));
      std::vector<double> w;
      try {
        w = optimize_weights(m);
      } catch (const NoPositiveDirection&) {
        continue;
      }
      const double best = compensatory_evidence(w, m);
      for (int g = 0; g <= 200; ++g) {
        const double wg[] = {g / 200.0, 1.0 - g / 200.0};
        CHECK(compensatory_evidence(wg, m) <= best + 1e-9);
      }
      CHECK(w[0] >= 0.0);
      CHECK(w[1] >= 0.0);
      CHECK(w[0] + w[1] == doctest::Approx(1.0));
      // invariant under joint rescaling of mu and Sigma
      const auto scaled = DeltaMoments::bivariate(3 * mu1, 3 * mu2, 3 * v1, 3 * v2, 3 * r * std::sqrt(v1 * v2));
      const auto ws = optimize_weights(scaled);
      CHECK(std::abs(ws[0] - w[0]) < 1e-9);
    }
    // uncorrelated, equal variances: w = mu / sum(mu)
    for (int rep = 0; rep < 50; ++rep) {
      const double mu1 = 0.01 + 0.3 * rng.uniform(), mu2 = 0.01 + 0.3 * rng.uniform();
      const auto w = optimize_weights(DeltaMoments::bivariate(mu1, mu2, 0.004, 0.004, 0.0));
      CHECK(std::abs(w[0] - mu1 / (mu1 + mu2)) < 1e-9);
    }
  }

  TEST_CASE("boundary and failure cases") {
    // strong positive correlation with one negative effect pushes the solution to a vertex
    const auto m = DeltaMoments::bivariate(0.2, -0.1, 0.01, 0.01, 0.009);
    const auto w = optimize_weights(m);
    const double best = compensatory_evidence(w, m);
    for (int g = 0; g <= 200; ++g) {
      const double wg[] = {g / 200.0, 1.0 - g / 200.0};
      CHECK(compensatory_evidence(wg, m) <= best + 1e-9);
    }
    CHECK_THROWS_AS(optimize_weights(DeltaMoments::bivariate(-0.1, -0.2, 0.01, 0.01, 0.0)), NoPositiveDirection);
  }

  TEST_CASE("K = 3 projected search") {
    DeltaMoments m;
    m.mu = {0.2, 0.1, 0.05};
    m.sigma = {0.01, 0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.0, 0.01};
    const auto w = optimize_weights(m);
    CHECK(w[0] == doctest::Approx(0.2 / 0.35).epsilon(1e-6));
    CHECK(w[2] == doctest::Approx(0.05 / 0.35).epsilon(1e-6));
    // a negative direction forces a zero weight; compare with a coarse grid
    m.mu = {0.2, -0.05, 0.1};
    m.sigma = {0.01, 0.004, 0.0, 0.004, 0.01, 0.0, 0.0, 0.0, 0.01};
    const auto v = optimize_weights(m);
    const double best = compensatory_evidence(v, m);
    for (int a = 0; a <= 50; ++a) {
      for (int b = 0; a + b <= 50; ++b) {
        const double wg[] = {a / 50.0, b / 50.0, (50 - a - b) / 50.0};
        CHECK(compensatory_evidence(wg, m) <= best + 1e-7);
      }
    }
  }
}
