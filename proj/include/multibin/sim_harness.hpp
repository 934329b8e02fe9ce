#pragma once

// Replicated trial simulation over the 24 two-outcome data generating
// mechanisms (8 difference patterns x 3 correlations).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multibin/core_model.hpp"
#include "multibin/decision_rules.hpp"
#include "multibin/power_design.hpp"
#include "multibin/trial_engine.hpp"

namespace multibin {

struct DgmSpec {
  std::string id;  // "4.2": difference pattern 4, correlation level 2
  MarginalProbabilities theta_e;
  MarginalProbabilities theta_c;
  double rho;
  CellProbabilities phi_e;
  CellProbabilities phi_c;

  int group() const;
  std::vector<double> delta() const;
};

/// Builds a DGM from margins and a shared correlation.
DgmSpec make_dgm(std::string id, std::vector<double> theta_e, std::vector<double> theta_c, double rho);

const std::vector<DgmSpec>& dgm_table();
/// Throws InvalidArgument for an unknown id.
const DgmSpec& find_dgm(const std::string& id);

/// Null-boundary difference pattern used for Type I error: 6 for All, 2 otherwise.
int least_favorable_dgm(const DecisionRule& rule);

/// Same correlation, margins moved so the difference grows by `shift`
/// (theta_E + shift/2, theta_C - shift/2).
DgmSpec shifted_dgm(const DgmSpec& dgm, double shift);

DesignTarget design_target(const DgmSpec& dgm, double alpha = 0.05, double beta = 0.20);

struct ArmPriors {
  DirichletParams e;
  DirichletParams c;
};

/// alpha = 0.01 per cell in both arms.
ArmPriors reference_prior(int outcomes = 2);
/// n0 = 2 with uniform cells (0.5 per cell).
ArmPriors jeffreys_prior(int outcomes = 2);
/// Prior sets 1-6: 1 reference, 2 Jeffreys, 3 true cells, 4 difference
/// 0.10 smaller, 5 0.10 larger, 6 arms swapped; 3-6 use n0 = 20.
ArmPriors numbered_prior(int index, const DgmSpec& dgm);

struct SimulationReport {
  std::string condition;
  std::size_t reps = 0;
  std::size_t superior = 0;
  double rate = 0.0;
  std::optional<double> mean_n;    // over trials concluding superiority
  std::vector<double> bias;        // posterior mean delta at stop minus true delta
  std::vector<double> bias_observed;  // raw proportions at stop minus true delta
  double se = 0.0;                 // binomial standard error of rate
  double mean_analyses = 0.0;
};

/// reps independent trials of `design` with data drawn from `dgm`. Each
/// replication's streams depend only on (seed, condition label, index), so the
/// report is identical for any thread count.
SimulationReport simulate_condition(const DgmSpec& dgm, const DesignSpec& design, std::size_t reps, std::uint64_t seed,
                                    const std::string& condition, unsigned threads = 0);

/// The six rule columns: single, any, all, ce, cuu (0.76, 0.24), cuc (0.64, 0.36).
/// The two unequal-weight columns are sized with (0.75, 0.25) and
/// (0.62, 0.38); those are the weights that give the published grid sizes.
struct NamedRule {
  std::string label;
  DecisionRule rule;
  std::vector<double> sizing_weights;  // empty: size with the rule itself
};
std::vector<NamedRule> grid_rules();

struct GridCell {
  std::string dgm_id;
  std::string rule_label;
  DecisionRule rule;
  long n;          // per arm
  bool null_cell;  // true delta outside the region: evaluated at n = 1000
};

inline constexpr long kNullCellSize = 1000;

/// Every DGM x rule cell with its fixed-design sample size.
std::vector<GridCell> paper_grid(double alpha = 0.05, double beta = 0.20);

/// Fixed-design spec for a cell (reference prior unless given).
DesignSpec fixed_design(const DecisionRule& rule, long n, double alpha, std::size_t draws,
                        const std::optional<ArmPriors>& priors = std::nullopt);

}  // namespace multibin
