#include "multibin/sim_harness.hpp"

#include <cmath>
#include <limits>

#include "multibin/error.hpp"
#include "multibin/parallel.hpp"

namespace multibin {

namespace {

std::vector<DgmSpec> build_table() {
  struct Pattern {
    std::vector<double> te;
    std::vector<double> tc;
  };
  const std::vector<Pattern> patterns = {
      {{0.40, 0.40}, {0.60, 0.60}},  // 1 harmful
      {{0.50, 0.50}, {0.50, 0.50}},  // 2 null
      {{0.55, 0.55}, {0.45, 0.45}},  // 3
      {{0.60, 0.60}, {0.40, 0.40}},  // 4
      {{0.70, 0.70}, {0.30, 0.30}},  // 5
      {{0.70, 0.50}, {0.30, 0.50}},  // 6 one outcome null
      {{0.60, 0.30}, {0.40, 0.70}},  // 7 opposite directions
      {{0.62, 0.54}, {0.38, 0.46}},  // 8 unequal
  };
  const double rhos[] = {-0.3, 0.0, 0.3};
  std::vector<DgmSpec> out;
  for (std::size_t g = 0; g < patterns.size(); ++g) {
    for (int r = 0; r < 3; ++r) {
      out.push_back(make_dgm(std::to_string(g + 1) + "." + std::to_string(r + 1), patterns[g].te, patterns[g].tc,
                             rhos[r]));
    }
  }
  return out;
}

MarginalProbabilities nudged(const MarginalProbabilities& t, double by) {
  std::vector<double> v(t.values().begin(), t.values().end());
  for (double& x : v) x += by;
  return MarginalProbabilities(std::move(v));
}

ArmPriors informative(const CellProbabilities& e, const CellProbabilities& c) {
  constexpr double kN0 = 20.0;
  return {prior_from_spec({kN0, e}), prior_from_spec({kN0, c})};
}

}  // namespace

int DgmSpec::group() const { return std::stoi(id.substr(0, id.find('.'))); }

std::vector<double> DgmSpec::delta() const {
  std::vector<double> d(theta_e.values().size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = theta_e[k] - theta_c[k];
  return d;
}

DgmSpec make_dgm(std::string id, std::vector<double> theta_e, std::vector<double> theta_c, double rho) {
  MarginalProbabilities te(std::move(theta_e));
  MarginalProbabilities tc(std::move(theta_c));
  auto pe = cell_probs_from_margins(te, rho);
  auto pc = cell_probs_from_margins(tc, rho);
  return DgmSpec{std::move(id), std::move(te), std::move(tc), rho, std::move(pe), std::move(pc)};
}

const std::vector<DgmSpec>& dgm_table() {
  static const std::vector<DgmSpec> table = build_table();
  return table;
}

const DgmSpec& find_dgm(const std::string& id) {
  for (const auto& d : dgm_table()) {
    if (d.id == id) return d;
  }
  throw InvalidArgument("unknown DGM '" + id + "' (1.1 ... 8.3)");
}

int least_favorable_dgm(const DecisionRule& rule) { return rule.is_all() ? 6 : 2; }

DgmSpec shifted_dgm(const DgmSpec& dgm, double shift) {
  auto te = nudged(dgm.theta_e, shift / 2.0);
  auto tc = nudged(dgm.theta_c, -shift / 2.0);
  return make_dgm(dgm.id, {te.values().begin(), te.values().end()}, {tc.values().begin(), tc.values().end()},
                  dgm.rho);
}

DesignTarget design_target(const DgmSpec& dgm, double alpha, double beta) {
  DesignTarget t{alpha, beta, dgm.phi_e, dgm.phi_c};
  t.validate();
  return t;
}

ArmPriors reference_prior(int outcomes) {
  DirichletParams p(std::vector<double>(pattern_count(outcomes), 0.01));
  return {p, p};
}

ArmPriors jeffreys_prior(int outcomes) {
  DirichletParams p(std::vector<double>(pattern_count(outcomes), 0.5));
  return {p, p};
}

ArmPriors numbered_prior(int index, const DgmSpec& dgm) {
  switch (index) {
    case 1: {
      const CellProbabilities uniform({0.25, 0.25, 0.25, 0.25});
      auto p = prior_from_spec({1.0 / 25.0, uniform});
      return {p, p};
    }
    case 2: {
      const CellProbabilities uniform({0.25, 0.25, 0.25, 0.25});
      auto p = prior_from_spec({2.0, uniform});
      return {p, p};
    }
    case 3: return informative(dgm.phi_e, dgm.phi_c);
    case 4:
    case 5: {
      const double s = index == 4 ? -0.05 : 0.05;
      return informative(cell_probs_from_margins(nudged(dgm.theta_e, s), dgm.rho),
                         cell_probs_from_margins(nudged(dgm.theta_c, -s), dgm.rho));
    }
    case 6: return informative(dgm.phi_c, dgm.phi_e);
    default: throw InvalidArgument("prior index must be 1-6");
  }
}

SimulationReport simulate_condition(const DgmSpec& dgm, const DesignSpec& design, std::size_t reps, std::uint64_t seed,
                                    const std::string& condition, unsigned threads) {
  if (reps == 0) throw InvalidArgument("need at least one replication");
  design.validate();
  if (design.outcomes() != dgm.phi_e.outcomes()) throw DimensionMismatch("design and DGM differ in outcomes");

  struct Row {
    bool superior;
    long n;
    int analyses;
    std::vector<double> mean;
    std::vector<double> observed;
  };
  std::vector<Row> rows(reps);
  const std::uint64_t key = stable_hash(condition);
  parallel_for(reps, threads, [&](std::size_t i) {
    auto streams = ReplicationStreams::make(seed, key, i);
    TrialResult r;
    if (design.kind == DesignKind::Fixed) {
      const long n = design.schedule.front();
      const auto e = sample_multinomial(dgm.phi_e, n, streams.data);
      const auto c = sample_multinomial(dgm.phi_c, n, streams.data);
      r = run_fixed_trial(design, e, c, streams.posterior);
    } else {
      SimulatedSource source(dgm.phi_e, dgm.phi_c, streams.data);
      r = run_sequential_trial(design, source, streams.posterior);
    }
    rows[i] = Row{r.decision.superior, r.n_at_stop, r.analyses_performed, std::move(r.posterior_mean_delta),
                  std::move(r.observed_delta)};
  });

  const auto truth = dgm.delta();
  SimulationReport rep;
  rep.condition = condition;
  rep.reps = reps;
  rep.bias.assign(truth.size(), 0.0);
  rep.bias_observed.assign(truth.size(), 0.0);
  double n_sum = 0.0;
  double analyses = 0.0;
  for (const auto& row : rows) {
    if (row.superior) {
      ++rep.superior;
      n_sum += static_cast<double>(row.n);
    }
    analyses += row.analyses;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      rep.bias[k] += row.mean[k] - truth[k];
      rep.bias_observed[k] += row.observed[k] - truth[k];
    }
  }
  const double r = static_cast<double>(reps);
  for (auto& b : rep.bias) b /= r;
  for (auto& b : rep.bias_observed) b /= r;
  rep.rate = static_cast<double>(rep.superior) / r;
  rep.se = std::sqrt(rep.rate * (1.0 - rep.rate) / r);
  rep.mean_analyses = analyses / r;
  if (rep.superior > 0) rep.mean_n = n_sum / static_cast<double>(rep.superior);
  return rep;
}

std::vector<NamedRule> grid_rules() {
  return {
      {"single", DecisionRule::single(0), {}},
      {"any", DecisionRule::any(), {}},
      {"all", DecisionRule::all(), {}},
      {"ce", DecisionRule::compensatory({0.5, 0.5}), {}},
      {"cuu", DecisionRule::compensatory({0.76, 0.24}), {0.75, 0.25}},
      {"cuc", DecisionRule::compensatory({0.64, 0.36}), {0.62, 0.38}},
  };
}

std::vector<GridCell> paper_grid(double alpha, double beta) {
  std::vector<GridCell> cells;
  for (const auto& dgm : dgm_table()) {
    const auto truth = dgm.delta();
    for (const auto& [label, rule, sizing] : grid_rules()) {
      const bool null_cell = !superiority_indicator(rule, truth);
      long n = kNullCellSize;
      if (!null_cell) {
        const auto target = design_target(dgm, alpha, beta);
        n = sizing.empty() ? sample_size(rule, target) : sample_size_compensatory(target, sizing);
      }
      cells.push_back(GridCell{dgm.id, label, rule, n, null_cell});
    }
  }
  return cells;
}

DesignSpec fixed_design(const DecisionRule& rule, long n, double alpha, std::size_t draws,
                        const std::optional<ArmPriors>& priors) {
  const auto p = priors.value_or(reference_prior(2));
  DesignSpec d;
  d.kind = DesignKind::Fixed;
  d.schedule = {n};
  d.threshold = decision_threshold(rule, alpha);
  d.rule = rule;
  d.prior_e = p.e;
  d.prior_c = p.c;
  d.draws = draws;
  return d;
}

}  // namespace multibin
