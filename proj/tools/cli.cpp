#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "multibin/decision_rules.hpp"
#include "multibin/error.hpp"
#include "multibin/io.hpp"
#include "multibin/power_design.hpp"
#include "multibin/sim_harness.hpp"
#include "multibin/trial_engine.hpp"
#include "multibin/weight_optimizer.hpp"

namespace multibin::cli {

namespace {

using nlohmann::json;

// Bad input noticed after flag parsing: unreadable files, unknown rules...
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

// --config file: top-level keys are global flags, an object named after a
// subcommand holds that subcommand's flags. Arrays feed multi-value flags.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static void flatten(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    if (!j.is_object()) throw CLI::ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto inner = parents;
        inner.push_back(key);
        flatten(value, inner, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v, key));
      } else {
        item.inputs.push_back(scalar(value, key));
      }
      items.push_back(std::move(item));
    }
  }

  static std::string scalar(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config key '" + key + "' must be a string, number, boolean or array");
  }
};

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw UsageError("cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }
  bool to_file() const { return file_.is_open(); }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

void write_json_doc(std::ostream& os, const json& j) { os << j.dump(2) << "\n"; }

// Grid labels (cuu / cuc carry their own sizing weights) or anything parse_rule takes.
NamedRule resolve_rule(const std::string& text, int outcomes, const std::vector<double>& weights) {
  if (outcomes == 2 && weights.empty()) {
    for (auto& r : grid_rules()) {
      if (r.label == text) return r;
    }
  }
  auto rule = as_usage([&] { return parse_rule(text, outcomes, weights); });
  return {text == "weighted" || text == "cu" ? rule.name() : text, rule, {}};
}

ArmPriors resolve_prior(const std::string& text, int outcomes, const DgmSpec* dgm) {
  if (text == "ref" || text == "reference") return reference_prior(outcomes);
  if (text == "jeffreys") return jeffreys_prior(outcomes);
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '6') {
    if (dgm == nullptr) throw UsageError("numbered priors need a DGM (use ref, jeffreys or a prior file)");
    return as_usage([&] { return numbered_prior(text[0] - '0', *dgm); });
  }
  auto p = as_usage([&] { return read_prior_file(text); });
  if (p.e.outcomes() != outcomes || p.c.outcomes() != outcomes) {
    throw UsageError("prior file '" + text + "' has the wrong number of outcomes");
  }
  return p;
}

// Name used in report rows and seed keys.
std::string prior_label(const std::string& text) {
  if (text == "reference") return "ref";
  return text;
}

const DgmSpec& resolve_dgm(const std::string& id) {
  return as_usage([&]() -> const DgmSpec& { return find_dgm(id); });
}

// ---------------------------------------------------------------- decide

struct DecideArgs {
  std::string counts;
  std::vector<std::string> rules{"ce"};
  std::vector<double> weights;
  double alpha = 0.05;
  std::string prior = "ref";
  std::size_t draws = kFixedDraws;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
};

void cmd_decide(const DecideArgs& a, std::ostream& out) {
  const auto counts = as_usage([&] { return read_counts_file(a.counts); });
  const int k = counts.e.outcomes();
  std::vector<NamedRule> rules;
  for (const auto& r : a.rules) rules.push_back(resolve_rule(r, k, a.weights));
  const auto priors = resolve_prior(a.prior, k, nullptr);
  if (a.draws == 0) throw UsageError("--draws must be positive");
  Output sink(a.out, out);

  Rng rng(a.seed);
  const auto draws = sample_delta(posterior_update(priors.e, counts.e), posterior_update(priors.c, counts.c), a.draws, rng);
  const auto mean = draws.mean();

  json results = json::array();
  std::ostringstream csv;
  csv << "rule,probability,threshold,superior\n";
  std::ostringstream summary;
  for (const auto& r : rules) {
    const double p = superiority_probability(r.rule, draws);
    const auto d = decide(p, decision_threshold(r.rule, a.alpha));
    results.push_back({{"rule", r.label},
                       {"probability", d.posterior_probability},
                       {"threshold", d.threshold},
                       {"superior", d.superior},
                       {"posterior_mean_delta", mean},
                       {"n_e", counts.e.total()},
                       {"n_c", counts.c.total()},
                       {"draws", a.draws},
                       {"seed", a.seed}});
    csv << r.label << ',' << fmt(p, 3) << ',' << fmt(d.threshold, 3) << ',' << (d.superior ? "true" : "false")
        << "\n";
    summary << r.label << ": P(superior) = " << fmt(p, 3) << ", threshold " << fmt(d.threshold, 3) << " -> "
            << (d.superior ? "superior" : "not superior") << "\n";
  }
  if (a.format == "csv") {
    sink.stream() << csv.str();
  } else {
    write_json_doc(sink.stream(), results.size() == 1 ? results[0] : results);
  }
  if (sink.to_file()) out << summary.str();
}

// ------------------------------------------------------------ samplesize

struct TargetArgs {
  std::string dgm;
  std::vector<double> theta_e;
  std::vector<double> theta_c;
  double rho = 0.0;
  double shift = 0.0;
  double alpha = 0.05;
  double beta = 0.20;
};

struct SampleSizeArgs {
  TargetArgs target;
  std::vector<std::string> rules{"ce"};
  std::vector<double> weights;
  std::vector<double> sizing_weights;
  bool paper_tables = false;
  std::string out;
  std::string format = "csv";
};

DgmSpec target_dgm(const TargetArgs& t) {
  if (!t.dgm.empty()) {
    if (!t.theta_e.empty() || !t.theta_c.empty()) throw UsageError("give either --dgm or --theta-e/--theta-c");
    return resolve_dgm(t.dgm);
  }
  if (t.theta_e.empty() || t.theta_c.empty()) throw UsageError("need --dgm or both --theta-e and --theta-c");
  return as_usage([&] { return make_dgm("custom", t.theta_e, t.theta_c, t.rho); });
}

// Per-arm n for a rule at the DGM's difference plus `shift`; nullopt when the
// shifted difference gives the rule nothing to detect.
std::optional<long> planned_n(const DgmSpec& dgm, const NamedRule& r, const TargetArgs& t, std::ostream& err) {
  try {
    const auto planned = t.shift == 0.0 ? dgm : shifted_dgm(dgm, t.shift);
    const auto target = design_target(planned, t.alpha, t.beta);
    if (!r.sizing_weights.empty()) return sample_size_compensatory(target, r.sizing_weights);
    return sample_size(r.rule, target);
  } catch (const ZeroEffect& e) {
    err << "warning: " << dgm.id << "/" << r.label << " skipped: " << e.what() << "\n";
  } catch (const InfeasibleRule& e) {
    err << "warning: " << dgm.id << "/" << r.label << " skipped: " << e.what() << "\n";
  } catch (const InfeasibleCorrelation& e) {
    err << "warning: " << dgm.id << "/" << r.label << " skipped: " << e.what() << "\n";
  } catch (const InvalidArgument& e) {
    err << "warning: " << dgm.id << "/" << r.label << " skipped: " << e.what() << "\n";
  }
  return std::nullopt;
}

void cmd_samplesize(const SampleSizeArgs& a, std::ostream& out, std::ostream& err) {
  struct Row {
    std::string dgm;
    std::string rule;
    std::optional<long> n;
  };
  std::vector<Row> rows;
  if (a.paper_tables) {
    if (!a.target.dgm.empty() || !a.target.theta_e.empty()) throw UsageError("--paper-tables takes no DGM");
    for (const auto& dgm : dgm_table()) {
      for (const auto& r : grid_rules()) {
        if (!superiority_indicator(r.rule, dgm.delta())) continue;
        rows.push_back({dgm.id, r.label, planned_n(dgm, r, a.target, err)});
      }
    }
  } else {
    const auto dgm = target_dgm(a.target);
    for (const auto& text : a.rules) {
      auto r = resolve_rule(text, dgm.theta_e.outcomes(), a.weights);
      if (!a.sizing_weights.empty()) {
        as_usage([&] { return DecisionRule::compensatory(a.sizing_weights); });
        r.sizing_weights = a.sizing_weights;
      }
      const auto planned = a.target.shift == 0.0 ? dgm : as_usage([&] { return shifted_dgm(dgm, a.target.shift); });
      const auto target = as_usage([&] { return design_target(planned, a.target.alpha, a.target.beta); });
      const long n = r.sizing_weights.empty() ? sample_size(r.rule, target)
                                              : sample_size_compensatory(target, r.sizing_weights);
      rows.push_back({dgm.id, r.label, n});
    }
  }
  Output sink(a.out, out);
  if (a.format == "json") {
    json j = json::array();
    for (const auto& r : rows) {
      j.push_back({{"dgm", r.dgm}, {"rule", r.rule}, {"n", r.n ? json(*r.n) : json(nullptr)}});
    }
    write_json_doc(sink.stream(), j);
  } else {
    sink.stream() << "dgm,rule,n\n";
    for (const auto& r : rows) sink.stream() << r.dgm << ',' << r.rule << ',' << (r.n ? std::to_string(*r.n) : "") << "\n";
  }
}

// --------------------------------------------------------------- weights

struct WeightsArgs {
  std::string counts;
  std::string dgm;
  long n = 1000;
  std::string method = "analytic";
  std::size_t draws = kFixedDraws;
  std::optional<std::uint64_t> seed;
  double prior_cell = kReferencePriorCell;
  std::string out;
  std::string format = "csv";
};

void cmd_weights(const WeightsArgs& a, std::ostream& out) {
  if (a.counts.empty() == a.dgm.empty()) throw UsageError("give exactly one of --counts or --dgm");
  if (a.method == "mc" && !a.seed) throw UsageError("--method mc needs --seed");
  if (!(a.prior_cell > 0.0)) throw UsageError("--prior-cell must be positive");
  ArmCounts counts{JointCounts::zeros(2), JointCounts::zeros(2)};
  if (!a.counts.empty()) {
    counts = as_usage([&] { return read_counts_file(a.counts); });
  } else {
    const auto& dgm = resolve_dgm(a.dgm);
    if (a.n < 1) throw UsageError("--n must be positive");
    counts = {expected_counts(dgm.phi_e, a.n), expected_counts(dgm.phi_c, a.n)};
  }
  Output sink(a.out, out);

  DeltaMoments m;
  if (a.method == "mc") {
    Rng rng(*a.seed);
    m = estimate_moments(counts.e, counts.c, a.draws, rng, a.prior_cell);
  } else {
    m = analytic_moments(counts.e, counts.c, a.prior_cell);
  }
  const auto w = optimize_weights(m);
  const double evidence = compensatory_evidence(w, m);
  if (a.format == "json") {
    write_json_doc(sink.stream(), {{"weights", w},
                                   {"evidence", evidence},
                                   {"mu", m.mu},
                                   {"sigma", m.sigma},
                                   {"method", a.method},
                                   {"n_e", counts.e.total()},
                                   {"n_c", counts.c.total()}});
  } else {
    auto& os = sink.stream();
    for (std::size_t k = 0; k < w.size(); ++k) os << "w" << k + 1 << ',';
    os << "evidence\n";
    for (double x : w) os << fmt(x, 3) << ',';
    os << fmt(evidence, 3) << "\n";
  }
}

// -------------------------------------------------------------- simulate

struct DesignArgs {
  std::string design = "fixed";
  std::optional<long> n;
  int looks = 3;
  std::optional<double> threshold;
  std::optional<std::size_t> draws;
  std::string prior = "ref";
};

struct SimulateArgs {
  TargetArgs target;
  std::vector<std::string> dgms;
  std::vector<std::string> rules{"ce"};
  std::vector<double> weights;
  DesignArgs design;
  bool paper_tables = false;
  std::size_t reps = 5000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
};

// Constant group-sequential threshold for three looks at one-sided 0.05, and
// the calibrated threshold for the default 136-look adaptive schedule.
constexpr double kGroupSequentialThreshold = 0.98;
constexpr double kAdaptiveThreshold = 0.9968;

DesignSpec build_design(const DesignArgs& d, DesignKind kind, const DecisionRule& rule, long n_fd, double alpha,
                        const ArmPriors& priors) {
  DesignSpec s;
  s.kind = kind;
  s.rule = rule;
  s.prior_e = priors.e;
  s.prior_c = priors.c;
  switch (kind) {
    case DesignKind::Fixed:
      s.schedule = {n_fd};
      s.threshold = d.threshold.value_or(decision_threshold(rule, alpha));
      s.draws = d.draws.value_or(kFixedDraws);
      break;
    case DesignKind::GroupSequential:
      s.schedule = as_usage([&] { return make_schedule(n_fd, equal_ratios(d.looks)); });
      s.threshold = d.threshold.value_or(kGroupSequentialThreshold);
      s.draws = d.draws.value_or(kSequentialDraws);
      break;
    case DesignKind::Adaptive:
      s.schedule = make_schedule(AdaptiveSchedule{});
      s.threshold = d.threshold.value_or(kAdaptiveThreshold);
      s.draws = d.draws.value_or(kSequentialDraws);
      break;
  }
  as_usage([&] {
    s.validate();
    return 0;
  });
  return s;
}

void cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const auto kind = as_usage([&] { return parse_design_kind(a.design.design); });
  if (a.reps == 0) throw UsageError("--reps must be positive");
  if (a.design.looks < 1) throw UsageError("--looks must be positive");

  struct Cell {
    const DgmSpec* dgm;
    NamedRule rule;
    long n;
  };
  std::vector<Cell> cells;
  if (a.paper_tables) {
    if (!a.dgms.empty()) throw UsageError("--paper-tables runs every DGM; drop --dgm");
    for (const auto& c : paper_grid(a.target.alpha, a.target.beta)) {
      for (auto& r : grid_rules()) {
        if (r.label == c.rule_label) cells.push_back({&find_dgm(c.dgm_id), r, c.n});
      }
    }
  } else {
    if (a.dgms.empty()) throw UsageError("need --dgm (or --paper-tables)");
    for (const auto& id : a.dgms) {
      const DgmSpec& dgm = resolve_dgm(id);
      for (const auto& text : a.rules) {
        auto r = resolve_rule(text, dgm.theta_e.outcomes(), a.weights);
        long n = kNullCellSize;
        if (a.design.n) {
          n = *a.design.n;
        } else if (superiority_indicator(r.rule, dgm.delta())) {
          const auto planned = planned_n(dgm, r, a.target, err);
          if (!planned) continue;
          n = *planned;
        }
        cells.push_back({&dgm, r, n});
      }
    }
  }

  std::vector<ReportRow> rows;
  std::vector<std::pair<DesignSpec, std::string>> specs;
  for (const auto& c : cells) {
    const auto priors = resolve_prior(a.design.prior, c.dgm->theta_e.outcomes(), c.dgm);
    auto spec = build_design(a.design, kind, c.rule.rule, c.n, a.target.alpha, priors);
    const long n = kind == DesignKind::Adaptive ? spec.schedule.back() : c.n;
    const std::string label = c.dgm->id + "/" + c.rule.label + "/" + to_string(kind) + "/" +
                              prior_label(a.design.prior) + "/n" + std::to_string(n);
    specs.emplace_back(std::move(spec), label);
    rows.push_back({c.dgm->id, c.rule.label, to_string(kind), prior_label(a.design.prior), n, {}});
  }
  Output sink(a.out, out);

  for (std::size_t i = 0; i < cells.size(); ++i) {
    rows[i].report = simulate_condition(*cells[i].dgm, specs[i].first, a.reps, a.seed, specs[i].second, a.threads);
  }
  if (a.format == "json") {
    write_json(sink.stream(), rows);
  } else {
    write_csv(sink.stream(), rows);
  }
}

// ------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string dgm;
  std::string rule = "ce";
  std::vector<double> weights;
  DesignArgs design;
  double alpha = 0.05;
  std::size_t reps = 5000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
};

void cmd_calibrate(CalibrateArgs a, std::ostream& out) {
  a.design.threshold = 0.5;  // placeholder, never used for stopping
  const auto kind = as_usage([&] { return parse_design_kind(a.design.design); });
  if (a.reps == 0) throw UsageError("--reps must be positive");
  if (a.design.looks < 1) throw UsageError("--looks must be positive");
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must be in (0, 1)");
  const auto rule = resolve_rule(a.rule, 2, a.weights);
  const std::string id = a.dgm.empty() ? std::to_string(least_favorable_dgm(rule.rule)) + ".1" : a.dgm;
  const DgmSpec& dgm = resolve_dgm(id);
  if (kind != DesignKind::Adaptive && !a.design.n) throw UsageError("--n is required for fixed and gs designs");
  const auto priors = resolve_prior(a.design.prior, dgm.theta_e.outcomes(), &dgm);
  const auto spec = build_design(a.design, kind, rule.rule, a.design.n.value_or(0), a.alpha, priors);
  Output sink(a.out, out);

  const auto r = calibrate_threshold(dgm.phi_e, dgm.phi_c, spec, a.alpha, a.reps, a.seed, a.threads);
  if (a.format == "json") {
    write_json_doc(sink.stream(), {{"dgm", dgm.id},
                                   {"rule", rule.label},
                                   {"design", to_string(kind)},
                                   {"looks", spec.schedule.size()},
                                   {"alpha", a.alpha},
                                   {"reps", a.reps},
                                   {"seed", a.seed},
                                   {"threshold", r.threshold},
                                   {"type_one_rate", r.type_one_rate}});
  } else {
    sink.stream() << "dgm,rule,design,looks,reps,threshold,type_one_rate\n"
                  << dgm.id << ',' << rule.label << ',' << to_string(kind) << ',' << spec.schedule.size() << ','
                  << a.reps << ',' << fmt(r.threshold, 4) << ',' << fmt(r.type_one_rate, 3) << "\n";
  }
}

// ----------------------------------------------------------------- flags

void add_output(CLI::App* app, std::string& path, std::string& format) {
  app->add_option("--out", path, "Write the report here instead of stdout");
  app->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

void add_target(CLI::App* app, TargetArgs& t, bool with_dgm) {
  if (with_dgm) {
    app->add_option("--dgm", t.dgm, "DGM id such as 4.2");
    app->add_option("--theta-e", t.theta_e, "Experimental margins, comma separated")->delimiter(',');
    app->add_option("--theta-c", t.theta_c, "Control margins, comma separated")->delimiter(',');
    app->add_option("--rho", t.rho, "Within-arm correlation for --theta-e/--theta-c")->capture_default_str();
  }
  app->add_option("--shift", t.shift, "Planned difference minus true difference, per outcome")->capture_default_str();
  app->add_option("--alpha", t.alpha, "One-sided Type I error")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app->add_option("--beta", t.beta, "Type II error")->check(CLI::Range(0.0, 1.0))->capture_default_str();
}

void add_design(CLI::App* app, DesignArgs& d) {
  app->add_option("--design", d.design, "fixed, gs or adaptive")
      ->check(CLI::IsMember({"fixed", "gs", "adaptive"}))
      ->capture_default_str();
  app->add_option("--n", d.n, "Per-arm (maximum) sample size");
  app->add_option("--looks", d.looks, "Analyses for the gs design")->capture_default_str();
  app->add_option("--threshold", d.threshold, "Posterior probability cut-off");
  app->add_option("--draws", d.draws, "Posterior draws per analysis");
  app->add_option("--prior", d.prior, "ref, jeffreys, 1-6 or a JSON prior file")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian decision rules for trials with two or more binary outcomes", "multibin"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with flag values; command-line flags win");
  app.require_subcommand(1);

  DecideArgs decide_args;
  auto* decide = app.add_subcommand("decide", "Posterior probability of superiority for observed counts");
  decide->add_option("--counts", decide_args.counts, "Counts file (arm,pattern,count or arm,bits)")->required();
  decide->add_option("--rule", decide_args.rules, "Rule(s): single[k], any, all, ce, cuu, cuc, weighted")->delimiter(',')
      ->capture_default_str();
  decide->add_option("--weights", decide_args.weights, "Weights for --rule weighted")->delimiter(',');
  decide->add_option("--alpha", decide_args.alpha, "One-sided Type I error")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  decide->add_option("--prior", decide_args.prior, "ref, jeffreys or a JSON prior file")->capture_default_str();
  decide->add_option("--draws", decide_args.draws, "Posterior draws")->capture_default_str();
  decide->add_option("--seed", decide_args.seed, "Random seed")->required();
  decide_args.format = "json";
  add_output(decide, decide_args.out, decide_args.format);

  SampleSizeArgs ss_args;
  auto* samplesize = app.add_subcommand("samplesize", "Per-arm sample size for 1 - beta power");
  add_target(samplesize, ss_args.target, true);
  samplesize->add_option("--rule", ss_args.rules, "Rule(s)")->delimiter(',')->capture_default_str();
  samplesize->add_option("--weights", ss_args.weights, "Weights for --rule weighted")->delimiter(',');
  samplesize->add_option("--sizing-weights", ss_args.sizing_weights, "Size a compensatory rule with these weights")
      ->delimiter(',');
  samplesize->add_flag("--paper-tables", ss_args.paper_tables, "Every DGM x rule cell with a positive effect");
  add_output(samplesize, ss_args.out, ss_args.format);

  WeightsArgs w_args;
  auto* weights = app.add_subcommand("weights", "Compensatory weights from hypothetical data");
  weights->add_option("--counts", w_args.counts, "Counts file");
  weights->add_option("--dgm", w_args.dgm, "Use expected counts of this DGM");
  weights->add_option("--n", w_args.n, "Subjects per arm with --dgm")->capture_default_str();
  weights->add_option("--method", w_args.method, "analytic or mc")
      ->check(CLI::IsMember({"analytic", "mc"}))
      ->capture_default_str();
  weights->add_option("--draws", w_args.draws, "Draws for --method mc")->capture_default_str();
  weights->add_option("--seed", w_args.seed, "Random seed (--method mc)");
  weights->add_option("--prior-cell", w_args.prior_cell, "Dirichlet prior per cell")->capture_default_str();
  add_output(weights, w_args.out, w_args.format);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Replicated trials per DGM x rule condition");
  add_target(simulate, sim_args.target, false);
  simulate->add_option("--dgm", sim_args.dgms, "DGM id(s)")->delimiter(',');
  simulate->add_option("--rule", sim_args.rules, "Rule(s)")->delimiter(',')->capture_default_str();
  simulate->add_option("--weights", sim_args.weights, "Weights for --rule weighted")->delimiter(',');
  add_design(simulate, sim_args.design);
  simulate->add_flag("--paper-tables", sim_args.paper_tables, "Full 24 x 6 grid at the planned sizes");
  simulate->add_option("--reps", sim_args.reps, "Replications per condition")->capture_default_str();
  simulate->add_option("--seed", sim_args.seed, "Master seed")->required();
  simulate->add_option("--threads", sim_args.threads, "Worker threads (0: all cores)")->capture_default_str();
  add_output(simulate, sim_args.out, sim_args.format);

  CalibrateArgs cal_args;
  cal_args.design.design = "adaptive";
  auto* calibrate = app.add_subcommand("calibrate", "Threshold giving Type I error alpha over all looks");
  calibrate->add_option("--dgm", cal_args.dgm, "Null DGM (default: least favorable group, correlation level 1)");
  calibrate->add_option("--rule", cal_args.rule, "Rule")->capture_default_str();
  calibrate->add_option("--weights", cal_args.weights, "Weights for --rule weighted")->delimiter(',');
  add_design(calibrate, cal_args.design);
  calibrate->add_option("--alpha", cal_args.alpha, "Target Type I error")->capture_default_str();
  calibrate->add_option("--reps", cal_args.reps, "Replications")->capture_default_str();
  calibrate->add_option("--seed", cal_args.seed, "Master seed")->required();
  calibrate->add_option("--threads", cal_args.threads, "Worker threads (0: all cores)")->capture_default_str();
  add_output(calibrate, cal_args.out, cal_args.format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsageError;
  }

  try {
    if (*decide) cmd_decide(decide_args, out);
    if (*samplesize) cmd_samplesize(ss_args, out, err);
    if (*weights) cmd_weights(w_args, out);
    if (*simulate) cmd_simulate(sim_args, out, err);
    if (*calibrate) cmd_calibrate(cal_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace multibin::cli
