#include "multibin/decision_rules.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "multibin/error.hpp"

namespace multibin {

namespace {

constexpr double kWeightTolerance = 1e-12;

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

}  // namespace

DecisionRule DecisionRule::single(int k) {
  if (k < 0) throw InvalidArgument("outcome index must be at least 1");
  return DecisionRule(rules::Single{k});
}

DecisionRule DecisionRule::any() { return DecisionRule(rules::Any{}); }
DecisionRule DecisionRule::all() { return DecisionRule(rules::All{}); }

DecisionRule DecisionRule::compensatory(std::vector<double> w) {
  if (w.empty()) throw InvalidArgument("compensatory weights are empty");
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("compensatory weights must lie in [0, 1]");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) throw InvalidArgument("compensatory weights must sum to 1");
  return DecisionRule(rules::Compensatory{std::move(w)});
}

DecisionRule DecisionRule::compensatory_equal(int outcomes) {
  if (outcomes < 1) throw InvalidArgument("outcome count must be positive");
  std::vector<double> w(static_cast<std::size_t>(outcomes), 1.0 / outcomes);
  // exact sum for odd K
  double rest = 1.0;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) rest -= w[k];
  w.back() = rest;
  return compensatory(std::move(w));
}

void DecisionRule::check_outcomes(int outcomes) const {
  std::visit(overloaded{
                 [&](const rules::Single& s) {
                   if (s.k >= outcomes) {
                     throw InvalidArgument("rule single" + std::to_string(s.k + 1) + " needs at least " +
                                           std::to_string(s.k + 1) + " outcomes");
                   }
                 },
                 [&](const rules::Compensatory& c) {
                   if (static_cast<int>(c.w.size()) != outcomes) {
                     throw InvalidArgument("expected " + std::to_string(outcomes) + " weights, got " +
                                           std::to_string(c.w.size()));
                   }
                 },
                 [](const auto&) {},
             },
             v_);
}

std::string DecisionRule::name() const {
  return std::visit(overloaded{
                        [](const rules::Single& s) { return "single" + std::to_string(s.k + 1); },
                        [](const rules::Any&) { return std::string("any"); },
                        [](const rules::All&) { return std::string("all"); },
                        [](const rules::Compensatory& c) {
                          bool equal = true;
                          for (double x : c.w) equal = equal && std::abs(x - 1.0 / c.w.size()) < 1e-12;
                          if (equal) return std::string("ce");
                          std::string out = "c(";
                          char buf[32];
                          for (std::size_t k = 0; k < c.w.size(); ++k) {
                            std::snprintf(buf, sizeof buf, "%s%.4g", k ? "," : "", c.w[k]);
                            out += buf;
                          }
                          return out + ")";
                        },
                    },
                    v_);
}

bool operator==(const DecisionRule& a, const DecisionRule& b) {
  if (a.v_.index() != b.v_.index()) return false;
  if (auto* s = std::get_if<rules::Single>(&a.v_)) return s->k == std::get<rules::Single>(b.v_).k;
  if (auto* c = std::get_if<rules::Compensatory>(&a.v_)) return c->w == std::get<rules::Compensatory>(b.v_).w;
  return true;
}

DecisionRule parse_rule(const std::string& text, int outcomes, const std::vector<double>& weights) {
  if (text == "any") return DecisionRule::any();
  if (text == "all") return DecisionRule::all();
  if (text == "ce") {
    if (!weights.empty()) throw InvalidArgument("rule 'ce' uses equal weights; use 'weighted' with --weights");
    return DecisionRule::compensatory_equal(outcomes);
  }
  if (text == "weighted" || text == "cu") {
    if (weights.empty()) throw InvalidArgument("rule '" + text + "' needs weights");
    auto rule = DecisionRule::compensatory(weights);
    rule.check_outcomes(outcomes);
    return rule;
  }
  if (text.rfind("single", 0) == 0) {
    const std::string idx = text.substr(6);
    int k = 1;
    if (!idx.empty()) {
      std::size_t used = 0;
      try {
        k = std::stoi(idx, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != idx.size() || k < 1) throw InvalidArgument("bad outcome index in rule '" + text + "'");
    }
    auto rule = DecisionRule::single(k - 1);
    rule.check_outcomes(outcomes);
    return rule;
  }
  throw InvalidArgument("unknown rule '" + text + "' (single[k], any, all, ce, weighted)");
}

bool superiority_indicator(const DecisionRule& rule, std::span<const double> delta) {
  return std::visit(overloaded{
                        [&](const rules::Single& s) { return delta[static_cast<std::size_t>(s.k)] > 0.0; },
                        [&](const rules::Any&) {
                          for (double d : delta) {
                            if (d > 0.0) return true;
                          }
                          return false;
                        },
                        [&](const rules::All&) {
                          for (double d : delta) {
                            if (!(d > 0.0)) return false;
                          }
                          return true;
                        },
                        [&](const rules::Compensatory& c) {
                          double sum = 0.0;
                          for (std::size_t k = 0; k < delta.size(); ++k) sum += c.w[k] * delta[k];
                          return sum > 0.0;
                        },
                    },
                    rule.variant());
}

double superiority_probability(const DecisionRule& rule, const DeltaDraws& draws) {
  if (draws.rows() == 0) throw EmptyDraws("no posterior draws");
  rule.check_outcomes(draws.outcomes());
  const double rows = static_cast<double>(draws.rows());
  if (rule.is_any()) {
    // largest per-outcome probability, not the union mass: the union has no
    // multiplicity control at 1 - alpha/2
    std::vector<std::size_t> hits(static_cast<std::size_t>(draws.outcomes()), 0);
    for (std::size_t l = 0; l < draws.rows(); ++l) {
      const auto row = draws.row(l);
      for (std::size_t k = 0; k < hits.size(); ++k) hits[k] += row[k] > 0.0;
    }
    return static_cast<double>(*std::max_element(hits.begin(), hits.end())) / rows;
  }
  std::size_t hits = 0;
  for (std::size_t l = 0; l < draws.rows(); ++l) hits += superiority_indicator(rule, draws.row(l));
  return static_cast<double>(hits) / rows;
}

double decision_threshold(const DecisionRule& rule, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  return rule.is_any() ? 1.0 - alpha / 2.0 : 1.0 - alpha;
}

Decision decide(double prob, double threshold) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidArgument("probability outside [0, 1]");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("threshold must lie in (0, 1)");
  return Decision{prob > threshold, prob, threshold};
}

}  // namespace multibin
