#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "multibin/core_model.hpp"

namespace multibin {

namespace rules {
struct Single {
  int k;  // 0-based outcome index
};
struct Any {};
struct All {};
struct Compensatory {
  std::vector<double> w;
};
}  // namespace rules

/// Superiority region. All regions use strict "> 0" boundaries.
class DecisionRule {
 public:
  using Variant = std::variant<rules::Single, rules::Any, rules::All, rules::Compensatory>;

  static DecisionRule single(int k);
  static DecisionRule any();
  static DecisionRule all();
  /// Throws InvalidArgument unless each w_k is in [0, 1] and they sum to 1.
  static DecisionRule compensatory(std::vector<double> w);
  /// Equal weights 1/K.
  static DecisionRule compensatory_equal(int outcomes);

  const Variant& variant() const { return v_; }
  bool is_any() const { return std::holds_alternative<rules::Any>(v_); }
  bool is_all() const { return std::holds_alternative<rules::All>(v_); }
  bool is_single() const { return std::holds_alternative<rules::Single>(v_); }
  bool is_compensatory() const { return std::holds_alternative<rules::Compensatory>(v_); }

  /// Throws InvalidArgument if the rule cannot be applied to K outcomes.
  void check_outcomes(int outcomes) const;

  /// "single1", "any", "all", "ce" (equal weights) or "c(0.76,0.24)".
  std::string name() const;

  friend bool operator==(const DecisionRule& a, const DecisionRule& b);

 private:
  explicit DecisionRule(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Parses "single" / "single2" / "any" / "all" / "ce" / "weighted". `weights`
/// is used for "weighted" (and optional for "ce" with K given by `outcomes`).
DecisionRule parse_rule(const std::string& text, int outcomes, const std::vector<double>& weights = {});

bool superiority_indicator(const DecisionRule& rule, std::span<const double> delta);

/// Share of draws that fall in the superiority region; for Any, the largest
/// per-outcome share. Throws EmptyDraws.
double superiority_probability(const DecisionRule& rule, const DeltaDraws& draws);

/// 1 - alpha/2 for Any, 1 - alpha otherwise.
double decision_threshold(const DecisionRule& rule, double alpha);

struct Decision {
  bool superior = false;
  double posterior_probability = 0.0;
  double threshold = 0.0;
};

Decision decide(double prob, double threshold);

}  // namespace multibin
