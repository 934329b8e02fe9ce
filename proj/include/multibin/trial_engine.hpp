#pragma once

// Fixed, group-sequential and adaptive trial execution.

#include <cstdint>
#include <deque>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "multibin/core_model.hpp"
#include "multibin/decision_rules.hpp"

namespace multibin {

enum class DesignKind { Fixed, GroupSequential, Adaptive };

std::string to_string(DesignKind kind);
DesignKind parse_design_kind(const std::string& text);  // fixed | gs | adaptive

inline constexpr std::size_t kFixedDraws = 100000;
inline constexpr std::size_t kSequentialDraws = 10000;

struct DesignSpec {
  DesignKind kind = DesignKind::Fixed;
  std::vector<long> schedule;  // per-arm sample size at each analysis
  double threshold = 0.95;
  DecisionRule rule = DecisionRule::compensatory_equal(2);
  DirichletParams prior_e = DirichletParams({0.01, 0.01, 0.01, 0.01});
  DirichletParams prior_c = DirichletParams({0.01, 0.01, 0.01, 0.01});
  std::size_t draws = kFixedDraws;

  /// Throws InvalidArgument on a broken schedule, threshold or prior shape.
  void validate() const;
  int outcomes() const { return prior_e.outcomes(); }
};

struct TrialResult {
  Decision decision;
  long n_at_stop = 0;
  int analyses_performed = 0;
  std::vector<double> posterior_mean_delta;  // mean of the delta draws at stop
  std::vector<double> observed_delta;        // raw difference of sample proportions at stop
  std::vector<double> trajectory;            // posterior probability per analysis
};

/// Single analysis on complete data. Throws CountMismatch unless both arms
/// hold exactly schedule[0] subjects.
TrialResult run_fixed_trial(const DesignSpec& spec, const JointCounts& data_e, const JointCounts& data_c, Rng& rng);

enum class Arm { E, C };

/// Incremental supply of subjects' joint responses.
class ResponseSource {
 public:
  virtual ~ResponseSource() = default;
  virtual int outcomes() const = 0;
  /// Pattern counts of the next m subjects of `arm`. Throws StreamExhausted.
  virtual JointCounts next(Arm arm, long m) = 0;
};

/// Subjects drawn from fixed cell probabilities per arm.
class SimulatedSource : public ResponseSource {
 public:
  SimulatedSource(CellProbabilities phi_e, CellProbabilities phi_c, Rng rng);
  int outcomes() const override { return phi_e_.outcomes(); }
  JointCounts next(Arm arm, long m) override;

 private:
  CellProbabilities phi_e_;
  CellProbabilities phi_c_;
  std::vector<double> cum_e_;
  std::vector<double> cum_c_;
  Rng rng_;
};

/// Subject records replayed in order; one "arm,bits" line per subject
/// (arm E or C, bits like "10"). Blank lines and '#' comments are skipped.
class ReplaySource : public ResponseSource {
 public:
  explicit ReplaySource(std::istream& in);
  int outcomes() const override { return outcomes_; }
  JointCounts next(Arm arm, long m) override;
  std::size_t remaining(Arm arm) const;

 private:
  int outcomes_ = 0;
  std::deque<std::size_t> e_;
  std::deque<std::size_t> c_;
};

/// Analyses at every scheduled size, stopping at the first posterior
/// probability above the threshold.
TrialResult run_sequential_trial(const DesignSpec& spec, ResponseSource& source, Rng& rng);

/// All scheduled analyses without stopping; returns the trajectory.
std::vector<double> run_all_analyses(const DesignSpec& spec, ResponseSource& source, Rng& rng);

struct AdaptiveSchedule {
  long start = 5;
  long change_at = 50;  // step 1 up to here
  long step = 5;        // then this increment
  long cap = 500;
};

/// round-half-up(n_fd * ratio), at least 2, deduplicated. Throws InvalidRatios.
std::vector<long> make_schedule(long n_fd, const std::vector<double>& ratios);
std::vector<long> make_schedule(const AdaptiveSchedule& adaptive);

/// Evenly spaced ratios 1/M, 2/M, ..., 1.
std::vector<double> equal_ratios(int looks);

struct CalibrationResult {
  double threshold = 0.0;
  double type_one_rate = 0.0;  // share of maxima above the threshold
  std::vector<double> maxima;  // per replication, in replication order
};

/// Replications under null cells phi_e / phi_c with the full schedule, no
/// stopping. The threshold is the smallest per-replication maximum t with at
/// most floor(alpha * reps) maxima strictly above t.
CalibrationResult calibrate_threshold(const CellProbabilities& phi_e, const CellProbabilities& phi_c,
                                      const DesignSpec& spec, double alpha, std::size_t reps, std::uint64_t seed,
                                      unsigned threads = 0);

/// Quantile step of calibrate_threshold on precomputed maxima.
double threshold_from_maxima(std::vector<double> maxima, double alpha);

/// Independent generator pair for replication i of a keyed experiment.
struct ReplicationStreams {
  Rng data;
  Rng posterior;
  static ReplicationStreams make(std::uint64_t seed, std::uint64_t key, std::uint64_t index);
};

}  // namespace multibin
