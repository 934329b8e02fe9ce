#include "multibin/trial_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "multibin/error.hpp"
#include "multibin/parallel.hpp"

namespace multibin {

namespace {

std::vector<double> observed_difference(const JointCounts& e, const JointCounts& c) {
  const int outcomes = e.outcomes();
  std::vector<double> pe(e.size());
  std::vector<double> pc(c.size());
  const double ne = static_cast<double>(e.total());
  const double nc = static_cast<double>(c.total());
  for (std::size_t q = 0; q < e.size(); ++q) {
    pe[q] = ne > 0 ? static_cast<double>(e[q]) / ne : 0.0;
    pc[q] = nc > 0 ? static_cast<double>(c[q]) / nc : 0.0;
  }
  std::vector<double> te(static_cast<std::size_t>(outcomes));
  std::vector<double> tc(static_cast<std::size_t>(outcomes));
  margins_into(pe, outcomes, te);
  margins_into(pc, outcomes, tc);
  for (std::size_t k = 0; k < te.size(); ++k) te[k] -= tc[k];
  return te;
}

std::vector<double> cumulative_of(const CellProbabilities& phi) {
  std::vector<double> cum(phi.size());
  std::partial_sum(phi.values().begin(), phi.values().end(), cum.begin());
  return cum;
}

struct SequentialRun {
  std::vector<double> trajectory;
  long n_at_stop = 0;
  DeltaDraws last{0, 1};
  JointCounts counts_e = JointCounts::zeros(1);
  JointCounts counts_c = JointCounts::zeros(1);
};

SequentialRun run_looks(const DesignSpec& spec, ResponseSource& source, Rng& rng, bool stop_early) {
  spec.validate();
  if (source.outcomes() != spec.outcomes()) throw DimensionMismatch("response source and prior differ in outcomes");
  SequentialRun run;
  run.counts_e = JointCounts::zeros(spec.outcomes());
  run.counts_c = JointCounts::zeros(spec.outcomes());
  DirichletParticles pe(spec.prior_e, spec.draws, rng);
  DirichletParticles pc(spec.prior_c, spec.draws, rng);
  long n_prev = 0;
  for (long n : spec.schedule) {
    const auto inc_e = source.next(Arm::E, n - n_prev);
    const auto inc_c = source.next(Arm::C, n - n_prev);
    pe.absorb(inc_e, rng);
    pc.absorb(inc_c, rng);
    run.counts_e += inc_e;
    run.counts_c += inc_c;
    n_prev = n;
    delta_draws_into(pe, pc, run.last);
    const double p = superiority_probability(spec.rule, run.last);
    run.trajectory.push_back(p);
    run.n_at_stop = n;
    if (stop_early && p > spec.threshold) break;
  }
  return run;
}

}  // namespace

std::string to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::Fixed: return "fixed";
    case DesignKind::GroupSequential: return "gs";
    case DesignKind::Adaptive: return "adaptive";
  }
  return "?";
}

DesignKind parse_design_kind(const std::string& text) {
  if (text == "fixed") return DesignKind::Fixed;
  if (text == "gs" || text == "sequential") return DesignKind::GroupSequential;
  if (text == "adaptive") return DesignKind::Adaptive;
  throw InvalidArgument("unknown design '" + text + "' (fixed, gs, adaptive)");
}

void DesignSpec::validate() const {
  if (schedule.empty()) throw InvalidArgument("schedule is empty");
  if (schedule.front() < 1) throw InvalidArgument("schedule sizes must be positive");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) throw InvalidArgument("schedule must be strictly increasing");
  }
  if (kind == DesignKind::Fixed && schedule.size() != 1) throw InvalidArgument("a fixed design has one analysis");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("threshold must lie in (0, 1)");
  if (prior_e.size() != prior_c.size()) throw DimensionMismatch("arm priors differ in length");
  if (draws == 0) throw InvalidArgument("draw count must be at least 1");
  rule.check_outcomes(outcomes());
}

TrialResult run_fixed_trial(const DesignSpec& spec, const JointCounts& data_e, const JointCounts& data_c, Rng& rng) {
  spec.validate();
  if (spec.schedule.size() != 1) throw InvalidArgument("run_fixed_trial needs a single analysis");
  const long n = spec.schedule.front();
  if (data_e.total() != n || data_c.total() != n) {
    throw CountMismatch("expected " + std::to_string(n) + " subjects per arm, got " + std::to_string(data_e.total()) +
                        " and " + std::to_string(data_c.total()));
  }
  const auto draws =
      sample_delta(posterior_update(spec.prior_e, data_e), posterior_update(spec.prior_c, data_c), spec.draws, rng);
  const double p = superiority_probability(spec.rule, draws);
  TrialResult r;
  r.decision = decide(p, spec.threshold);
  r.n_at_stop = n;
  r.analyses_performed = 1;
  r.posterior_mean_delta = draws.mean();
  r.observed_delta = observed_difference(data_e, data_c);
  r.trajectory = {p};
  return r;
}

SimulatedSource::SimulatedSource(CellProbabilities phi_e, CellProbabilities phi_c, Rng rng)
    : phi_e_(std::move(phi_e)),
      phi_c_(std::move(phi_c)),
      cum_e_(cumulative_of(phi_e_)),
      cum_c_(cumulative_of(phi_c_)),
      rng_(rng) {
  if (phi_e_.size() != phi_c_.size()) throw DimensionMismatch("arms differ in cell count");
}

JointCounts SimulatedSource::next(Arm arm, long m) {
  if (m < 0) throw InvalidArgument("negative subject count");
  const auto& cum = arm == Arm::E ? cum_e_ : cum_c_;
  auto counts = JointCounts::zeros(outcomes());
  for (long i = 0; i < m; ++i) counts.add(rng_.categorical(cum));
  return counts;
}

ReplaySource::ReplaySource(std::istream& in) {
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string rec = line.substr(first, last - first + 1);
    const auto comma = rec.find(',');
    auto fail = [&](const std::string& why) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": " + why + " ('" + rec + "')");
    };
    if (comma == std::string::npos || rec.find(',', comma + 1) != std::string::npos) fail("expected arm,bits");
    const std::string arm = rec.substr(0, comma);
    const std::string bits = rec.substr(comma + 1);
    std::size_t q = 0;
    try {
      q = parse_pattern(bits);
    } catch (const Error&) {
      fail("bad response bits");
    }
    const int k = static_cast<int>(bits.size());
    if (outcomes_ == 0) outcomes_ = k;
    if (k != outcomes_) fail("expected " + std::to_string(outcomes_) + " response bits");
    if (arm == "E") {
      e_.push_back(q);
    } else if (arm == "C") {
      c_.push_back(q);
    } else {
      fail("arm must be E or C");
    }
  }
  if (outcomes_ == 0) throw InvalidArgument("no subject records");
}

JointCounts ReplaySource::next(Arm arm, long m) {
  auto& queue = arm == Arm::E ? e_ : c_;
  if (m < 0) throw InvalidArgument("negative subject count");
  if (static_cast<std::size_t>(m) > queue.size()) {
    throw StreamExhausted(std::string("arm ") + (arm == Arm::E ? "E" : "C") + " has " + std::to_string(queue.size()) +
                          " subjects left, " + std::to_string(m) + " requested");
  }
  auto counts = JointCounts::zeros(outcomes_);
  for (long i = 0; i < m; ++i) {
    counts.add(queue.front());
    queue.pop_front();
  }
  return counts;
}

std::size_t ReplaySource::remaining(Arm arm) const { return arm == Arm::E ? e_.size() : c_.size(); }

TrialResult run_sequential_trial(const DesignSpec& spec, ResponseSource& source, Rng& rng) {
  auto run = run_looks(spec, source, rng, true);
  TrialResult r;
  r.decision = decide(run.trajectory.back(), spec.threshold);
  r.n_at_stop = run.n_at_stop;
  r.analyses_performed = static_cast<int>(run.trajectory.size());
  r.posterior_mean_delta = run.last.mean();
  r.observed_delta = observed_difference(run.counts_e, run.counts_c);
  r.trajectory = std::move(run.trajectory);
  return r;
}

std::vector<double> run_all_analyses(const DesignSpec& spec, ResponseSource& source, Rng& rng) {
  return run_looks(spec, source, rng, false).trajectory;
}

std::vector<long> make_schedule(long n_fd, const std::vector<double>& ratios) {
  if (n_fd < 1) throw InvalidRatios("maximum sample size must be positive");
  if (ratios.empty()) throw InvalidRatios("no analysis ratios");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0 && ratios[i] <= 1.0)) throw InvalidRatios("ratios must lie in (0, 1]");
    if (i > 0 && !(ratios[i] > ratios[i - 1])) throw InvalidRatios("ratios must be strictly ascending");
  }
  if (std::abs(ratios.back() - 1.0) > 1e-12) throw InvalidRatios("the last ratio must be 1");
  std::vector<long> out;
  for (double r : ratios) {
    // 1e-9 keeps 38 * (1/3) * 3 style products on the intended side of .5
    long n = static_cast<long>(std::floor(static_cast<double>(n_fd) * r + 0.5 + 1e-9));
    n = std::max(n, 2L);
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

std::vector<long> make_schedule(const AdaptiveSchedule& a) {
  if (a.start < 1 || a.step < 1 || a.change_at < a.start || a.cap < a.change_at) {
    throw InvalidRatios("adaptive schedule needs 1 <= start <= change point <= cap and a positive step");
  }
  std::vector<long> out;
  for (long n = a.start; n <= a.change_at; ++n) out.push_back(n);
  for (long n = a.change_at + a.step; n <= a.cap; n += a.step) out.push_back(n);
  if (out.back() != a.cap) out.push_back(a.cap);
  return out;
}

std::vector<double> equal_ratios(int looks) {
  if (looks < 1) throw InvalidRatios("need at least one analysis");
  std::vector<double> r;
  for (int m = 1; m <= looks; ++m) r.push_back(static_cast<double>(m) / looks);
  r.back() = 1.0;
  return r;
}

double threshold_from_maxima(std::vector<double> maxima, double alpha) {
  if (maxima.empty()) throw InvalidArgument("no replications");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  std::sort(maxima.begin(), maxima.end());
  const auto r = maxima.size();
  const auto allowed = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(r) + 1e-9));
  return maxima[r - 1 - std::min(allowed, r - 1)];
}

CalibrationResult calibrate_threshold(const CellProbabilities& phi_e, const CellProbabilities& phi_c,
                                      const DesignSpec& spec, double alpha, std::size_t reps, std::uint64_t seed,
                                      unsigned threads) {
  if (reps == 0) throw InvalidArgument("calibration needs replications");
  spec.validate();
  CalibrationResult out;
  out.maxima.assign(reps, 0.0);
  const std::uint64_t key = stable_hash("calibrate");
  parallel_for(reps, threads, [&](std::size_t i) {
    auto streams = ReplicationStreams::make(seed, key, i);
    SimulatedSource source(phi_e, phi_c, streams.data);
    const auto traj = run_all_analyses(spec, source, streams.posterior);
    out.maxima[i] = *std::max_element(traj.begin(), traj.end());
  });
  out.threshold = threshold_from_maxima(out.maxima, alpha);
  const auto above = std::count_if(out.maxima.begin(), out.maxima.end(), [&](double m) { return m > out.threshold; });
  out.type_one_rate = static_cast<double>(above) / static_cast<double>(reps);
  return out;
}

ReplicationStreams ReplicationStreams::make(std::uint64_t seed, std::uint64_t key, std::uint64_t index) {
  return ReplicationStreams{Rng::derive(seed, key, 2 * index), Rng::derive(seed, key, 2 * index + 1)};
}

}  // namespace multibin
