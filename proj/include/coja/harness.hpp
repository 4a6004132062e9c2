#pragma once

// Monte Carlo experiment orchestration: many independent trajectories,
// per-checkpoint aggregation, steady-state estimation and moment diagnostics.
//
// run_trials executes trials with OpenMP; run_trials_serial is the reference
// path kept for tests and benchmarks. Both return bitwise-identical series.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coja/error.hpp"
#include "coja/model.hpp"
#include "coja/theory.hpp"
#include "coja/tracker.hpp"

namespace coja {

/// A model or tracker error raised inside one trial, tagged with its index.
class TrialError : public Error {
 public:
  TrialError(int trial, const std::string& what)
      : Error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}
  int trial() const { return trial_; }

 private:
  int trial_;
};

enum class ScheduleName { Theorem, WarmupConst, Constant, InverseT };

struct ScheduleSpec {
  ScheduleName name = ScheduleName::Theorem;
  double eta_hat = 0.0;  // Constant only
  double scale = 1.0;    // InverseT only
};

/// "theorem", "warmup-const", "constant", "inverse-t"
const char* schedule_name(ScheduleName name);
std::optional<ScheduleName> parse_schedule_name(const std::string& text);

struct ExperimentConfig {
  int d = 10;
  double lambda1 = 2.0;
  double lambda2 = 1.0;
  std::vector<double> tail;                     // lambda_3..lambda_d; empty = flat
  std::optional<std::uint64_t> orientation_seed;  // empty = identity basis
  Algorithm algo = Algorithm::Adaptive;
  ScheduleSpec schedule;
  long iters = 200000;
  int trials = 20;
  std::uint64_t base_seed = 0;
  long stride = 0;  // 0 = default_stride(iters)
  std::optional<double> velocity;

  void validate() const;
  long effective_stride() const;
  StepSchedule make_schedule() const;
  /// True when the bound column carries the theory curve.
  bool has_bound() const;
  /// Canonical key=value rendering of every field; stable across runs.
  std::string digest() const;
};

struct SeriesRow {
  long t = 0;
  double mean_sin2 = 0.0;
  double p20 = 0.0;
  double p80 = 0.0;
  double bound_sin2 = 0.0;

  bool operator==(const SeriesRow&) const = default;
};

struct AggregateSeries {
  std::vector<SeriesRow> rows;
  std::string config;

  bool operator==(const AggregateSeries&) const = default;
};

/// Linear interpolation between closest order statistics at rank p (n - 1),
/// the "inclusive" convention. `sorted` must be ascending and non-empty.
double percentile_inclusive(std::span<const double> sorted, double p);

/// Trial `index` of the experiment, seeded by mix_seed(base_seed, index).
Trajectory run_single_trial(const ExperimentConfig& cfg, const SpectralCovariance& cov, int index);

/// Combines trajectories sharing a checkpoint grid. Invariant under any
/// permutation of `trajectories`.
AggregateSeries aggregate(const ExperimentConfig& cfg, std::span<const Trajectory> trajectories);

AggregateSeries run_trials(const ExperimentConfig& cfg);
AggregateSeries run_trials_serial(const ExperimentConfig& cfg);

/// Mean of mean_sin2 over the last ceil(tail_frac * rows) rows.
double steady_state(const AggregateSeries& series, double tail_frac = 0.2);

/// Fraction of rows with t >= min_t whose mean_sin2 <= bound_sin2.
double fraction_within_bound(const AggregateSeries& series, long min_t = 10);

/// First checkpoint t at which mean_sin2 <= threshold.
std::optional<long> first_crossing(const AggregateSeries& series, double threshold);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n)
};

struct MomentReport {
  long samples = 0;
  double c2 = 0.0;
  Estimate g2;    // E[g^2]
  Estimate h2;    // E[h^2]
  Estimate gh;    // E[g h]
  Estimate czgh;  // E[c z g h]
  Estimate X;     // E[1 + eta g^2]
  Estimate Y2;    // E[(eta g h)^2]
  double probe_second_moment_max_dev = 0.0;
  /// a2 at the fixed c; b2 averaged over E[z^2] = (1 - c^2)/(d - 1).
  MomentEnvelope envelopes;
  /// gap c^2 (1 - c^2) / (d - 1)
  double cross_lower = 0.0;
};

MomentReport moment_diagnostics(const UnitVector& u, const SpectralCovariance& cov, double eta, long n, Rng& rng);

}  // namespace coja
