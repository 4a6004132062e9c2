#pragma once

#include <optional>
#include <vector>

#include "coja/model.hpp"
#include "coja/theory.hpp"

namespace coja {

enum class ScheduleKind {
  WarmupConstant,  // eta0 = (d-1)/(2 S gap) for every t
  TheoremLocal,    // eta_hat_t = K / (T + t - t0), valid for t >= t0
  TheoremFull,     // WarmupConstant before t0, TheoremLocal from t0
  ConstantHat,     // fixed normalized step eta_hat
  InverseT,        // raw eta_t = scale / t, t >= 1
};

/// Learning-rate policy. Build with the named factories; fields are public so
/// the harness can report them.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::TheoremFull;
  int d = 2;
  double gap = 1.0;
  double eta0 = 0.0;
  double K = 2.0;
  double T = 0.0;
  long t0 = 0;
  double eta_hat = 0.0;
  double scale = 1.0;

  static StepSchedule warmup_constant(const ProblemParams& p);
  static StepSchedule theorem_local(const ProblemParams& p, long t0);
  static StepSchedule theorem_full(const ProblemParams& p);
  static StepSchedule constant_hat(double eta_hat, int d, double gap);
  static StepSchedule inverse_t(double scale = 1.0);

  /// True for the schedules the convergence theorem covers.
  bool theorem_covered() const;
};

/// eta = (d-1) eta_hat / gap
double eta_hat_to_eta(double eta_hat, int d, double gap);
/// eta_hat = gap eta / (d-1)
double eta_to_eta_hat(double eta, int d, double gap);

/// Raw step size for iteration t. InverseT requires t >= 1.
double schedule_eta(const StepSchedule& s, long t);

struct TrackerState {
  UnitVector estimate;
  long iteration = 0;
};

/// One compressive Oja update from the two readings only:
/// u' = normalize(u (1 + eta g^2) + b (eta g h)).
TrackerState adaptive_step(const TrackerState& state, const Measurement& m, double eta);

/// Fully sampled Oja update u' = normalize(u + eta v (v.u)).
TrackerState full_step(const TrackerState& state, const Vector& v, double eta);

enum class Algorithm { Adaptive, Full };

struct Checkpoint {
  long t;
  double sin2;
  double cos2;
};

struct Trajectory {
  std::vector<Checkpoint> checkpoints;
  UnitVector final_estimate;
  /// False when the run falls outside the theorem (e.g. InverseT, full sampling).
  bool theorem_covered = false;
};

/// Default checkpoint stride: iters/1000, at least 1.
long default_stride(long iters);

/// Runs `iters` updates and records (t, sin^2, cos^2) against the current
/// leading eigenvector at t = 0, every `stride` iterations, and at t = iters.
/// u0 defaults to a uniform draw from the sphere.
Trajectory run(const SpectralCovariance& cov, std::optional<DriftParams> drift, const StepSchedule& schedule,
               Algorithm algo, long iters, Rng& rng, long stride, std::optional<UnitVector> u0 = {});

}  // namespace coja
