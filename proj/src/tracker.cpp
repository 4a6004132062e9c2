#include "coja/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coja/error.hpp"

namespace coja {

namespace {

void require_positive_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("step size must be positive and finite");
}

double local_eta_hat(const StepSchedule& s, long t) {
  return s.K / (s.T + static_cast<double>(t - s.t0));
}

}  // namespace

StepSchedule StepSchedule::warmup_constant(const ProblemParams& p) {
  StepSchedule s;
  s.kind = ScheduleKind::WarmupConstant;
  s.d = p.d;
  s.gap = p.gap;
  s.eta0 = warmup_eta(p);
  return s;
}

StepSchedule StepSchedule::theorem_local(const ProblemParams& p, long t0) {
  if (t0 < 0) throw InvalidArgument("t0 must be non-negative");
  StepSchedule s;
  s.kind = ScheduleKind::TheoremLocal;
  s.d = p.d;
  s.gap = p.gap;
  s.eta0 = warmup_eta(p);
  s.K = 2.0;
  s.T = 4.0 * p.S;
  s.t0 = t0;
  return s;
}

StepSchedule StepSchedule::theorem_full(const ProblemParams& p) {
  StepSchedule s = theorem_local(p, bound_params(p).t0);
  s.kind = ScheduleKind::TheoremFull;
  return s;
}

StepSchedule StepSchedule::constant_hat(double eta_hat, int d, double gap) {
  if (!(eta_hat > 0.0) || !std::isfinite(eta_hat)) throw InvalidArgument("eta_hat must be positive and finite");
  StepSchedule s;
  s.kind = ScheduleKind::ConstantHat;
  s.d = d;
  s.gap = gap;
  s.eta_hat = eta_hat;
  // Validates d and gap.
  (void)eta_hat_to_eta(eta_hat, d, gap);
  return s;
}

StepSchedule StepSchedule::inverse_t(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("inverse-t scale must be positive");
  StepSchedule s;
  s.kind = ScheduleKind::InverseT;
  s.scale = scale;
  return s;
}

bool StepSchedule::theorem_covered() const {
  return kind == ScheduleKind::TheoremFull || kind == ScheduleKind::TheoremLocal ||
         kind == ScheduleKind::WarmupConstant;
}

double eta_hat_to_eta(double eta_hat, int d, double gap) {
  if (d < 2) throw InvalidArgument("dimension must be at least 2");
  if (!(gap > 0.0)) throw InvalidArgument("eigengap must be positive");
  return (d - 1) * eta_hat / gap;
}

double eta_to_eta_hat(double eta, int d, double gap) {
  if (d < 2) throw InvalidArgument("dimension must be at least 2");
  if (!(gap > 0.0)) throw InvalidArgument("eigengap must be positive");
  return gap * eta / (d - 1);
}

double schedule_eta(const StepSchedule& s, long t) {
  if (t < 0) throw InvalidArgument("iteration must be non-negative");
  double eta = 0.0;
  switch (s.kind) {
    case ScheduleKind::WarmupConstant:
      eta = s.eta0;
      break;
    case ScheduleKind::TheoremLocal:
      if (t < s.t0) throw InvalidArgument("local schedule queried before t0");
      eta = eta_hat_to_eta(local_eta_hat(s, t), s.d, s.gap);
      break;
    case ScheduleKind::TheoremFull:
      eta = t < s.t0 ? s.eta0 : eta_hat_to_eta(local_eta_hat(s, t), s.d, s.gap);
      break;
    case ScheduleKind::ConstantHat:
      eta = eta_hat_to_eta(s.eta_hat, s.d, s.gap);
      break;
    case ScheduleKind::InverseT:
      if (t < 1) throw InvalidArgument("inverse-t schedule starts at t = 1");
      eta = s.scale / static_cast<double>(t);
      break;
  }
  require_positive_eta(eta);
  return eta;
}

TrackerState adaptive_step(const TrackerState& state, const Measurement& m, double eta) {
  require_positive_eta(eta);
  const UnitVector& u = state.estimate;
  if (m.probe.dim() != u.dim()) throw DimensionMismatch("probe dimension does not match estimate");
  if (std::abs(u.dot(m.probe)) > kOrthogonalTolerance) {
    throw InvalidArgument("probe is not orthogonal to the estimate");
  }
  const Vector next = u.coords() * (1.0 + eta * m.g * m.g) + m.probe.coords() * (eta * m.g * m.h);
  return {normalize(next), state.iteration + 1};
}

TrackerState full_step(const TrackerState& state, const Vector& v, double eta) {
  require_positive_eta(eta);
  const UnitVector& u = state.estimate;
  if (v.size() != u.dim()) throw DimensionMismatch("sample dimension does not match estimate");
  const Vector next = u.coords() + eta * u.dot(v) * v;
  return {normalize(next), state.iteration + 1};
}

long default_stride(long iters) { return std::max(1L, iters / 1000); }

Trajectory run(const SpectralCovariance& cov, std::optional<DriftParams> drift, const StepSchedule& schedule,
               Algorithm algo, long iters, Rng& rng, long stride, std::optional<UnitVector> u0) {
  if (iters < 1) throw InvalidArgument("iters must be at least 1");
  if (stride < 1) throw InvalidArgument("stride must be at least 1");
  if (schedule.kind == ScheduleKind::TheoremLocal && schedule.t0 > 0) {
    throw InvalidArgument("local schedule cannot start a run from t = 0 when t0 > 0; use the full theorem schedule");
  }
  if (schedule.kind != ScheduleKind::InverseT && schedule.d != cov.dim()) {
    throw DimensionMismatch("schedule dimension does not match covariance");
  }
  if (drift) drift->validate();
  if (u0 && u0->dim() != cov.dim()) throw DimensionMismatch("initial estimate dimension does not match covariance");

  const int d = cov.dim();
  TrackerState state{u0 ? *u0 : sample_sphere(d, rng), 0};
  SpectralCovariance current = cov;

  Trajectory traj{{}, state.estimate, algo == Algorithm::Adaptive && schedule.theorem_covered()};
  traj.checkpoints.reserve(static_cast<std::size_t>(iters / stride + 2));
  auto record = [&](long t) {
    const Alignment a = alignment(state.estimate, current.leading_eigenvector());
    traj.checkpoints.push_back({t, a.sin2, a.cos2});
  };
  record(0);

  // InverseT counts from 1; the theorem schedules index the iterate being updated.
  const long eta_offset = schedule.kind == ScheduleKind::InverseT ? 1 : 0;

  for (long t = 0; t < iters; ++t) {
    if (drift) current = drift_step(current, *drift, rng);
    const Vector v = sample_data(current, rng);
    const double eta = schedule_eta(schedule, t + eta_offset);
    if (algo == Algorithm::Adaptive) {
      const UnitVector b = sample_orthogonal(state.estimate, rng);
      // The step sees only the two readings, never v itself.
      state = adaptive_step(state, compress(state.estimate, b, v), eta);
    } else {
      state = full_step(state, v, eta);
    }
    const long done = t + 1;
    if (done % stride == 0 || done == iters) record(done);
  }

  traj.final_estimate = state.estimate;
  return traj;
}

}  // namespace coja
