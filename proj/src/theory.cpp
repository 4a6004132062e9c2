#include "coja/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coja/error.hpp"

namespace coja {

namespace {

constexpr double kLocalCap = 0.5;

void require_fraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

double noise_constant(int d, double lambda1, double lambda2) {
  const double gap = lambda1 - lambda2;
  const double dd = static_cast<double>(d);
  return lambda1 * lambda2 * dd * dd / (gap * gap) + 13.0 * lambda1 * dd / gap;
}

ProblemParams compute_params(int d, double lambda1, double lambda2) {
  if (d < 2) throw InvalidArgument("dimension must be at least 2");
  if (!(lambda1 > lambda2)) throw InvalidArgument("eigengap must be positive");
  if (lambda2 < 0.0) throw InvalidArgument("eigenvalues must be non-negative");

  ProblemParams p;
  p.d = d;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.gap = lambda1 - lambda2;
  p.S = noise_constant(d, lambda1, lambda2);
  // The warmup monotonicity argument needs S >= 2; with d >= 2 the second term alone is >= 26.
  if (!(p.S >= 2.0)) throw InvalidArgument("noise constant below 2");
  return p;
}

BoundParams bound_params(const ProblemParams& p) {
  BoundParams b;
  const double growth = 4.0 * p.S + 1.0;
  const double t0 = std::ceil(growth * std::log(p.d / 2.0));
  if (t0 < 0.0) throw InvalidArgument("negative warmup length");
  b.t0 = static_cast<long>(t0);
  b.C1 = 4.0 * p.S + 2.0;
  b.C2 = growth * growth / 2.0;
  b.epsilon = 1.0 / p.d;
  return b;
}

double warmup_eta(const ProblemParams& p) {
  return (p.d - 1) / (2.0 * p.S * p.gap);
}

double warmup_bound(const ProblemParams& p, const BoundParams& b, long t) {
  if (t < 0 || t > b.t0) throw InvalidArgument("warmup bound queried outside [0, t0]");
  const double cos2 = b.epsilon * std::pow(1.0 + 1.0 / (4.0 * p.S), static_cast<double>(t));
  return std::max(0.0, 1.0 - cos2);
}

double local_bound(const BoundParams& b, double S, long t) {
  if (t < b.t0) throw InvalidArgument("local bound queried before t0");
  const double D = 4.0 * S + static_cast<double>(t - b.t0);
  return std::min(kLocalCap, b.C1 / D + b.C2 / (D * D));
}

double bound_curve(const ProblemParams& p, const BoundParams& b, long t) {
  if (t < 0) throw InvalidArgument("negative iteration");
  return t < b.t0 ? warmup_bound(p, b, t) : local_bound(b, p.S, t);
}

double fixed_point(double S, double eta_hat) {
  if (!(eta_hat > 0.0 && eta_hat <= 1.0 / S)) {
    throw InvalidArgument("step size outside the stability region (0, 1/S]");
  }
  return S * eta_hat / 2.0;
}

TrackingPlan tracking_plan(const ProblemParams& p, double velocity) {
  if (!(velocity >= 0.0 && velocity < 1.0)) throw InvalidArgument("velocity must lie in [0, 1)");
  TrackingPlan plan;
  plan.velocity = velocity;
  plan.eta_hat_star = std::sqrt(velocity / p.S);
  plan.x_star = velocity + std::sqrt(velocity * p.S);
  if (velocity == 0.0) {
    // Limit of S + V/eta^2 + 2V/eta along eta = sqrt(V/S).
    plan.s_tilde = 2.0 * p.S;
  } else {
    const double eh = plan.eta_hat_star;
    plan.s_tilde = p.S + velocity / (eh * eh) + 2.0 * velocity / eh;
  }
  return plan;
}

MomentEnvelope moment_envelopes(double c2, double z2, const ProblemParams& p) {
  require_fraction(c2, "c2");
  require_fraction(z2, "z2");
  return {p.gap * c2 + p.lambda2, p.gap * z2 + p.lambda2};
}

double one_step_bound(double c2, double eta_hat, double S) {
  require_fraction(c2, "c2");
  if (!(eta_hat > 0.0)) throw InvalidArgument("eta_hat must be positive");
  return c2 + 2.0 * eta_hat * c2 * (1.0 - c2) - S * c2 * eta_hat * eta_hat;
}

}  // namespace coja
