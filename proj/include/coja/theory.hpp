#pragma once

// Closed-form convergence quantities for compressive Oja with adaptive
// sensing: the noise constant S, warmup length t0, local-phase constants,
// the piecewise bound curve, constant-step fixed points and the drift-optimal
// step size.
//
// Conventions: eta is the raw learning rate applied in the update,
// eta_hat = gap * eta / (d - 1) is the normalized step the recurrences use,
// and x = 1 - c^2 is the squared sine error.

namespace coja {

struct ProblemParams {
  int d = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gap = 0.0;
  double S = 0.0;
};

struct BoundParams {
  long t0 = 0;
  double C1 = 0.0;
  double C2 = 0.0;
  double epsilon = 0.0;
};

struct TrackingPlan {
  double velocity = 0.0;
  double eta_hat_star = 0.0;
  double s_tilde = 0.0;
  double x_star = 0.0;
};

/// Upper envelopes on E[g^2] (a2) and E[h^2 | b] (b2).
struct MomentEnvelope {
  double a2 = 0.0;
  double b2 = 0.0;
};

/// S = lambda1 lambda2 d^2 / gap^2 + 13 lambda1 d / gap
double noise_constant(int d, double lambda1, double lambda2);

ProblemParams compute_params(int d, double lambda1, double lambda2);

BoundParams bound_params(const ProblemParams& p);

/// Raw warmup step eta0 = (d-1) / (2 S gap), i.e. eta_hat = 1/(2S).
double warmup_eta(const ProblemParams& p);

/// 1 - epsilon (1 + 1/(4S))^t, floored at 0. Valid for 0 <= t <= t0.
double warmup_bound(const ProblemParams& p, const BoundParams& b, long t);

/// min(0.5, C1/D + C2/D^2) with D = 4S + (t - t0). Valid for t >= t0.
double local_bound(const BoundParams& b, double S, long t);

/// Warmup piece before t0, local piece from t0 on.
double bound_curve(const ProblemParams& p, const BoundParams& b, long t);

/// Stationary constant-step fixed point S eta_hat / 2; requires 0 < eta_hat <= 1/S.
double fixed_point(double S, double eta_hat);

TrackingPlan tracking_plan(const ProblemParams& p, double velocity);

MomentEnvelope moment_envelopes(double c2, double z2, const ProblemParams& p);

/// Lower bound on E[c_{t+1}^2 | c]: c2 + 2 eta_hat c2 (1 - c2) - S c2 eta_hat^2.
double one_step_bound(double c2, double eta_hat, double S);

}  // namespace coja
