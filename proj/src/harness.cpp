#include "coja/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <sstream>

#include "coja/error.hpp"

namespace coja {

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* algo_name(Algorithm a) { return a == Algorithm::Adaptive ? "adaptive" : "full"; }

// Welford accumulator; the standard error uses the sample (n-1) variance.
class RunningMoment {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  Estimate estimate() const {
    const double var = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    return {mean_, std::sqrt(var / static_cast<double>(n_))};
  }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace

const char* schedule_name(ScheduleName name) {
  switch (name) {
    case ScheduleName::Theorem:
      return "theorem";
    case ScheduleName::WarmupConst:
      return "warmup-const";
    case ScheduleName::Constant:
      return "constant";
    case ScheduleName::InverseT:
      return "inverse-t";
  }
  return "?";
}

std::optional<ScheduleName> parse_schedule_name(const std::string& text) {
  for (auto n : {ScheduleName::Theorem, ScheduleName::WarmupConst, ScheduleName::Constant, ScheduleName::InverseT}) {
    if (text == schedule_name(n)) return n;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (iters < 1) throw InvalidArgument("iters must be at least 1");
  if (stride < 0) throw InvalidArgument("stride must be non-negative (0 selects the default)");
  if (velocity) DriftParams{*velocity}.validate();
  // Model and schedule preconditions.
  (void)make_covariance(d, lambda1, lambda2, tail, orientation_seed);
  (void)make_schedule();
}

long ExperimentConfig::effective_stride() const { return stride > 0 ? stride : default_stride(iters); }

StepSchedule ExperimentConfig::make_schedule() const {
  const ProblemParams p = compute_params(d, lambda1, lambda2);
  switch (schedule.name) {
    case ScheduleName::Theorem:
      return StepSchedule::theorem_full(p);
    case ScheduleName::WarmupConst:
      return StepSchedule::warmup_constant(p);
    case ScheduleName::Constant:
      return StepSchedule::constant_hat(schedule.eta_hat, d, p.gap);
    case ScheduleName::InverseT:
      return StepSchedule::inverse_t(schedule.scale);
  }
  throw InvalidArgument("unknown schedule");
}

bool ExperimentConfig::has_bound() const {
  return algo == Algorithm::Adaptive && schedule.name == ScheduleName::Theorem && !velocity;
}

std::string ExperimentConfig::digest() const {
  std::ostringstream os;
  os << "d=" << d << ";lambda1=" << fmt17(lambda1) << ";lambda2=" << fmt17(lambda2) << ";tail=";
  if (tail.empty()) {
    os << "flat";
  } else {
    for (std::size_t i = 0; i < tail.size(); ++i) os << (i ? "," : "") << fmt17(tail[i]);
  }
  os << ";orientation=" << (orientation_seed ? std::to_string(*orientation_seed) : "identity");
  os << ";algo=" << algo_name(algo) << ";schedule=" << schedule_name(schedule.name);
  if (schedule.name == ScheduleName::Constant) os << ";eta_hat=" << fmt17(schedule.eta_hat);
  if (schedule.name == ScheduleName::InverseT) os << ";scale=" << fmt17(schedule.scale);
  os << ";iters=" << iters << ";trials=" << trials << ";seed=" << base_seed << ";stride=" << effective_stride();
  os << ";velocity=" << (velocity ? fmt17(*velocity) : "none");
  os << ";bound=" << (has_bound() ? "theorem" : "none");
  return os.str();
}

double percentile_inclusive(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("percentile rank must lie in [0, 1]");
  const double rank = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Trajectory run_single_trial(const ExperimentConfig& cfg, const SpectralCovariance& cov, int index) {
  Rng rng = make_rng(mix_seed(cfg.base_seed, static_cast<std::uint64_t>(index)));
  std::optional<DriftParams> drift;
  if (cfg.velocity) drift = DriftParams{*cfg.velocity};
  return run(cov, drift, cfg.make_schedule(), cfg.algo, cfg.iters, rng, cfg.effective_stride());
}

AggregateSeries aggregate(const ExperimentConfig& cfg, std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) throw InvalidArgument("nothing to aggregate");
  const auto& grid = trajectories.front().checkpoints;
  for (const auto& tr : trajectories) {
    if (tr.checkpoints.size() != grid.size()) throw InvalidArgument("trajectories have different checkpoint grids");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (tr.checkpoints[i].t != grid[i].t) throw InvalidArgument("trajectories have different checkpoint grids");
    }
  }

  std::optional<ProblemParams> params;
  std::optional<BoundParams> bounds;
  if (cfg.has_bound()) {
    params = compute_params(cfg.d, cfg.lambda1, cfg.lambda2);
    bounds = bound_params(*params);
  }

  AggregateSeries series;
  series.config = cfg.digest();
  series.rows.reserve(grid.size());
  std::vector<double> values(trajectories.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < trajectories.size(); ++k) values[k] = trajectories[k].checkpoints[i].sin2;
    // Sorting first makes the sum, and hence the mean, independent of trial order.
    std::sort(values.begin(), values.end());
    SeriesRow row;
    row.t = grid[i].t;
    row.mean_sin2 = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    row.p20 = percentile_inclusive(values, 0.2);
    row.p80 = percentile_inclusive(values, 0.8);
    row.bound_sin2 = params ? bound_curve(*params, *bounds, row.t) : 0.0;
    series.rows.push_back(row);
  }
  return series;
}

AggregateSeries run_trials_serial(const ExperimentConfig& cfg) {
  cfg.validate();
  const SpectralCovariance cov = make_covariance(cfg.d, cfg.lambda1, cfg.lambda2, cfg.tail, cfg.orientation_seed);
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(cfg.trials));
  for (int i = 0; i < cfg.trials; ++i) {
    try {
      out.push_back(run_single_trial(cfg, cov, i));
    } catch (const std::exception& e) {
      throw TrialError(i, e.what());
    }
  }
  return aggregate(cfg, out);
}

AggregateSeries run_trials(const ExperimentConfig& cfg) {
  cfg.validate();
  const SpectralCovariance cov = make_covariance(cfg.d, cfg.lambda1, cfg.lambda2, cfg.tail, cfg.orientation_seed);
  const int n = cfg.trials;
  std::vector<std::optional<Trajectory>> slots(static_cast<std::size_t>(n));
  std::vector<std::string> errors(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      slots[i] = run_single_trial(cfg, cov, i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  std::vector<Trajectory> out;
  out.reserve(slots.size());
  for (int i = 0; i < n; ++i) {
    if (!slots[i]) throw TrialError(i, errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return aggregate(cfg, out);
}

double steady_state(const AggregateSeries& series, double tail_frac) {
  if (series.rows.empty()) throw InvalidArgument("steady state of an empty series");
  if (!(tail_frac > 0.0 && tail_frac <= 1.0)) throw InvalidArgument("tail fraction must lie in (0, 1]");
  const auto n = series.rows.size();
  const auto window = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(tail_frac * static_cast<double>(n))));
  double sum = 0.0;
  for (std::size_t i = n - window; i < n; ++i) sum += series.rows[i].mean_sin2;
  return sum / static_cast<double>(window);
}

double fraction_within_bound(const AggregateSeries& series, long min_t) {
  long total = 0;
  long within = 0;
  for (const auto& r : series.rows) {
    if (r.t < min_t) continue;
    ++total;
    if (r.mean_sin2 <= r.bound_sin2) ++within;
  }
  if (total == 0) throw InvalidArgument("no checkpoints at or after min_t");
  return static_cast<double>(within) / static_cast<double>(total);
}

std::optional<long> first_crossing(const AggregateSeries& series, double threshold) {
  for (const auto& r : series.rows) {
    if (r.mean_sin2 <= threshold) return r.t;
  }
  return std::nullopt;
}

MomentReport moment_diagnostics(const UnitVector& u, const SpectralCovariance& cov, double eta, long n, Rng& rng) {
  if (n < 10000) throw InvalidArgument("moment diagnostics need at least 1e4 samples");
  if (u.dim() != cov.dim()) throw DimensionMismatch("estimate dimension does not match covariance");
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");

  const int d = cov.dim();
  const UnitVector lead = cov.leading_eigenvector();
  const double c = lead.dot(u);

  RunningMoment g2, h2, gh, czgh, X, Y2;
  Matrix bb = Matrix::Zero(d, d);
  for (long i = 0; i < n; ++i) {
    const UnitVector b = sample_orthogonal(u, rng);
    const Vector v = sample_data(cov, rng);
    const double g = u.dot(v);
    const double h = b.dot(v);
    const double z = lead.dot(b);
    g2.add(g * g);
    h2.add(h * h);
    gh.add(g * h);
    czgh.add(c * z * g * h);
    X.add(1.0 + eta * g * g);
    Y2.add(eta * eta * g * g * h * h);
    bb.selfadjointView<Eigen::Lower>().rankUpdate(b.coords());
  }
  bb = bb.selfadjointView<Eigen::Lower>();
  bb /= static_cast<double>(n);
  const Matrix expected =
      (Matrix::Identity(d, d) - u.coords() * u.coords().transpose()) / static_cast<double>(d - 1);

  const ProblemParams p = compute_params(d, cov.lambda1(), cov.lambda2());
  const double c2 = std::min(1.0, c * c);

  MomentReport r;
  r.samples = n;
  r.c2 = c2;
  r.g2 = g2.estimate();
  r.h2 = h2.estimate();
  r.gh = gh.estimate();
  r.czgh = czgh.estimate();
  r.X = X.estimate();
  r.Y2 = Y2.estimate();
  r.probe_second_moment_max_dev = (bb - expected).cwiseAbs().maxCoeff();
  r.envelopes = moment_envelopes(c2, (1.0 - c2) / (d - 1), p);
  r.cross_lower = p.gap * c2 * (1.0 - c2) / (d - 1);
  return r;
}

}  // namespace coja
