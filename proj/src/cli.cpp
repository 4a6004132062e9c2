#include "coja/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "coja/error.hpp"
#include "coja/harness.hpp"
#include "coja/series_io.hpp"
#include "coja/theory.hpp"

namespace coja::cli {

namespace {

using nlohmann::json;

constexpr double kSeLimit = 4.0;
// Absolute floor for "zero within k SE" checks whose samples are pure rounding noise.
constexpr double kRoundingFloor = 1e-12;

struct ProblemFlags {
  int d = 10;
  double lambda1 = 2.0;
  double lambda2 = 1.0;
};

void add_problem_flags(CLI::App* cmd, ProblemFlags& f) {
  cmd->add_option("--d", f.d, "Ambient dimension (integer, >= 2)")->capture_default_str();
  cmd->add_option("--lambda1", f.lambda1, "Leading eigenvalue (variance units)")->capture_default_str();
  cmd->add_option("--lambda2", f.lambda2, "Second eigenvalue; tail is flat at this value (variance units)")
      ->capture_default_str();
}

std::filesystem::path resolve_output(const std::optional<std::string>& given, const char* fallback_name) {
  if (given) return *given;
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) return std::filesystem::path(dir) / fallback_name;
  return fallback_name;
}

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.se}}; }

json bound_report(const ProblemFlags& f, std::optional<double> velocity) {
  const ProblemParams p = compute_params(f.d, f.lambda1, f.lambda2);
  const BoundParams b = bound_params(p);
  json j;
  j["d"] = p.d;
  j["lambda1"] = p.lambda1;
  j["lambda2"] = p.lambda2;
  j["gap"] = p.gap;
  j["S"] = p.S;
  j["t0"] = b.t0;
  j["eta0"] = warmup_eta(p);
  j["C1"] = b.C1;
  j["C2"] = b.C2;
  j["epsilon"] = b.epsilon;
  if (velocity) {
    const TrackingPlan plan = tracking_plan(p, *velocity);
    j["velocity"] = plan.velocity;
    j["eta_hat_star"] = plan.eta_hat_star;
    j["s_tilde"] = plan.s_tilde;
    j["x_star"] = plan.x_star;
  }
  return j;
}

void write_series(const AggregateSeries& series, const std::filesystem::path& path) {
  export_series(series, format_for_path(path), path);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressive Oja's algorithm with adaptive sensing: bounds, experiments and diagnostics", "coja"};
  app.require_subcommand(1);

  // bound
  ProblemFlags bound_flags;
  std::optional<double> bound_velocity;
  auto* bound = app.add_subcommand("bound", "Print the theoretical constants as JSON");
  add_problem_flags(bound, bound_flags);
  bound->add_option("--velocity", bound_velocity, "Per-step eigenvector drift V in [0, 1) (squared sine per step)");

  // converge
  ProblemFlags conv_flags;
  long conv_iters = 200000;
  int conv_trials = 20;
  std::uint64_t conv_seed = 42;
  std::string conv_algo = "adaptive";
  std::string conv_schedule = "theorem";
  double conv_eta_hat = 0.0;
  double conv_scale = 1.0;
  long conv_stride = 0;
  std::optional<std::uint64_t> conv_orientation;
  std::optional<std::string> conv_out;
  auto* converge = app.add_subcommand("converge", "Run stationary convergence trials and write the aggregate series");
  add_problem_flags(converge, conv_flags);
  converge->add_option("--iters", conv_iters, "Iterations per trial")->capture_default_str();
  converge->add_option("--trials", conv_trials, "Independent trials")->capture_default_str();
  converge->add_option("--seed", conv_seed, "Base seed for per-trial streams")->capture_default_str();
  converge->add_option("--algo", conv_algo, "adaptive | full")->capture_default_str();
  converge->add_option("--schedule", conv_schedule, "theorem | warmup-const | constant | inverse-t")
      ->capture_default_str();
  converge->add_option("--eta-hat", conv_eta_hat, "Normalized step for --schedule constant (dimensionless)");
  converge->add_option("--scale", conv_scale, "Numerator of eta_t = scale/t for --schedule inverse-t")
      ->capture_default_str();
  converge->add_option("--stride", conv_stride, "Checkpoint stride in iterations (0 = iters/1000)")
      ->capture_default_str();
  converge->add_option("--orientation-seed", conv_orientation, "Random eigenbasis seed (default: identity basis)");
  converge->add_option("--out", conv_out, "Output series (.csv or .json; default converge.csv in $COJA_OUTPUT_DIR)");

  // track
  ProblemFlags track_flags;
  double track_velocity = 0.0;
  long track_iters = 100000;
  int track_trials = 20;
  std::uint64_t track_seed = 7;
  std::optional<double> track_eta_hat;
  long track_stride = 0;
  std::optional<std::string> track_out;
  auto* track = app.add_subcommand("track", "Run drifting-eigenvector tracking trials with a constant step");
  add_problem_flags(track, track_flags);
  track->add_option("--velocity", track_velocity, "Per-step drift V in (0, 1) (squared sine per step)")->required();
  track->add_option("--iters", track_iters, "Iterations per trial")->capture_default_str();
  track->add_option("--trials", track_trials, "Independent trials")->capture_default_str();
  track->add_option("--seed", track_seed, "Base seed for per-trial streams")->capture_default_str();
  track->add_option("--eta-hat", track_eta_hat, "Normalized step (default: sqrt(V/S))");
  track->add_option("--stride", track_stride, "Checkpoint stride in iterations (0 = iters/1000)")
      ->capture_default_str();
  track->add_option("--out", track_out, "Output series (.csv or .json; default track.csv in $COJA_OUTPUT_DIR)");

  // diagnose
  ProblemFlags diag_flags;
  double diag_c2 = 0.5;
  std::optional<double> diag_eta;
  long diag_samples = 1000000;
  std::uint64_t diag_seed = 3;
  auto* diagnose = app.add_subcommand("diagnose", "Monte Carlo check of the measurement moment lemmas");
  add_problem_flags(diagnose, diag_flags);
  diagnose->add_option("--c2", diag_c2, "Squared alignment of the fixed estimate with the leading eigenvector, in [0, 1]")
      ->capture_default_str();
  diagnose->add_option("--eta", diag_eta, "Raw step used for the X, Y columns (default: warmup eta0)");
  diagnose->add_option("--samples", diag_samples, "Monte Carlo draws (>= 1e4)")->capture_default_str();
  diagnose->add_option("--seed", diag_seed, "Random seed")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*bound) {
      out << bound_report(bound_flags, bound_velocity).dump(2) << "\n";
      return kExitOk;
    }

    if (*converge) {
      ExperimentConfig cfg;
      cfg.d = conv_flags.d;
      cfg.lambda1 = conv_flags.lambda1;
      cfg.lambda2 = conv_flags.lambda2;
      cfg.iters = conv_iters;
      cfg.trials = conv_trials;
      cfg.base_seed = conv_seed;
      cfg.stride = conv_stride;
      cfg.orientation_seed = conv_orientation;
      if (conv_algo == "adaptive") {
        cfg.algo = Algorithm::Adaptive;
      } else if (conv_algo == "full") {
        cfg.algo = Algorithm::Full;
      } else {
        throw InvalidArgument("unknown --algo '" + conv_algo + "'");
      }
      const auto sched = parse_schedule_name(conv_schedule);
      if (!sched) throw InvalidArgument("unknown --schedule '" + conv_schedule + "'");
      cfg.schedule = {*sched, conv_eta_hat, conv_scale};

      const auto path = resolve_output(conv_out, "converge.csv");
      const auto start = std::chrono::steady_clock::now();
      const AggregateSeries series = run_trials(cfg);
      write_series(series, path);

      json summary;
      summary["out"] = path.string();
      summary["rows"] = series.rows.size();
      summary["final_mean_sin2"] = series.rows.back().mean_sin2;
      summary["fraction_mean_le_bound"] = cfg.has_bound() ? json(fraction_within_bound(series)) : json(nullptr);
      const auto hit = first_crossing(series, 0.1);
      summary["first_t_mean_le_0.1"] = hit ? json(*hit) : json(nullptr);
      out << summary.dump() << "\n";
      err << "wall_time_s=" << seconds_since(start) << "\n";
      return kExitOk;
    }

    if (*track) {
      if (!(track_velocity > 0.0 && track_velocity < 1.0)) {
        throw InvalidArgument("--velocity must lie in (0, 1); use `converge` for the stationary case");
      }
      const ProblemParams p = compute_params(track_flags.d, track_flags.lambda1, track_flags.lambda2);
      const TrackingPlan plan = tracking_plan(p, track_velocity);

      ExperimentConfig cfg;
      cfg.d = track_flags.d;
      cfg.lambda1 = track_flags.lambda1;
      cfg.lambda2 = track_flags.lambda2;
      cfg.iters = track_iters;
      cfg.trials = track_trials;
      cfg.base_seed = track_seed;
      cfg.stride = track_stride;
      cfg.velocity = track_velocity;
      cfg.schedule = {ScheduleName::Constant, track_eta_hat.value_or(plan.eta_hat_star), 1.0};

      const auto path = resolve_output(track_out, "track.csv");
      const auto start = std::chrono::steady_clock::now();
      const AggregateSeries series = run_trials(cfg);
      write_series(series, path);

      json summary;
      summary["out"] = path.string();
      summary["rows"] = series.rows.size();
      summary["eta_hat"] = cfg.schedule.eta_hat;
      summary["steady_state"] = steady_state(series);
      summary["predicted_x_star"] = plan.x_star;
      out << summary.dump() << "\n";
      err << "wall_time_s=" << seconds_since(start) << "\n";
      return kExitOk;
    }

    if (*diagnose) {
      if (!(diag_c2 >= 0.0 && diag_c2 <= 1.0)) throw InvalidArgument("--c2 must lie in [0, 1]");
      if (diag_samples < 10000) throw InvalidArgument("--samples must be at least 10000");
      const SpectralCovariance cov = make_covariance(diag_flags.d, diag_flags.lambda1, diag_flags.lambda2);
      const ProblemParams p = compute_params(diag_flags.d, diag_flags.lambda1, diag_flags.lambda2);
      // Estimate in the plane of the leading eigenvector and the second basis direction.
      const Vector uc = std::sqrt(diag_c2) * cov.basis().col(0) + std::sqrt(1.0 - diag_c2) * cov.basis().col(1);
      const UnitVector u = normalize(uc);
      const double eta = diag_eta.value_or(warmup_eta(p));
      Rng rng = make_rng(diag_seed);
      const MomentReport r = moment_diagnostics(u, cov, eta, diag_samples, rng);

      const bool g2_ok = r.g2.mean <= r.envelopes.a2 + kSeLimit * r.g2.se;
      const bool gh_ok = std::abs(r.gh.mean) <= kSeLimit * r.gh.se + kRoundingFloor;
      const bool cross_ok = r.czgh.mean >= r.cross_lower - kSeLimit * r.czgh.se - kRoundingFloor;
      const bool probe_ok = r.probe_second_moment_max_dev <= 5e-3;

      json j;
      j["c2"] = r.c2;
      j["samples"] = r.samples;
      j["eta"] = eta;
      j["est_g2"] = estimate_json(r.g2);
      j["est_h2"] = estimate_json(r.h2);
      j["est_gh"] = estimate_json(r.gh);
      j["est_czgh"] = estimate_json(r.czgh);
      j["est_X"] = estimate_json(r.X);
      j["est_Y2"] = estimate_json(r.Y2);
      j["probe_second_moment_max_dev"] = r.probe_second_moment_max_dev;
      j["envelopes"] = {{"a2", r.envelopes.a2}, {"b2_mean", r.envelopes.b2}, {"cross_lower", r.cross_lower}};
      j["checks"] = {{"g2_le_a2", g2_ok}, {"gh_zero", gh_ok}, {"czgh_ge_lower", cross_ok}, {"probe_moment", probe_ok}};
      j["pass"] = g2_ok && gh_ok && cross_ok && probe_ok;
      out << j.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace coja::cli
