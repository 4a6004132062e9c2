#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "coja/error.hpp"
#include "coja/harness.hpp"

using namespace coja;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.iters = 4000;
  cfg.trials = 9;
  cfg.base_seed = 123;
  cfg.stride = 100;
  return cfg;
}

}  // namespace

TEST_CASE("percentile convention") {
  // Inclusive linear interpolation: rank p (n - 1).
  std::vector<double> xs(20);
  for (int i = 0; i < 20; ++i) xs[i] = i * i;  // 0, 1, 4, ..., 361
  // 0.2 * 19 = 3.8 -> x(3) + 0.8 (x(4) - x(3)) = 9 + 0.8 * 7
  CHECK(percentile_inclusive(xs, 0.2) == doctest::Approx(14.6));
  // 0.8 * 19 = 15.2 -> x(15) + 0.2 (x(16) - x(15)) = 225 + 0.2 * 31
  CHECK(percentile_inclusive(xs, 0.8) == doctest::Approx(231.2));
  CHECK(percentile_inclusive(xs, 0.0) == 0.0);
  CHECK(percentile_inclusive(xs, 1.0) == 361.0);

  const std::vector<double> one{0.7};
  CHECK(percentile_inclusive(one, 0.2) == 0.7);
  CHECK(percentile_inclusive(one, 0.8) == 0.7);

  const std::vector<double> five{1, 2, 3, 4, 5};
  CHECK(percentile_inclusive(five, 0.25) == 2.0);
  CHECK(percentile_inclusive(five, 0.5) == 3.0);
  CHECK_THROWS_AS(percentile_inclusive(std::vector<double>{}, 0.5), InvalidArgument);
}

TEST_CASE("single trial collapses percentiles onto the mean") {
  auto cfg = small_config();
  cfg.trials = 1;
  const auto series = run_trials(cfg);
  for (const auto& r : series.rows) {
    CHECK(r.mean_sin2 == r.p20);
    CHECK(r.mean_sin2 == r.p80);
  }
}

TEST_CASE("series invariants") {
  const auto cfg = small_config();
  const auto series = run_trials(cfg);
  REQUIRE(series.rows.size() == 41);
  CHECK(series.config == cfg.digest());
  for (std::size_t i = 0; i < series.rows.size(); ++i) {
    const auto& r = series.rows[i];
    CHECK(r.t == static_cast<long>(i) * 100);
    CHECK(r.p20 <= r.p80);
    for (double v : {r.mean_sin2, r.p20, r.p80, r.bound_sin2}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  CHECK(series.rows.front().bound_sin2 == doctest::Approx(0.9));
}

TEST_CASE("bound column only for adaptive theorem runs") {
  auto cfg = small_config();
  cfg.algo = Algorithm::Full;
  cfg.schedule = {ScheduleName::InverseT, 0.0, 1.0};
  const auto series = run_trials(cfg);
  for (const auto& r : series.rows) CHECK(r.bound_sin2 == 0.0);
  CHECK(series.config.find("bound=none") != std::string::npos);
  CHECK(cfg.digest().find("algo=full") != std::string::npos);
}

TEST_CASE("parallel execution matches the serial reference bitwise") {
  auto cfg = small_config();
  cfg.trials = 13;
  CHECK(run_trials(cfg) == run_trials_serial(cfg));

  cfg.velocity = 1e-3;
  cfg.schedule = {ScheduleName::Constant, 1e-3, 1.0};
  CHECK(run_trials(cfg) == run_trials_serial(cfg));
}

TEST_CASE("repeat runs are identical") {
  const auto cfg = small_config();
  CHECK(run_trials(cfg) == run_trials(cfg));
}

TEST_CASE("aggregation is invariant under trial permutation") {
  const auto cfg = small_config();
  const auto cov = make_covariance(cfg.d, cfg.lambda1, cfg.lambda2);
  std::vector<Trajectory> trs;
  for (int i = 0; i < cfg.trials; ++i) trs.push_back(run_single_trial(cfg, cov, i));
  const auto reference = aggregate(cfg, trs);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(trs.begin(), trs.end(), rng);
    CHECK(aggregate(cfg, trs) == reference);
  }
}

TEST_CASE("adding trials does not perturb earlier ones") {
  auto cfg = small_config();
  const auto cov = make_covariance(cfg.d, cfg.lambda1, cfg.lambda2);
  const auto first = run_single_trial(cfg, cov, 2);
  cfg.trials = 50;
  const auto again = run_single_trial(cfg, cov, 2);
  CHECK(first.final_estimate == again.final_estimate);
}

TEST_CASE("aggregate rejects mismatched grids") {
  auto cfg = small_config();
  const auto cov = make_covariance(cfg.d, cfg.lambda1, cfg.lambda2);
  std::vector<Trajectory> trs{run_single_trial(cfg, cov, 0)};
  cfg.stride = 50;
  trs.push_back(run_single_trial(cfg, cov, 1));
  CHECK_THROWS_AS(aggregate(cfg, trs), InvalidArgument);
  CHECK_THROWS_AS(aggregate(cfg, std::vector<Trajectory>{}), InvalidArgument);
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(run_trials(cfg), InvalidArgument);
  cfg = small_config();
  cfg.lambda2 = cfg.lambda1;
  CHECK_THROWS_AS(run_trials(cfg), InvalidArgument);
  cfg = small_config();
  cfg.velocity = 1.5;
  CHECK_THROWS_AS(run_trials(cfg), InvalidArgument);
  cfg = small_config();
  cfg.schedule = {ScheduleName::Constant, 0.0, 1.0};
  CHECK_THROWS_AS(run_trials(cfg), InvalidArgument);
}

TEST_CASE("schedule names round trip") {
  for (auto n : {ScheduleName::Theorem, ScheduleName::WarmupConst, ScheduleName::Constant, ScheduleName::InverseT}) {
    CHECK(parse_schedule_name(schedule_name(n)) == n);
  }
  CHECK_FALSE(parse_schedule_name("1/t"));
}

TEST_CASE("steady_state") {
  AggregateSeries s;
  for (int i = 0; i < 10; ++i) s.rows.push_back({i, 0.25, 0.2, 0.3, 0.0});
  CHECK(steady_state(s) == doctest::Approx(0.25));

  AggregateSeries ramp;
  for (int i = 0; i < 10; ++i) ramp.rows.push_back({i, static_cast<double>(i), 0, 0, 0});
  CHECK(steady_state(ramp, 1.0) == doctest::Approx(4.5));
  CHECK(steady_state(ramp, 0.2) == doctest::Approx(8.5));   // last 2 rows
  CHECK(steady_state(ramp, 0.25) == doctest::Approx(8.0));  // ceil(2.5) = 3 rows

  CHECK_THROWS_AS(steady_state(AggregateSeries{}), InvalidArgument);
  CHECK_THROWS_AS(steady_state(ramp, 0.0), InvalidArgument);
}

TEST_CASE("steady state of a theorem run keeps falling as iterations double") {
  ExperimentConfig cfg;
  cfg.trials = 20;
  cfg.base_seed = 9;
  double prev = 1.0;
  for (long iters : {10000L, 20000L, 40000L, 80000L}) {
    cfg.iters = iters;
    const double ss = steady_state(run_trials(cfg));
    CAPTURE(iters);
    CHECK(ss < prev);
    prev = ss;
  }
}

TEST_CASE("series helpers") {
  AggregateSeries s;
  s.rows = {{0, 0.9, 0, 0, 0.9}, {5, 0.95, 0, 0, 0.9}, {10, 0.5, 0, 0, 0.6}, {20, 0.3, 0, 0, 0.2}, {30, 0.05, 0, 0, 0.1}};
  CHECK(fraction_within_bound(s, 10) == doctest::Approx(2.0 / 3.0));
  CHECK(first_crossing(s, 0.1) == 30);
  CHECK_FALSE(first_crossing(s, 0.01));
}

TEST_CASE("moment diagnostics") {
  const auto cov = make_covariance(10, 2.0, 1.0, {}, 31);
  const auto p = compute_params(10, 2.0, 1.0);
  const double eta = 9.0 / 920.0;
  Rng rng = make_rng(17);

  SUBCASE("aligned estimate") {
    const auto r = moment_diagnostics(cov.leading_eigenvector(), cov, eta, 200000, rng);
    CHECK(r.c2 == doctest::Approx(1.0));
    CHECK(std::abs(r.g2.mean - 2.0) <= 4.0 * r.g2.se);
    CHECK(std::abs(r.czgh.mean) <= 4.0 * r.czgh.se + 1e-12);
    CHECK(r.cross_lower == doctest::Approx(0.0));
  }
  SUBCASE("lemma envelopes across alignments") {
    for (double c2 : {0.1, 0.5, 0.9}) {
      CAPTURE(c2);
      const auto u = normalize(std::sqrt(c2) * cov.basis().col(0) + std::sqrt(1 - c2) * cov.basis().col(1));
      const auto r = moment_diagnostics(u, cov, eta, 1000000, rng);
      CHECK(r.samples == 1000000);
      CHECK(r.g2.se > 0.0);
      CHECK(r.envelopes.a2 == doctest::Approx(p.gap * c2 + p.lambda2));
      CHECK(r.g2.mean <= r.envelopes.a2 + 4.0 * r.g2.se);
      CHECK(std::abs(r.gh.mean) <= 4.0 * r.gh.se);
      CHECK(r.czgh.mean >= r.cross_lower - 4.0 * r.czgh.se);
      CHECK(r.probe_second_moment_max_dev <= 5e-3);
      CHECK(r.X.mean == doctest::Approx(1.0 + eta * r.g2.mean).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(moment_diagnostics(cov.leading_eigenvector(), cov, eta, 100, rng), InvalidArgument);
}
