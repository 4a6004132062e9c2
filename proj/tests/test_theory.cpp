#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "coja/error.hpp"
#include "coja/theory.hpp"
#include "coja/tracker.hpp"

using namespace coja;

// Expected values below were evaluated by hand / with 30-digit arithmetic
// outside this code base and frozen here.

TEST_CASE("noise constant for the reference problem") {
  const auto p = compute_params(10, 2.0, 1.0);
  CHECK(p.gap == 1.0);
  CHECK(p.S == 460.0);
}

TEST_CASE("noise constant with a zero second eigenvalue") {
  const auto p = compute_params(2, 1.0, 0.0);
  CHECK(p.gap == 1.0);
  CHECK(p.S == 26.0);
}

TEST_CASE("noise constant is scale free") {
  for (double c : {0.01, 0.5, 3.0, 1e3}) {
    const auto p = compute_params(10, 2.0 * c, 1.0 * c);
    CHECK(p.S == doctest::Approx(460.0).epsilon(1e-12));
  }
}

TEST_CASE("compute_params rejects bad input") {
  CHECK_THROWS_AS(compute_params(10, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(compute_params(10, 1.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(compute_params(1, 2.0, 1.0), InvalidArgument);
}

TEST_CASE("bound params for the reference problem") {
  const auto b = bound_params(compute_params(10, 2.0, 1.0));
  CHECK(b.t0 == 2963);  // ceil(1841 ln 5) = ceil(2962.975...)
  CHECK(b.C1 == 1842.0);
  CHECK(b.C2 == 1694640.5);
  CHECK(b.epsilon == doctest::Approx(0.1));
}

TEST_CASE("bound params in two dimensions") {
  const auto b = bound_params(compute_params(2, 1.0, 0.0));
  CHECK(b.t0 == 0);
  CHECK(b.C1 == 106.0);
  CHECK(b.C2 == 5512.5);
  CHECK(b.epsilon == 0.5);
}

TEST_CASE("warmup bound") {
  const auto p = compute_params(10, 2.0, 1.0);
  const auto b = bound_params(p);
  CHECK(warmup_bound(p, b, 0) == doctest::Approx(0.9).epsilon(1e-15));
  // 1 - 0.1 (1 + 1/1840)^2963 = 0.49977457700...
  CHECK(warmup_bound(p, b, 2963) == doctest::Approx(0.499774577002822).epsilon(1e-12));
  CHECK(warmup_bound(p, b, 2963) <= 0.5);
  CHECK_THROWS_AS(warmup_bound(p, b, 2964), InvalidArgument);
  CHECK_THROWS_AS(warmup_bound(p, b, -1), InvalidArgument);

  // Floor at zero once the geometric growth passes cos^2 = 1.
  BoundParams long_warmup = b;
  long_warmup.t0 = 100000;
  CHECK(warmup_bound(p, long_warmup, 100000) == 0.0);
}

TEST_CASE("local bound") {
  const auto p = compute_params(10, 2.0, 1.0);
  const auto b = bound_params(p);
  // Raw value at the junction is 1.5016..., clipped.
  CHECK(local_bound(b, p.S, b.t0) == 0.5);
  CHECK(local_bound(b, p.S, b.t0 + 36800) == doctest::Approx(0.0488058270133825).epsilon(1e-12));
  CHECK_THROWS_AS(local_bound(b, p.S, b.t0 - 1), InvalidArgument);
  double prev = 1.0;
  for (long k = 0; k < 40; ++k) {
    const double v = local_bound(b, p.S, b.t0 + (1L << k));
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("bound curve shape") {
  const auto p = compute_params(10, 2.0, 1.0);
  const auto b = bound_params(p);
  CHECK(bound_curve(p, b, 0) == doctest::Approx(0.9));
  CHECK(bound_curve(p, b, b.t0) == 0.5);
  double prev = 1.0;
  for (long t = 0; t <= 1000000; t += 1000) {
    const double v = bound_curve(p, b, t);
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("bound curve matches direct formula re-evaluation on random parameters") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(2, 60);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const int d = dim(rng);
    const double l2 = 3.0 * unit(rng);
    const double l1 = l2 + 0.05 + 2.0 * unit(rng);
    const auto p = compute_params(d, l1, l2);
    const auto b = bound_params(p);

    const double gap = l1 - l2;
    const double S = l1 * l2 * d * d / (gap * gap) + 13.0 * l1 * d / gap;
    CHECK(p.S == doctest::Approx(S).epsilon(1e-12));
    CHECK(b.C1 == doctest::Approx(4 * S + 2).epsilon(1e-12));
    CHECK(b.C2 == doctest::Approx((4 * S + 1) * (4 * S + 1) / 2).epsilon(1e-12));
    CHECK(b.t0 == static_cast<long>(std::ceil((4 * S + 1) * std::log(d / 2.0))));

    const long t = b.t0 + static_cast<long>(unit(rng) * 1e6);
    const double D = 4 * S + (t - b.t0);
    const double direct = std::min(0.5, (4 * S + 2) / D + (4 * S + 1) * (4 * S + 1) / 2 / (D * D));
    CHECK(bound_curve(p, b, t) == doctest::Approx(direct).epsilon(1e-12));
    if (b.t0 > 0) {
      const long tw = static_cast<long>(unit(rng) * static_cast<double>(b.t0 - 1));
      const double warm = std::max(0.0, 1.0 - (1.0 / d) * std::pow(1 + 1 / (4 * S), static_cast<double>(tw)));
      CHECK(bound_curve(p, b, tw) == doctest::Approx(warm).epsilon(1e-12));
    }
  }
}

TEST_CASE("theorem schedule respects both step-size caps") {
  for (int d : {2, 3, 10, 50}) {
    const auto p = compute_params(d, 2.0, 1.0);
    const auto s = StepSchedule::theorem_full(p);
    const double warm_hat = eta_to_eta_hat(schedule_eta(s, 0), d, p.gap);
    const double first_local_hat = eta_to_eta_hat(schedule_eta(s, s.t0), d, p.gap);
    CHECK(warm_hat == doctest::Approx(1.0 / (2.0 * p.S)).epsilon(1e-14));
    CHECK(warm_hat <= 1.0 / p.S);
    CHECK(first_local_hat <= 1.0 / (2.0 * p.S) * (1 + 1e-14));
  }
}

TEST_CASE("fixed point") {
  CHECK(fixed_point(460.0, 1.0 / 920.0) == doctest::Approx(0.25).epsilon(1e-15));
  for (double S : {2.0, 26.0, 460.0, 1e4}) CHECK(fixed_point(S, 1.0 / (2 * S)) == doctest::Approx(0.25));
  CHECK(fixed_point(460.0, 1e-12) < 1e-9);
  CHECK_THROWS_AS(fixed_point(460.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(fixed_point(460.0, 1.0 / 400.0), InvalidArgument);
}

TEST_CASE("fixed point is the stationary root of the one-step bound") {
  for (double S : {26.0, 460.0, 5000.0}) {
    for (double frac : {0.1, 0.5, 1.0}) {
      const double eh = frac / S;
      const double c2 = 1.0 - fixed_point(S, eh);
      CHECK(one_step_bound(c2, eh, S) == doctest::Approx(c2).epsilon(1e-12));
    }
  }
}

TEST_CASE("tracking plan") {
  const auto p = compute_params(10, 2.0, 1.0);
  const auto still = tracking_plan(p, 0.0);
  CHECK(still.eta_hat_star == 0.0);
  CHECK(still.x_star == 0.0);

  const auto plan = tracking_plan(p, 1e-4);
  CHECK(plan.eta_hat_star == doctest::Approx(4.66252404120157e-4).epsilon(1e-12));
  CHECK(plan.x_star == doctest::Approx(0.214576105895272).epsilon(1e-12));
  CHECK(plan.s_tilde == doctest::Approx(920.428952211791).epsilon(1e-12));
  CHECK(plan.x_star == doctest::Approx(plan.s_tilde * plan.eta_hat_star / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(tracking_plan(p, 1.0), InvalidArgument);
  CHECK_THROWS_AS(tracking_plan(p, -1e-3), InvalidArgument);
}

TEST_CASE("tracking plan optimum") {
  const auto p = compute_params(10, 2.0, 1.0);
  double prev = 0.0;
  for (double V : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    const auto plan = tracking_plan(p, V);
    CHECK(plan.x_star > prev);
    prev = plan.x_star;

    auto objective = [&](double eh) { return eh * p.S / 2 + V + V / (2 * eh); };
    const double best = objective(plan.eta_hat_star);
    CHECK(objective(plan.eta_hat_star * 1.01) > best);
    CHECK(objective(plan.eta_hat_star * 0.99) > best);
    CHECK(best == doctest::Approx(plan.x_star).epsilon(1e-12));
  }
}

TEST_CASE("moment envelopes") {
  const auto p = compute_params(10, 2.0, 1.0);
  CHECK(moment_envelopes(1.0, 0.0, p).a2 == 2.0);
  CHECK(moment_envelopes(0.0, 0.0, p).a2 == 1.0);
  CHECK(moment_envelopes(0.3, 0.0, p).a2 == doctest::Approx(1.3));
  CHECK(moment_envelopes(0.0, 0.4, p).b2 == doctest::Approx(1.4));
  CHECK_THROWS_AS(moment_envelopes(1.2, 0.0, p), InvalidArgument);
}

TEST_CASE("one-step bound") {
  CHECK(one_step_bound(0.0, 0.01, 460.0) == 0.0);
  CHECK(one_step_bound(1.0, 0.01, 460.0) == doctest::Approx(1.0 - 460.0 * 1e-4));
  CHECK(one_step_bound(0.3, 1.0 / 920.0, 460.0) == doctest::Approx(0.300293478260870).epsilon(1e-12));
}
