#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "statusloop/analytic.hpp"
#include "statusloop/sweep.hpp"
#include "oracles.hpp"

using namespace statusloop;

namespace {

SystemParams defaults() { return SystemParams{}; }

// Monte-Carlo gap sampler: Y = T + D_k - D_{k-1} with i.i.d. Exp(gamma) delays.
std::vector<double> sample_gaps(double t, double gamma, std::size_t n,
                                std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto exp_draw = [&] { return -std::log(1.0 - unit(gen)) / gamma; };
  std::vector<double> ys(n);
  for (double& y : ys) y = t + exp_draw() - exp_draw();
  return ys;
}

}  // namespace

TEST_CASE("erlang_b matches hand values and rejects bad input") {
  CHECK(erlang_b(0.0, 2) == doctest::Approx(0.0));
  CHECK(erlang_b(1.5, 0) == doctest::Approx(1.0));
  CHECK(erlang_b(4.0 / 3.0, 2) == doctest::Approx(8.0 / 29.0).epsilon(1e-14));
  CHECK_THROWS_AS(erlang_b(-0.1, 2), std::invalid_argument);
  CHECK_THROWS_AS(erlang_b(1.0, -1), std::invalid_argument);
}

TEST_CASE("erlang_b recurrence equals the factorial-sum definition") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double rho = unit(rng) * 50.0 + 1e-9;
    const int c = 1 + static_cast<int>(unit(rng) * 64.0);
    const double ref = oracles::erlang_b_sum(rho, c);
    CHECK(std::abs(erlang_b(rho, c) - ref) / ref <= 1e-12);
  }
}

TEST_CASE("erlang_b is increasing in load and decreasing in capacity") {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double rho = unit(rng) * 20.0 + 1e-6;
    const int c = 1 + static_cast<int>(unit(rng) * 16.0);
    CHECK(erlang_b(rho * 1.1, c) > erlang_b(rho, c));
    CHECK(erlang_b(rho, c + 1) < erlang_b(rho, c));
  }
}

TEST_CASE("p_idle complements blocking and dies off under overload") {
  CHECK(p_idle(0.0, 2) == doctest::Approx(1.0));
  CHECK(p_idle(4.0 / 3.0, 2) == doctest::Approx(21.0 / 29.0).epsilon(1e-14));
  CHECK(p_idle(10.0, 1) > p_idle(100.0, 1));
  CHECK(p_idle(100.0, 1) > p_idle(10000.0, 1));
  CHECK(p_idle(1e9, 1) < 1e-8);
}

TEST_CASE("stationary distribution oracle: P_idle and P_1 for C <= 6") {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c <= 6; ++c) {
    for (int i = 0; i < 100; ++i) {
      const double rho = unit(rng) * 10.0 + 1e-6;
      const std::vector<double> pi = oracles::truncated_poisson(rho, c);
      double idle_mass = 0.0;
      for (int k = 0; k < c; ++k) idle_mass += pi[k];
      CHECK(std::abs(p_idle(rho, c) - idle_mass) <= 1e-12);
      CHECK(std::abs(stationary_one_idle(rho, c) - pi[c - 1]) <= 1e-12);
    }
  }
}

TEST_CASE("forwarding rate fixed point agrees with the bisection oracle") {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    SystemParams p;
    p.lambda_in = 5.0 + unit(rng) * 55.0;
    p.mu = 20.0 + unit(rng) * 40.0;
    p.c_threads = 1 + static_cast<int>(unit(rng) * 6.0);
    const double fp = solve_forwarding_rate(p);
    CHECK(fp >= 0.0);
    CHECK(fp <= p.lambda_in);
    CHECK(std::abs(fp - oracles::bisect_forwarding_rate(p)) <= 1e-9);
  }
}

TEST_CASE("forwarding rate: reference point and limit cases") {
  SystemParams p = defaults();
  CHECK(solve_forwarding_rate(p) == doctest::Approx(31.52).epsilon(5e-4));

  p.lambda_in = 10.0;
  p.mu = 1000.0;
  CHECK(solve_forwarding_rate(p) == doctest::Approx(10.0).epsilon(1e-3));

  p = defaults();
  p.lambda_in = 5.0;
  const double lam = solve_forwarding_rate(p);
  CHECK(lam > 0.0);
  CHECK(lam <= 5.0);
  CHECK(p_idle(lam / p.mu, p.c_threads) > 0.95);
}

TEST_CASE("forwarding rate solver reports non-convergence") {
  SystemParams p = defaults();
  FixedPointOptions opts;
  opts.max_iter = 2;
  opts.tolerance = 1e-15;
  try {
    solve_forwarding_rate(p, opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_iterate() > 0.0);
    CHECK(e.last_iterate() <= p.lambda_in);
    CHECK(std::isfinite(e.residual()));
  }
  opts.max_iter = 500;
  opts.tolerance = -1.0;
  CHECK_THROWS_AS(solve_forwarding_rate(p, opts), std::invalid_argument);
}

TEST_CASE("closed-form success probability") {
  const SystemParams p = defaults();
  const double oracle_lambda = oracles::bisect_forwarding_rate(p);
  const double oracle_p = 1.0 - oracles::erlang_b_sum(oracle_lambda / p.mu, p.c_threads);
  CHECK(p_succ_closed(p) == doctest::Approx(oracle_p * oracle_p).epsilon(1e-9));
  CHECK(p_succ_closed(p) == doctest::Approx(0.621).epsilon(2e-3));

  SystemParams roomy = defaults();
  roomy.c_threads = 12;
  CHECK(p_succ_closed(roomy) > 0.9999);

  // decreasing along the arrival-rate grid, lowest at lambda_in = 60
  double prev = 1.0;
  for (double lam_in : {5.0, 20.0, 40.0, 60.0}) {
    SystemParams q = defaults();
    q.lambda_in = lam_in;
    const double value = p_succ_closed(q);
    CHECK(value < prev);
    prev = value;
  }
}

TEST_CASE("hazard rate: reference values and the full-rate identity") {
  const SystemParams p = defaults();
  CHECK(hazard_rate(p) == doctest::Approx(16.1).epsilon(5e-3));

  SystemParams single = defaults();
  single.c_threads = 1;
  CHECK(hazard_rate(single) ==
        doctest::Approx(solve_forwarding_rate(single)).epsilon(1e-12));

  // lambda* B(rho, C-1) == lambda_in pi_{C-1}(rho) whenever lambda* solves the
  // fixed point: 1 - B(rho, C) is the partial-sum ratio Z_{C-1}/Z_C.
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    SystemParams q;
    q.lambda_in = 5.0 + unit(rng) * 55.0;
    q.mu = 20.0 + unit(rng) * 40.0;
    q.c_threads = 1 + static_cast<int>(unit(rng) * 6.0);
    const double lam = solve_forwarding_rate(q);
    const double rho = lam / q.mu;
    const double via_lambda_in =
        q.lambda_in * oracles::truncated_poisson(rho, q.c_threads)[q.c_threads - 1];
    CHECK(hazard_rate(q) == doctest::Approx(via_lambda_in).epsilon(1e-10));
    CHECK(hazard_rate(q) <= lam + 1e-12);
  }
}

TEST_CASE("fixed-window survival probability") {
  CHECK(survival_fixed_window(12.3, 0.0) == doctest::Approx(1.0));
  CHECK(survival_fixed_window(0.0, 9.9) == doctest::Approx(1.0));
  CHECK(survival_fixed_window(16.1, 0.047) == doctest::Approx(0.469).epsilon(2e-3));
  CHECK_THROWS_AS(survival_fixed_window(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(survival_fixed_window(1.0, -1.0), std::domain_error);
}

TEST_CASE("inter-update gap transform") {
  const SystemParams p = defaults();
  CHECK(lst_inter_update_gap(0.0, p) == doctest::Approx(1.0));
  CHECK_THROWS_AS(lst_inter_update_gap(p.gamma, p), std::domain_error);
  CHECK_THROWS_AS(lst_inter_update_gap(-0.5, p), std::domain_error);

  const double hazard = hazard_rate(p);
  CHECK(lst_inter_update_gap(hazard, p) == doctest::Approx(0.458).epsilon(2e-3));

  // small-s expansion: derivative at 0 is -E[Y]
  auto lst = [&](double s) { return lst_inter_update_gap(s, p); };
  const double slope = oracles::derivative(lst, 1e-6, 1e-6);
  CHECK(std::abs(slope + gap_moments(p).mean_gap) / gap_moments(p).mean_gap <= 1e-4);

  // Monte-Carlo transform of the sampled gap distribution
  const std::vector<double> ys = sample_gaps(p.update_period(), p.gamma, 1000000, 777);
  std::vector<double> transformed(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) transformed[i] = std::exp(-hazard * ys[i]);
  const oracles::SampleMoments m = oracles::moments(transformed);
  CHECK(std::abs(lst(hazard) - m.mean) <= 4.0 * m.se_mean);
}

TEST_CASE("transform factors") {
  const SystemParams p = defaults();
  const TransformFactors at_zero = transform_factors(0.0, p);
  CHECK(at_zero.staleness == doctest::Approx(1.0));
  CHECK(at_zero.uplink == doctest::Approx(1.0));
  CHECK(at_zero.downlink == doctest::Approx(1.0));

  const double hazard = hazard_rate(p);
  const TransformFactors g = transform_factors(hazard, p);
  CHECK(g.staleness == doctest::Approx(0.671).epsilon(2e-3));
  CHECK(g.uplink == doctest::Approx(0.861).epsilon(2e-3));
  CHECK(g.downlink == doctest::Approx(0.861).epsilon(2e-3));

  // consistent with the transform evaluated directly
  const double direct = (1.0 - lst_inter_update_gap(hazard, p)) /
                        (hazard * gap_moments(p).mean_gap);
  CHECK(g.staleness == doctest::Approx(direct).epsilon(1e-10));

  SystemParams fast = p;
  fast.gamma = 1e12;
  CHECK(transform_factors(hazard, fast).uplink == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(transform_factors(p.gamma + 1.0, p), std::domain_error);
}

TEST_CASE("transform-based success probability and its limits") {
  const SystemParams p = defaults();
  CHECK(p_succ_transform(p) == doctest::Approx(0.392).epsilon(3e-3));

  SystemParams fast_links = p;
  fast_links.gamma = 1e8;
  fast_links.beta = 1e8;
  const double hazard = hazard_rate(fast_links);
  const double staleness_only =
      upper_bound(fast_links) * transform_factors(hazard, fast_links).staleness;
  CHECK(std::abs(p_succ_transform(fast_links) - staleness_only) <= 1e-4);

  SystemParams ideal = fast_links;
  ideal.r_bar = 1e8;
  CHECK(std::abs(p_succ_transform(ideal) - upper_bound(ideal)) <= 1e-4);
}

TEST_CASE("gap moments: closed form, limits and Monte-Carlo oracle") {
  const SystemParams p = defaults();
  const GapMoments m = gap_moments(p);
  CHECK(m.mean_gap == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(m.second_moment_gap == doctest::Approx(0.0027).epsilon(1e-12));
  CHECK(m.mean_age == doctest::Approx(0.027).epsilon(1e-12));
  CHECK(m.mean_aoi == doctest::Approx(0.037).epsilon(1e-12));
  // equivalent age form T/2 + 1/(T gamma^2)
  CHECK(m.mean_age ==
        doctest::Approx(0.5 * m.mean_gap + 1.0 / (m.mean_gap * p.gamma * p.gamma))
            .epsilon(1e-12));

  SystemParams no_jitter = p;
  no_jitter.gamma = 1e9;
  const GapMoments nj = gap_moments(no_jitter);
  CHECK(nj.second_moment_gap == doctest::Approx(0.0025).epsilon(1e-9));
  CHECK(nj.mean_age == doctest::Approx(0.025).epsilon(1e-9));

  const std::vector<double> ys = sample_gaps(p.update_period(), p.gamma, 1000000, 888);
  const oracles::SampleMoments sm = oracles::moments(ys);
  CHECK(std::abs(sm.mean - m.mean_gap) <= 4.0 * sm.se_mean);
  CHECK(std::abs(sm.second - m.second_moment_gap) <= 4.0 * sm.se_second);
}

TEST_CASE("upper bound") {
  const SystemParams p = defaults();
  const double oracle =
      1.0 - oracles::erlang_b_sum(oracles::bisect_forwarding_rate(p) / p.mu, p.c_threads);
  CHECK(upper_bound(p) == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(upper_bound(p) == doctest::Approx(0.788).epsilon(2e-3));

  SystemParams six = p;
  six.c_threads = 6;
  CHECK(upper_bound(six) > 0.99);

  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    SystemParams q;
    q.lambda_in = 5.0 + unit(rng) * 55.0;
    q.mu = 20.0 + unit(rng) * 40.0;
    q.c_threads = 1 + static_cast<int>(unit(rng) * 6.0);
    CHECK(upper_bound(q) >= p_succ_closed(q));
  }
}

TEST_CASE("lower bound") {
  const SystemParams p = defaults();
  CHECK(lower_bound(p) == doctest::Approx(0.369).epsilon(3e-3));

  SystemParams roomy = p;
  roomy.c_threads = 40;  // hazard effectively zero
  CHECK(lower_bound(roomy) > 0.9999);
}

TEST_CASE("ordering chain over the standard sweep grids") {
  for (const SweepSpec& spec : default_sweeps()) {
    for (double value : spec.grid) {
      const SystemParams p = apply_varied(spec.base, spec.varied, value);
      const AnalyticReport r = analyze(p);
      REQUIRE(r.transform_valid);
      CHECK(r.lower >= 0.0);
      CHECK(r.lower <= r.p_succ_transform + 1e-12);
      CHECK(r.p_succ_transform <= r.upper + 1e-12);
      CHECK(r.upper <= 1.0);
      CHECK(r.g_staleness > 0.0);
      CHECK(r.g_staleness <= 1.0);
      CHECK(r.g_uplink > 0.0);
      CHECK(r.g_uplink <= 1.0);
      CHECK(r.g_downlink > 0.0);
      CHECK(r.g_downlink <= 1.0);
    }
  }
}

TEST_CASE("ordering chain over random parameters") {
  // r_bar stays below 0.7 gamma so jitter-induced update reordering remains a
  // negligible correction to the renewal-age construction behind G_Y.
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    SystemParams p;
    p.lambda_in = 5.0 + unit(rng) * 55.0;
    p.mu = 20.0 + unit(rng) * 40.0;
    p.c_threads = 1 + static_cast<int>(unit(rng) * 6.0);
    p.gamma = 60.0 + unit(rng) * 140.0;
    p.beta = 60.0 + unit(rng) * 140.0;
    p.r_bar = 5.0 + unit(rng) * (0.7 * p.gamma - 5.0);
    const AnalyticReport r = analyze(p);
    REQUIRE(r.transform_valid);
    CHECK(r.lower >= 0.0);
    CHECK(r.lower <= r.p_succ_transform + 1e-12);
    CHECK(r.p_succ_transform <= r.upper + 1e-12);
    CHECK(r.upper <= 1.0);
  }
}

TEST_CASE("analytic report consistency") {
  const SystemParams p = defaults();
  const AnalyticReport r = analyze(p);
  CHECK(r.lambda_star == doctest::Approx(solve_forwarding_rate(p)).epsilon(1e-15));
  CHECK(r.rho == doctest::Approx(r.lambda_star / p.mu).epsilon(1e-15));
  CHECK(r.p_idle == doctest::Approx(1.0 - r.blocking).epsilon(1e-15));
  CHECK(r.p_succ_closed == doctest::Approx(r.p_idle * r.p_idle).epsilon(1e-15));
  CHECK(r.upper == doctest::Approx(r.p_idle).epsilon(1e-15));
  CHECK(r.lambda_star <= p.lambda_in);
  CHECK(r.hazard <= r.lambda_star);
  CHECK(r.hazard == doctest::Approx(hazard_rate(p)).epsilon(1e-15));
  CHECK(r.p_succ_transform == doctest::Approx(p_succ_transform(p)).epsilon(1e-15));
  CHECK(r.lower == doctest::Approx(lower_bound(p)).epsilon(1e-12));
  CHECK(r.transform_valid);
  CHECK(r.safety_frame_ok);
}

TEST_CASE("analytic report marks an undefined transform") {
  SystemParams p = defaults();
  p.lambda_in = 60.0;
  p.c_threads = 1;
  p.gamma = 20.0;  // hazard = lambda* = 30 exceeds the uplink rate
  const AnalyticReport r = analyze(p);
  CHECK(!r.transform_valid);
  CHECK(std::isnan(r.p_succ_transform));
  CHECK(std::isnan(r.g_staleness));
  CHECK(std::isfinite(r.p_succ_closed));
  CHECK(std::isfinite(r.lower));
  CHECK(!r.safety_frame_ok);
  CHECK(r.hazard == doctest::Approx(r.lambda_star).epsilon(1e-12));
}

TEST_CASE("parameter validation names the offending field") {
  SystemParams p = defaults();
  p.c_threads = 0;
  CHECK_THROWS_WITH_AS(p.validate(), "c_threads must be at least 1",
                       std::invalid_argument);
  p = defaults();
  p.mu = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), "mu must be strictly positive",
                       std::invalid_argument);
  p = defaults();
  p.r_bar = -3.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
