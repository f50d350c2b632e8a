#include "statusloop/analytic.hpp"

#include <cmath>
#include <limits>

namespace statusloop {

double erlang_b(double rho, int c) {
  if (rho < 0.0 || std::isnan(rho)) {
    throw std::invalid_argument("erlang_b: rho must be non-negative");
  }
  if (c < 0) {
    throw std::invalid_argument("erlang_b: c must be non-negative");
  }
  double b = 1.0;
  for (int k = 1; k <= c; ++k) {
    b = rho * b / (k + rho * b);
  }
  return b;
}

double p_idle(double rho, int c) { return 1.0 - erlang_b(rho, c); }

double stationary_one_idle(double rho, int c) {
  if (c < 1) {
    throw std::invalid_argument("stationary_one_idle: c must be at least 1");
  }
  return erlang_b(rho, c - 1) * (1.0 - erlang_b(rho, c));
}

double solve_forwarding_rate(const SystemParams& params, FixedPointOptions opts) {
  params.validate();
  if (!(opts.tolerance > 0.0)) {
    throw std::invalid_argument("solve_forwarding_rate: tolerance must be positive");
  }
  if (opts.max_iter < 1) {
    throw std::invalid_argument("solve_forwarding_rate: max_iter must be at least 1");
  }
  double lambda = params.lambda_in;
  for (int k = 0; k < opts.max_iter; ++k) {
    const double next =
        params.lambda_in * (1.0 - erlang_b(lambda / params.mu, params.c_threads));
    if (std::abs(next - lambda) < opts.tolerance) {
      return next;
    }
    lambda = next;
  }
  const double residual =
      params.lambda_in * (1.0 - erlang_b(lambda / params.mu, params.c_threads)) - lambda;
  throw ConvergenceError("solve_forwarding_rate: no convergence after " +
                             std::to_string(opts.max_iter) + " iterations",
                         lambda, residual);
}

double p_succ_closed(const SystemParams& params) {
  const double lambda = solve_forwarding_rate(params);
  const double p = p_idle(lambda / params.mu, params.c_threads);
  return p * p;
}

double hazard_rate(const SystemParams& params) {
  const double lambda = solve_forwarding_rate(params);
  return lambda * erlang_b(lambda / params.mu, params.c_threads - 1);
}

double survival_fixed_window(double hazard, double window) {
  if (hazard < 0.0 || std::isnan(hazard)) {
    throw std::domain_error("survival_fixed_window: hazard must be non-negative");
  }
  if (window < 0.0 || std::isnan(window)) {
    throw std::domain_error("survival_fixed_window: window must be non-negative");
  }
  return std::exp(-hazard * window);
}

double lst_inter_update_gap(double s, const SystemParams& params) {
  params.validate();
  if (s < 0.0 || std::isnan(s)) {
    throw std::domain_error("lst_inter_update_gap: s must be non-negative");
  }
  if (s >= params.gamma) {
    throw std::domain_error(
        "lst_inter_update_gap: s >= gamma, the jitter transform diverges; "
        "the operating point is outside the safety frame (keep the hazard "
        "rate below the uplink rate)");
  }
  const double t = params.update_period();
  return std::exp(-s * t) * params.gamma * params.gamma /
         (params.gamma * params.gamma - s * s);
}

TransformFactors transform_factors(double hazard, const SystemParams& params) {
  params.validate();
  if (hazard < 0.0 || std::isnan(hazard)) {
    throw std::domain_error("transform_factors: hazard must be non-negative");
  }
  if (hazard == 0.0) {
    return {1.0, 1.0, 1.0};  // continuity limit, avoids 0/0 in G_Y
  }
  if (hazard >= params.gamma) {
    throw std::domain_error(
        "transform_factors: hazard >= gamma, outside the safety frame; the "
        "staleness transform is undefined");
  }
  const double t = params.update_period();
  const double x = hazard * t;
  // 1 - e^{-x} g with g = gamma^2/(gamma^2 - Lambda^2), split to avoid
  // cancellation for small x:
  //   (1 - e^{-x}) - e^{-x} (g - 1)
  const double excess = hazard * hazard / (params.gamma * params.gamma - hazard * hazard);
  const double one_minus_lst = -std::expm1(-x) - std::exp(-x) * excess;
  if (!(one_minus_lst > 0.0)) {
    throw std::domain_error(
        "transform_factors: L_Y(hazard) >= 1; update reordering dominates the "
        "inter-update gap and the staleness factor is undefined");
  }
  return {one_minus_lst / x, params.gamma / (hazard + params.gamma),
          params.beta / (hazard + params.beta)};
}

double p_succ_transform(const SystemParams& params) {
  const double lambda = solve_forwarding_rate(params);
  const double rho = lambda / params.mu;
  const double hazard = lambda * erlang_b(rho, params.c_threads - 1);
  const TransformFactors g = transform_factors(hazard, params);
  return p_idle(rho, params.c_threads) * g.staleness * g.uplink * g.downlink;
}

GapMoments gap_moments(const SystemParams& params) {
  params.validate();
  const double t = params.update_period();
  GapMoments m;
  m.mean_gap = t;
  m.second_moment_gap = t * t + 2.0 / (params.gamma * params.gamma);
  m.mean_age = m.second_moment_gap / (2.0 * m.mean_gap);
  m.mean_aoi = 1.0 / params.gamma + m.mean_age;
  return m;
}

double upper_bound(const SystemParams& params) {
  const double lambda = solve_forwarding_rate(params);
  return p_idle(lambda / params.mu, params.c_threads);
}

double lower_bound(const SystemParams& params) {
  const double lambda = solve_forwarding_rate(params);
  const double rho = lambda / params.mu;
  const double hazard = lambda * erlang_b(rho, params.c_threads - 1);
  const GapMoments m = gap_moments(params);
  return p_idle(rho, params.c_threads) *
         std::exp(-hazard * (m.mean_aoi + 1.0 / params.beta));
}

AnalyticReport analyze(const SystemParams& params, FixedPointOptions opts) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  AnalyticReport r{};
  r.lambda_star = solve_forwarding_rate(params, opts);
  r.rho = r.lambda_star / params.mu;
  r.blocking = erlang_b(r.rho, params.c_threads);
  r.p_idle = 1.0 - r.blocking;
  r.p_one_idle = stationary_one_idle(r.rho, params.c_threads);
  r.hazard = r.lambda_star * erlang_b(r.rho, params.c_threads - 1);
  const GapMoments m = gap_moments(params);
  r.mean_gap = m.mean_gap;
  r.second_moment_gap = m.second_moment_gap;
  r.mean_age = m.mean_age;
  r.mean_aoi = m.mean_aoi;
  r.p_succ_closed = r.p_idle * r.p_idle;
  r.upper = r.p_idle;
  r.lower = r.p_idle * std::exp(-r.hazard * (r.mean_aoi + 1.0 / params.beta));
  try {
    const TransformFactors g = transform_factors(r.hazard, params);
    r.g_staleness = g.staleness;
    r.g_uplink = g.uplink;
    r.g_downlink = g.downlink;
    r.p_succ_transform = r.p_idle * g.staleness * g.uplink * g.downlink;
    r.transform_valid = true;
  } catch (const std::domain_error&) {
    r.g_staleness = r.g_uplink = r.g_downlink = r.p_succ_transform = nan;
    r.transform_valid = false;
  }
  r.safety_frame_ok = params.within_safety_frame(r.lambda_star);
  return r;
}

}  // namespace statusloop
