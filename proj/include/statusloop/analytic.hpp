#pragma once

#include <stdexcept>
#include <string>

#include "statusloop/params.hpp"

namespace statusloop {

/// Fixed-point iteration failed to reach the stopping gap within max_iter.
/// Carries the last iterate and its residual so callers can inspect how far
/// the solve got.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_iterate, double residual)
      : std::runtime_error(what), last_iterate_(last_iterate), residual_(residual) {}
  double last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  double last_iterate_;
  double residual_;
};

/// Erlang-B blocking probability B(rho, c) of a c-thread pure-loss system
/// under offered load rho.
///
/// Computed with the stable recurrence
///   B(rho, 0) = 1,   B(rho, k) = rho * B(rho, k-1) / (k + rho * B(rho, k-1)),
/// which equals the factorial-sum definition without overflow for large c.
///
/// rho must be >= 0 and c >= 0; violations throw std::invalid_argument.
double erlang_b(double rho, int c);

/// Probability that at least one of c threads is idle: 1 - B(rho, c).
double p_idle(double rho, int c);

/// Steady-state probability that exactly one thread is idle, i.e. the mass
/// the truncated-Poisson occupancy distribution puts on level c-1:
///   pi_{c-1}(rho) = (rho^{c-1}/(c-1)!) / sum_{k=0}^{c} rho^k/k!
///                 = B(rho, c-1) * (1 - B(rho, c)).
/// The product form follows from the partial-sum ratios of the two Erlang
/// blocking values and is what gets evaluated here.
double stationary_one_idle(double rho, int c);

struct FixedPointOptions {
  double tolerance = 1e-12;
  int max_iter = 500;
};

/// Effective forwarding rate lambda* in [0, lambda_in], the unique root of
///   lambda = lambda_in * (1 - B(lambda/mu, C)).
///
/// Solved by the one-line fixed-point iteration started at lambda_in; the
/// right-hand side is strictly decreasing, so the two curves cross exactly
/// once. Throws ConvergenceError if the stopping gap is not met in max_iter
/// iterations.
double solve_forwarding_rate(const SystemParams& params, FixedPointOptions opts = {});

/// Closed-form task-success probability P_idle^2 evaluated at the fixed
/// point: the arrival must see a forwarding-capable cache (P_idle) and the
/// server must hold an idle thread at admission (P_idle again, with the two
/// events treated as independent).
double p_succ_closed(const SystemParams& params);

/// Resource-exhaustion hazard rate Lambda = lambda* x B(rho, C-1): the rate of
/// admissions that seize the last idle thread. Equals lambda_in x pi_{C-1} at
/// the fixed point (same partial-sum identity as stationary_one_idle).
double hazard_rate(const SystemParams& params);

/// Probability e^{-Lambda * x} that no resource exhaustion occurs anywhere in
/// a window of fixed length x. Negative inputs throw std::domain_error.
double survival_fixed_window(double hazard, double window);

/// Laplace-Stieltjes transform of the inter-update gap Y = T + (D_k - D_{k-1})
/// with deterministic period T = 1/r_bar and i.i.d. Exp(gamma) uplink delays:
///   L_Y(s) = e^{-sT} * gamma^2 / (gamma^2 - s^2),  0 <= s < gamma.
/// The jitter transform diverges at s = gamma; callers violating the domain
/// get std::domain_error pointing at the safety frame.
double lst_inter_update_gap(double s, const SystemParams& params);

struct TransformFactors {
  double staleness;  ///< G_Y = (1 - L_Y(Lambda)) / (Lambda * E[Y])
  double uplink;     ///< G_gamma = gamma / (Lambda + gamma)
  double downlink;   ///< G_beta = beta / (Lambda + beta)
};

/// The three attenuation factors of the holding-window survival probability,
/// each in (0, 1]. At Lambda = 0 the staleness factor is defined by
/// continuity as 1. Requires Lambda < gamma and, additionally, L_Y(Lambda) < 1
/// (otherwise jitter-induced update reordering dominates and the renewal-age
/// construction behind G_Y is void); violations throw std::domain_error.
TransformFactors transform_factors(double hazard, const SystemParams& params);

/// Transform-based success probability
///   (1 - B(rho, C)) * G_Y(Lambda) * G_gamma(Lambda) * G_beta(Lambda),
/// i.e. P_idle times the survival of the full holding window. Domain errors
/// from transform_factors propagate.
double p_succ_transform(const SystemParams& params);

struct GapMoments {
  double mean_gap;           ///< E[Y] = T [s]
  double second_moment_gap;  ///< E[Y^2] = T^2 + 2/gamma^2 [s^2]
  double mean_age;           ///< E[A] = E[Y^2] / (2 E[Y]) [s]
  double mean_aoi;           ///< E[Delta] = 1/gamma + E[A] [s]
};

/// Moments of the inter-update gap and the derived stationary age / age of
/// information. The jitter D_k - D_{k-1} is zero-mean with variance
/// 2/gamma^2, so E[Y] stays at the generation period T while E[Y^2] picks up
/// the jitter variance.
GapMoments gap_moments(const SystemParams& params);

/// Ideal upper bound u_ideal = 1 - B(rho, C): instantaneous links and
/// perfectly fresh status information.
double upper_bound(const SystemParams& params);

/// Operational lower bound
///   l_opt = (1 - B(rho, C)) * e^{-Lambda (E[Delta] + 1/beta)},
/// obtained by pushing the expectation through the convex exponential
/// (Jensen), so l_opt <= p_succ_transform <= upper_bound.
double lower_bound(const SystemParams& params);

/// Every derived analytical quantity for one parameter set. When the
/// transform domain is violated (Lambda >= gamma, or L_Y(Lambda) >= 1) the
/// three factors and p_succ_transform are NaN and transform_valid is false;
/// all other fields are always populated.
struct AnalyticReport {
  double lambda_star;        ///< forwarding rate [1/s]
  double rho;                ///< offered load lambda*/mu
  double blocking;           ///< B(rho, C)
  double p_idle;             ///< 1 - B(rho, C)
  double p_one_idle;         ///< pi_{C-1}(rho), exactly one thread idle
  double hazard;             ///< Lambda [1/s]
  double g_staleness;        ///< G_Y(Lambda)
  double g_uplink;           ///< G_gamma(Lambda)
  double g_downlink;         ///< G_beta(Lambda)
  double p_succ_closed;      ///< P_idle^2
  double p_succ_transform;   ///< P_idle * G_Y * G_gamma * G_beta
  double upper;              ///< u_ideal
  double lower;              ///< l_opt
  double mean_gap;           ///< E[Y] [s]
  double second_moment_gap;  ///< E[Y^2] [s^2]
  double mean_age;           ///< E[A] [s]
  double mean_aoi;           ///< E[Delta] [s]
  bool transform_valid;
  bool safety_frame_ok;      ///< r_bar/gamma < 1 and lambda*/beta < 1
};

AnalyticReport analyze(const SystemParams& params, FixedPointOptions opts = {});

}  // namespace statusloop
