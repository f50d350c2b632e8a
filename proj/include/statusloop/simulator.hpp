#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>

#include "statusloop/params.hpp"

namespace statusloop {

/// Not enough observations to produce the requested estimate.
class InsufficientDataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One simulation run: periodic status generation, exponential uplink, the
/// cache-driven forward-or-drop rule at the AP, exponential downlink, and a
/// C-thread pure-loss server.
struct SimConfig {
  SystemParams params{};
  double horizon = 5000.0;  ///< simulated time during which arrivals occur [s]
  std::uint64_t seed = 1;
  /// After the horizon, stop new task arrivals but run in-flight tasks and
  /// services to completion. Disable for a strict-cutoff variant.
  bool drain = true;
  /// Test hook: forward every task regardless of the cached status.
  bool always_forward = false;
  /// Deterministic service times of exactly 1/mu instead of Exp(mu).
  bool deterministic_service = false;
  /// Instrumented mode: on every forwarding decision, assert that the cached
  /// value equals the idle count recorded when its snapshot was generated.
  bool check_cache_coherence = false;
  /// Optional event trace, one structured line per processed event.
  std::ostream* trace = nullptr;

  void validate() const {
    params.validate();
    if (!(horizon > 0.0)) {
      throw std::invalid_argument("horizon must be strictly positive");
    }
  }
};

/// Counters measured over one run. Conservation: n_arr = n_fwd + n_drop_ap
/// always, and n_fwd = n_succ + n_block_server once the run has drained.
struct SimStats {
  std::uint64_t n_arr = 0;           ///< tasks reaching the AP
  std::uint64_t n_fwd = 0;           ///< tasks forwarded to the server
  std::uint64_t n_succ = 0;          ///< tasks completing service
  std::uint64_t n_drop_ap = 0;       ///< dropped at the AP (cache showed 0)
  std::uint64_t n_block_server = 0;  ///< blocked on server arrival (no idle thread)
  std::uint64_t hazard_events = 0;   ///< admissions that took the last idle thread
  double elapsed = 0.0;              ///< observation time (the arrival horizon) [s]

  double empirical_p_succ() const {
    return static_cast<double>(n_succ) / static_cast<double>(n_arr);
  }
  double empirical_lambda() const { return static_cast<double>(n_fwd) / elapsed; }
  double empirical_hazard() const {
    return static_cast<double>(hazard_events) / elapsed;
  }

  bool operator==(const SimStats&) const = default;
};

/// Runs the event loop to completion. Identical (config, seed) pairs produce
/// bit-identical stats: one mt19937_64 stream per run, exponential sampling by
/// inverse transform -ln(U)/rate with U in (0,1], and timestamp ties broken by
/// a fixed event-kind priority then insertion order.
SimStats run_simulation(const SimConfig& config);

/// Sample moments of the inter-refresh gaps observed at the AP cache.
struct IntervalStats {
  double mean_gap;           ///< sample E[Y] [s]
  double second_moment_gap;  ///< sample E[Y^2] [s^2]
  std::size_t count;         ///< number of gaps observed
};

/// Measures inter-update gaps between successive cache refreshes. Throws
/// InsufficientDataError when the horizon yields fewer than 1000 gaps.
IntervalStats measure_interval_stats(const SimConfig& config);

}  // namespace statusloop
