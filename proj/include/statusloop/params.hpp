#pragma once

#include <stdexcept>
#include <string>

namespace statusloop {

/// The six controllable rates/counts defining one operating scenario.
/// All rates are per second; time quantities derived from them are in seconds.
struct SystemParams {
  double lambda_in = 40.0;  ///< task-arrival rate at the AP [1/s]
  double mu = 30.0;         ///< per-thread service rate [1/s]
  int c_threads = 2;        ///< maximum concurrent server threads
  double r_bar = 20.0;      ///< status-update generation rate [1/s]
  double gamma = 100.0;     ///< uplink rate for status packets [1/s]
  double beta = 100.0;      ///< downlink rate for task packets [1/s]

  /// Status generation period T = 1/r_bar [s].
  double update_period() const { return 1.0 / r_bar; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    auto need_positive = [](double v, const char* name) {
      if (!(v > 0.0)) {
        throw std::invalid_argument(std::string(name) + " must be strictly positive");
      }
    };
    need_positive(lambda_in, "lambda_in");
    need_positive(mu, "mu");
    need_positive(r_bar, "r_bar");
    need_positive(gamma, "gamma");
    need_positive(beta, "beta");
    if (c_threads < 1) {
      throw std::invalid_argument("c_threads must be at least 1");
    }
  }

  /// Operating guideline keeping at most one packet in flight per link on
  /// average. Advisory only, never enforced at construction.
  bool within_safety_frame(double forwarding_rate) const {
    return r_bar / gamma < 1.0 && forwarding_rate / beta < 1.0;
  }
};

}  // namespace statusloop
