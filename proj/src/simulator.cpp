#include "statusloop/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <vector>

namespace statusloop {
namespace {

// Tie priority at equal timestamps: free capacity first, then admit, then
// refresh the cache, then decide on new tasks, then sample new snapshots.
enum class EventKind : std::uint8_t {
  ServiceCompleted = 0,
  TaskArrivedAtServer = 1,
  StatusArrivedAtAp = 2,
  TaskArrivedAtAp = 3,
  StatusGenerated = 4,
};

struct Event {
  double time;
  EventKind kind;
  std::uint64_t seq;
  double gen_time;  // status payload: snapshot generation time
  int snapshot;     // status payload: idle count at generation
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::ServiceCompleted: return "service_completed";
    case EventKind::TaskArrivedAtServer: return "task_arrived_at_server";
    case EventKind::StatusArrivedAtAp: return "status_arrived_at_ap";
    case EventKind::TaskArrivedAtAp: return "task_arrived_at_ap";
    case EventKind::StatusGenerated: return "status_generated";
  }
  return "?";
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Inverse transform with U in (0,1]; U = 1 maps to 0.
  double exponential(double rate) {
    const double u = ((gen_() >> 11) + 1) * 0x1.0p-53;
    return -std::log(u) / rate;
  }

 private:
  std::mt19937_64 gen_;
};

struct TraceWriter {
  std::ostream* out;
  void line(const Event& e, const char* extra_key = nullptr, long long extra_val = 0) {
    if (!out) return;
    char buf[160];
    int n = std::snprintf(buf, sizeof(buf), "{\"t\":%.9g,\"kind\":\"%s\"", e.time,
                          kind_name(e.kind));
    if (e.kind == EventKind::StatusGenerated || e.kind == EventKind::StatusArrivedAtAp) {
      n += std::snprintf(buf + n, sizeof(buf) - n, ",\"gen\":%.9g,\"c\":%d", e.gen_time,
                         e.snapshot);
    }
    if (extra_key) {
      n += std::snprintf(buf + n, sizeof(buf) - n, ",\"%s\":%lld", extra_key, extra_val);
    }
    std::snprintf(buf + n, sizeof(buf) - n, "}");
    (*out) << buf << '\n';
  }
};

SimStats run_core(const SimConfig& config, std::vector<double>* refresh_times) {
  config.validate();
  const SystemParams& p = config.params;
  const double horizon = config.horizon;
  const double period = p.update_period();

  Rng rng(config.seed);
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
  std::uint64_t seq = 0;
  auto schedule = [&](double time, EventKind kind, double gen_time = 0.0,
                      int snapshot = 0) {
    queue.push(Event{time, kind, seq++, gen_time, snapshot});
  };

  int idle = p.c_threads;
  int cache_value = p.c_threads;  // true state at t = 0
  double cache_gen = -std::numeric_limits<double>::infinity();

  // Snapshot history for the coherence assertion, indexed by generation count.
  std::vector<int> generated_snapshots;

  SimStats stats;
  stats.elapsed = horizon;
  TraceWriter trace{config.trace};

  schedule(0.0, EventKind::StatusGenerated);
  {
    const double first = rng.exponential(p.lambda_in);
    if (first <= horizon) schedule(first, EventKind::TaskArrivedAtAp);
  }

  while (!queue.empty()) {
    const Event e = queue.top();
    queue.pop();
    if (!config.drain && e.time > horizon) break;

    switch (e.kind) {
      case EventKind::StatusGenerated: {
        if (config.check_cache_coherence) generated_snapshots.push_back(idle);
        schedule(e.time + rng.exponential(p.gamma), EventKind::StatusArrivedAtAp,
                 e.time, idle);
        const double next = e.time + period;
        if (next <= horizon) schedule(next, EventKind::StatusGenerated);
        trace.line({e.time, e.kind, 0, e.time, idle});
        break;
      }
      case EventKind::StatusArrivedAtAp: {
        const bool accepted = e.gen_time > cache_gen;
        if (accepted) {  // stale or reordered updates are discarded
          cache_gen = e.gen_time;
          cache_value = e.snapshot;
          if (refresh_times) refresh_times->push_back(e.time);
        }
        trace.line(e, "accepted", accepted ? 1 : 0);
        break;
      }
      case EventKind::TaskArrivedAtAp: {
        ++stats.n_arr;
        if (config.check_cache_coherence && cache_gen >= 0.0) {
          const auto k = static_cast<std::size_t>(std::llround(cache_gen / period));
          if (k >= generated_snapshots.size() || generated_snapshots[k] != cache_value) {
            throw std::logic_error("cache incoherent with generation-time state");
          }
        }
        const bool forward = config.always_forward || cache_value > 0;
        if (forward) {
          ++stats.n_fwd;
          schedule(e.time + rng.exponential(p.beta), EventKind::TaskArrivedAtServer);
        } else {
          ++stats.n_drop_ap;
        }
        const double next = e.time + rng.exponential(p.lambda_in);
        if (next <= horizon) schedule(next, EventKind::TaskArrivedAtAp);
        trace.line(e, "forwarded", forward ? 1 : 0);
        break;
      }
      case EventKind::TaskArrivedAtServer: {
        const bool admitted = idle > 0;
        if (admitted) {
          if (idle == 1) ++stats.hazard_events;
          --idle;
          const double service =
              config.deterministic_service ? 1.0 / p.mu : rng.exponential(p.mu);
          schedule(e.time + service, EventKind::ServiceCompleted);
        } else {
          ++stats.n_block_server;
        }
        trace.line(e, "admitted", admitted ? 1 : 0);
        break;
      }
      case EventKind::ServiceCompleted: {
        ++idle;
        ++stats.n_succ;
        if (idle > p.c_threads) {
          throw std::logic_error("idle thread count exceeded capacity");
        }
        trace.line(e, "idle", idle);
        break;
      }
    }
  }
  return stats;
}

}  // namespace

SimStats run_simulation(const SimConfig& config) { return run_core(config, nullptr); }

IntervalStats measure_interval_stats(const SimConfig& config) {
  std::vector<double> refreshes;
  run_core(config, &refreshes);
  if (refreshes.size() < 1001) {
    throw InsufficientDataError(
        "measure_interval_stats: fewer than 1000 inter-update gaps observed; "
        "increase the horizon or the update rate");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 1; i < refreshes.size(); ++i) {
    const double gap = refreshes[i] - refreshes[i - 1];
    sum += gap;
    sum_sq += gap * gap;
  }
  const auto n = static_cast<double>(refreshes.size() - 1);
  return {sum / n, sum_sq / n, refreshes.size() - 1};
}

}  // namespace statusloop
