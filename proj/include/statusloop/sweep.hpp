#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "statusloop/simulator.hpp"

namespace statusloop {

/// One-factor-at-a-time experiment: vary a single parameter across a grid
/// while everything else stays at the defaults.
struct SweepSpec {
  std::string varied;         ///< lambda_in | mu | c_threads | r_bar | gamma | beta
  std::vector<double> grid;   ///< ordered grid values for the varied parameter
  SystemParams base{};        ///< defaults for the non-varied parameters
  double horizon = 5000.0;
  std::vector<std::uint64_t> seeds;  ///< one simulation per (value, seed)
};

std::vector<std::uint64_t> default_seeds();  // {1, ..., 10}

/// The names accepted by default_sweep / the CLI, in canonical order.
const std::vector<std::string>& sweep_names();

/// The six standard sweeps: 12 evenly spaced points for the continuous
/// ranges (lambda_in in [5,60], mu in [20,60], r_bar in [5,100], gamma and
/// beta in [60,200]) and the exact set {1..6} for c_threads.
std::vector<SweepSpec> default_sweeps();

/// Single named standard sweep; unknown names throw std::invalid_argument
/// listing the valid ones.
SweepSpec default_sweep(std::string_view name);

/// The base params with the varied parameter replaced. For c_threads the
/// value must be integral.
SystemParams apply_varied(const SystemParams& base, std::string_view varied,
                          double value);

/// Theory-versus-simulation record for one grid value. Analytic columns are
/// nullopt when the corresponding computation failed (recorded as NA in the
/// CSV, never aborting the sweep).
struct SweepRow {
  double value;
  double p_succ_mean;  ///< mean empirical success probability across seeds
  double p_succ_se;    ///< its standard error
  std::optional<double> p_succ_closed;
  std::optional<double> p_succ_transform;
  std::optional<double> upper;
  std::optional<double> lower;
  double empirical_lambda;  ///< mean forwarding rate across seeds
  std::optional<double> lambda_star;
  double empirical_hazard;  ///< mean exhaustion rate across seeds
  std::optional<double> hazard;
};

/// Runs the simulator for every (value, seed) pair, fanning jobs out over
/// `threads` workers (0 = hardware concurrency). Rows come back in grid
/// order; aggregation order is fixed, so results are reproducible regardless
/// of scheduling. When per_seed_p_succ is given it receives, per grid value,
/// the per-seed empirical success probabilities in seed order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads = 0,
                                std::vector<std::vector<double>>* per_seed_p_succ = nullptr);

/// Per-point simulation fan-out used by run_sweep: one SimStats per seed, in
/// seed order.
std::vector<SimStats> run_point(const SystemParams& params, double horizon,
                                const std::vector<std::uint64_t>& seeds,
                                unsigned threads = 0);

struct Aggregate {
  double mean;
  double se;     ///< standard error of the mean
  double ci_lo;  ///< 95% normal-approximation interval
  double ci_hi;
};

/// Streaming (Welford) mean/variance over per-seed values; requires at least
/// two values, otherwise throws InsufficientDataError.
Aggregate aggregate_seeds(const std::vector<double>& values);

struct EnclosureViolation {
  double value;
  double p_succ_mean;
  double lower;
  double upper;
};

/// Agreement summary for one completed sweep.
struct ComparisonReport {
  double slack;
  std::optional<double> max_closed_gap;  ///< max |mean - p_succ_closed|
  std::vector<EnclosureViolation> violations;
  std::optional<double> bound_gap_first;  ///< upper - lower at the first grid value
  std::optional<double> bound_gap_last;   ///< and at the last one
};

/// Flags rows whose mean success probability falls outside
/// [lower - slack, upper + slack]; rows with NA bounds are skipped.
ComparisonReport check_enclosure(const std::vector<SweepRow>& rows, double slack = 0.02);

/// CSV with one header row naming all SweepRow fields, '.' decimal separator,
/// 6 significant digits, and literal NA cells. Byte-identical for identical
/// inputs.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// The ComparisonReport as a JSON object (stable key order).
std::string comparison_to_json(const ComparisonReport& report, std::string_view sweep);

/// Simple static line chart: empirical means as circle markers plus the
/// closed-form, upper and lower curves.
void write_sweep_svg(std::ostream& out, std::string_view title,
                     const std::vector<SweepRow>& rows);

/// "%.6g" rendering used for all user-facing numbers; NaN renders as NA.
std::string format_value(double v);
std::string format_cell(const std::optional<double>& v);

}  // namespace statusloop
