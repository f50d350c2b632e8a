#include "statusloop/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "statusloop/analytic.hpp"

namespace statusloop {

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> seeds(10);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i + 1;
  return seeds;
}

const std::vector<std::string>& sweep_names() {
  static const std::vector<std::string> names = {"lambda_in", "mu",    "c_threads",
                                                 "r_bar",     "gamma", "beta"};
  return names;
}

namespace {

std::vector<double> linear_grid(double lo, double hi, int points) {
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  return grid;
}

}  // namespace

std::vector<SweepSpec> default_sweeps() {
  SweepSpec base;
  base.base = SystemParams{};
  base.horizon = 5000.0;
  base.seeds = default_seeds();

  std::vector<SweepSpec> specs;
  for (const std::string& name : sweep_names()) {
    SweepSpec s = base;
    s.varied = name;
    if (name == "lambda_in") s.grid = linear_grid(5.0, 60.0, 12);
    else if (name == "mu") s.grid = linear_grid(20.0, 60.0, 12);
    else if (name == "c_threads") s.grid = {1, 2, 3, 4, 5, 6};
    else if (name == "r_bar") s.grid = linear_grid(5.0, 100.0, 12);
    else s.grid = linear_grid(60.0, 200.0, 12);  // gamma, beta
    specs.push_back(std::move(s));
  }
  return specs;
}

SweepSpec default_sweep(std::string_view name) {
  for (SweepSpec& s : default_sweeps()) {
    if (s.varied == name) return std::move(s);
  }
  std::string valid;
  for (const std::string& n : sweep_names()) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw std::invalid_argument("unknown sweep '" + std::string(name) +
                              "'; valid names: " + valid);
}

SystemParams apply_varied(const SystemParams& base, std::string_view varied,
                          double value) {
  SystemParams p = base;
  if (varied == "lambda_in") p.lambda_in = value;
  else if (varied == "mu") p.mu = value;
  else if (varied == "c_threads") {
    const double rounded = std::round(value);
    if (std::abs(value - rounded) > 1e-9) {
      throw std::invalid_argument("c_threads grid values must be integers");
    }
    p.c_threads = static_cast<int>(rounded);
  } else if (varied == "r_bar") p.r_bar = value;
  else if (varied == "gamma") p.gamma = value;
  else if (varied == "beta") p.beta = value;
  else throw std::invalid_argument("unknown varied parameter '" + std::string(varied) + "'");
  return p;
}

std::vector<SimStats> run_point(const SystemParams& params, double horizon,
                                const std::vector<std::uint64_t>& seeds,
                                unsigned threads) {
  std::vector<SimStats> stats(seeds.size());
  std::vector<std::exception_ptr> failures(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1)) {
      try {
        SimConfig cfg;
        cfg.params = params;
        cfg.horizon = horizon;
        cfg.seed = seeds[i];
        stats[i] = run_simulation(cfg);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return stats;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads,
                                std::vector<std::vector<double>>* per_seed_p_succ) {
  if (spec.grid.empty()) throw std::invalid_argument("sweep grid must be non-empty");
  if (spec.seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");

  const std::size_t n_values = spec.grid.size();
  const std::size_t n_seeds = spec.seeds.size();

  // One flat job list over (value, seed); each job writes only its own slots,
  // so the result layout is independent of scheduling.
  std::vector<SimStats> stats(n_values * n_seeds);
  std::vector<std::string> job_errors(n_values * n_seeds);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next.fetch_add(1); j < stats.size(); j = next.fetch_add(1)) {
      try {
        SimConfig cfg;
        cfg.params = apply_varied(spec.base, spec.varied, spec.grid[j / n_seeds]);
        cfg.horizon = spec.horizon;
        cfg.seed = spec.seeds[j % n_seeds];
        stats[j] = run_simulation(cfg);
      } catch (const std::exception& e) {
        job_errors[j] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<std::string> errors(n_values);
  for (std::size_t j = 0; j < job_errors.size(); ++j) {
    if (!job_errors[j].empty() && errors[j / n_seeds].empty()) {
      errors[j / n_seeds] = job_errors[j];
    }
  }

  if (per_seed_p_succ) per_seed_p_succ->assign(n_values, {});

  std::vector<SweepRow> rows;
  rows.reserve(n_values);
  for (std::size_t vi = 0; vi < n_values; ++vi) {
    SweepRow row{};
    row.value = spec.grid[vi];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!errors[vi].empty()) {
      row.p_succ_mean = row.p_succ_se = row.empirical_lambda = row.empirical_hazard = nan;
      rows.push_back(row);
      continue;
    }

    std::vector<double> p_succ(n_seeds), lambda(n_seeds), hazard(n_seeds);
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const SimStats& s = stats[vi * n_seeds + si];
      p_succ[si] = s.empirical_p_succ();
      lambda[si] = s.empirical_lambda();
      hazard[si] = s.empirical_hazard();
    }
    if (per_seed_p_succ) (*per_seed_p_succ)[vi] = p_succ;
    if (n_seeds >= 2) {
      const Aggregate a = aggregate_seeds(p_succ);
      row.p_succ_mean = a.mean;
      row.p_succ_se = a.se;
      row.empirical_lambda = aggregate_seeds(lambda).mean;
      row.empirical_hazard = aggregate_seeds(hazard).mean;
    } else {
      row.p_succ_mean = p_succ[0];
      row.p_succ_se = 0.0;
      row.empirical_lambda = lambda[0];
      row.empirical_hazard = hazard[0];
    }

    try {
      const SystemParams p = apply_varied(spec.base, spec.varied, spec.grid[vi]);
      const AnalyticReport r = analyze(p);
      row.p_succ_closed = r.p_succ_closed;
      row.upper = r.upper;
      row.lower = r.lower;
      row.lambda_star = r.lambda_star;
      row.hazard = r.hazard;
      if (r.transform_valid) row.p_succ_transform = r.p_succ_transform;
    } catch (const std::exception&) {
      // analytic columns stay NA
    }
    rows.push_back(row);
  }
  return rows;
}

Aggregate aggregate_seeds(const std::vector<double>& values) {
  if (values.size() < 2) {
    throw InsufficientDataError("aggregate_seeds: need at least two values");
  }
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  const double variance = m2 / static_cast<double>(n - 1);
  const double se = std::sqrt(variance / static_cast<double>(n));
  return {mean, se, mean - 1.96 * se, mean + 1.96 * se};
}

ComparisonReport check_enclosure(const std::vector<SweepRow>& rows, double slack) {
  if (slack < 0.0) throw std::invalid_argument("slack must be non-negative");
  ComparisonReport report;
  report.slack = slack;
  for (const SweepRow& row : rows) {
    if (row.p_succ_closed && !std::isnan(row.p_succ_mean)) {
      const double gap = std::abs(row.p_succ_mean - *row.p_succ_closed);
      if (!report.max_closed_gap || gap > *report.max_closed_gap) {
        report.max_closed_gap = gap;
      }
    }
    if (row.lower && row.upper && !std::isnan(row.p_succ_mean)) {
      if (row.p_succ_mean < *row.lower - slack || row.p_succ_mean > *row.upper + slack) {
        report.violations.push_back({row.value, row.p_succ_mean, *row.lower, *row.upper});
      }
    }
  }
  auto bound_gap = [](const SweepRow& row) -> std::optional<double> {
    if (row.lower && row.upper) return *row.upper - *row.lower;
    return std::nullopt;
  };
  if (!rows.empty()) {
    report.bound_gap_first = bound_gap(rows.front());
    report.bound_gap_last = bound_gap(rows.back());
  }
  return report;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string format_cell(const std::optional<double>& v) {
  return v ? format_value(*v) : "NA";
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "value,p_succ_mean,p_succ_se,p_succ_closed,p_succ_transform,upper,lower,"
         "empirical_lambda,lambda_star,empirical_hazard,hazard\n";
  for (const SweepRow& r : rows) {
    out << format_value(r.value) << ',' << format_value(r.p_succ_mean) << ','
        << format_value(r.p_succ_se) << ',' << format_cell(r.p_succ_closed) << ','
        << format_cell(r.p_succ_transform) << ',' << format_cell(r.upper) << ','
        << format_cell(r.lower) << ',' << format_value(r.empirical_lambda) << ','
        << format_cell(r.lambda_star) << ',' << format_value(r.empirical_hazard) << ','
        << format_cell(r.hazard) << '\n';
  }
}

std::string comparison_to_json(const ComparisonReport& report, std::string_view sweep) {
  nlohmann::ordered_json j;
  j["sweep"] = std::string(sweep);
  j["slack"] = report.slack;
  if (report.max_closed_gap) j["max_closed_form_gap"] = *report.max_closed_gap;
  else j["max_closed_form_gap"] = nullptr;
  nlohmann::ordered_json violations = nlohmann::ordered_json::array();
  for (const EnclosureViolation& v : report.violations) {
    nlohmann::ordered_json item;
    item["value"] = v.value;
    item["p_succ_mean"] = v.p_succ_mean;
    item["lower"] = v.lower;
    item["upper"] = v.upper;
    violations.push_back(item);
  }
  j["enclosure_violations"] = violations;
  if (report.bound_gap_first) j["bound_gap_first"] = *report.bound_gap_first;
  else j["bound_gap_first"] = nullptr;
  if (report.bound_gap_last) j["bound_gap_last"] = *report.bound_gap_last;
  else j["bound_gap_last"] = nullptr;
  return j.dump(2) + "\n";
}

}  // namespace statusloop
