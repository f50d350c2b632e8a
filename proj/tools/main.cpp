#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "statusloop/acceptance.hpp"
#include "statusloop/analytic.hpp"
#include "statusloop/simulator.hpp"
#include "statusloop/sweep.hpp"

namespace {

using statusloop::format_value;

struct CliOptions {
  statusloop::SystemParams params{};
  double horizon = 5000.0;
  std::uint64_t seed = 1;
  int seeds = 10;
  std::string out = ".";
  std::string format = "text";  // text | csv | json-like
  bool plot = false;
  bool quick = false;
};

// Ordered (label, value-or-NA, unit) rows shared by the text/csv/json views.
struct ReportField {
  const char* name;
  std::optional<double> value;
  const char* unit;
};

std::vector<ReportField> report_fields(const statusloop::AnalyticReport& r) {
  auto opt = [&](double v) -> std::optional<double> {
    if (!r.transform_valid) return std::nullopt;
    return v;
  };
  return {
      {"lambda_star", r.lambda_star, "1/s"},
      {"rho", r.rho, ""},
      {"blocking", r.blocking, ""},
      {"p_idle", r.p_idle, ""},
      {"p_one_idle", r.p_one_idle, ""},
      {"hazard", r.hazard, "1/s"},
      {"g_staleness", opt(r.g_staleness), ""},
      {"g_uplink", opt(r.g_uplink), ""},
      {"g_downlink", opt(r.g_downlink), ""},
      {"p_succ_closed", r.p_succ_closed, ""},
      {"p_succ_transform", opt(r.p_succ_transform), ""},
      {"upper", r.upper, ""},
      {"lower", r.lower, ""},
      {"mean_gap", r.mean_gap, "s"},
      {"second_moment_gap", r.second_moment_gap, "s^2"},
      {"mean_age", r.mean_age, "s"},
      {"mean_aoi", r.mean_aoi, "s"},
  };
}

void render_fields(const std::vector<ReportField>& fields, const std::string& format) {
  if (format == "csv") {
    std::cout << "field,value\n";
    for (const ReportField& f : fields) {
      std::cout << f.name << ',' << statusloop::format_cell(f.value) << '\n';
    }
  } else if (format == "json-like") {
    nlohmann::ordered_json j;
    for (const ReportField& f : fields) {
      if (f.value) j[f.name] = *f.value;
      else j[f.name] = nullptr;
    }
    std::cout << j.dump(2) << '\n';
  } else {
    for (const ReportField& f : fields) {
      std::cout << f.name;
      for (std::size_t i = std::string(f.name).size(); i < 19; ++i) std::cout << ' ';
      std::cout << statusloop::format_cell(f.value);
      if (f.unit[0] != '\0' && f.value) std::cout << ' ' << f.unit;
      std::cout << '\n';
    }
  }
}

int cmd_analyze(const CliOptions& opt) {
  const statusloop::AnalyticReport report = statusloop::analyze(opt.params);
  render_fields(report_fields(report), opt.format);
  if (!report.transform_valid) {
    std::cout << "note: hazard >= uplink rate; transform quantities are NA\n";
  }
  if (!report.safety_frame_ok) {
    std::cout << "note: operating point is outside the safety frame "
                 "(r_bar/gamma < 1 and lambda*/beta < 1)\n";
  }
  return 0;
}

int cmd_simulate(const CliOptions& opt, bool drain, const std::string& trace_path) {
  statusloop::SimConfig cfg;
  cfg.params = opt.params;
  cfg.horizon = opt.horizon;
  cfg.seed = opt.seed;
  cfg.drain = drain;
  std::ofstream trace_file;
  if (!trace_path.empty()) {
    trace_file.open(trace_path, std::ios::binary);
    if (!trace_file) throw std::invalid_argument("cannot open trace file " + trace_path);
    cfg.trace = &trace_file;
  }
  const statusloop::SimStats stats = statusloop::run_simulation(cfg);
  const statusloop::AnalyticReport report = statusloop::analyze(opt.params);

  std::vector<ReportField> fields = {
      {"n_arr", static_cast<double>(stats.n_arr), ""},
      {"n_fwd", static_cast<double>(stats.n_fwd), ""},
      {"n_succ", static_cast<double>(stats.n_succ), ""},
      {"n_drop_ap", static_cast<double>(stats.n_drop_ap), ""},
      {"n_block_server", static_cast<double>(stats.n_block_server), ""},
      {"hazard_events", static_cast<double>(stats.hazard_events), ""},
      {"elapsed", stats.elapsed, "s"},
      {"empirical_p_succ", stats.empirical_p_succ(), ""},
      {"p_succ_closed", report.p_succ_closed, ""},
      {"empirical_lambda", stats.empirical_lambda(), "1/s"},
      {"lambda_star", report.lambda_star, "1/s"},
      {"empirical_hazard", stats.empirical_hazard(), "1/s"},
      {"hazard", report.hazard, "1/s"},
  };
  render_fields(fields, opt.format);
  if (stats.n_arr < 100) {
    std::cout << "warning: only " << stats.n_arr
              << " arrivals; estimates are unreliable at this horizon\n";
  }
  return 0;
}

statusloop::SweepSpec sweep_from_file(const std::string& path,
                                      const CliOptions& opt) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open sweep spec file " + path);
  }
  statusloop::SweepSpec spec;
  spec.base = opt.params;
  spec.horizon = opt.horizon;
  spec.seeds.clear();
  for (int i = 0; i < opt.seeds; ++i) spec.seeds.push_back(opt.seed + i);

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "varied") {
      spec.varied = value;
    } else if (key == "grid") {
      spec.grid.clear();
      std::istringstream cells(value);
      std::string cell;
      while (std::getline(cells, cell, ',')) spec.grid.push_back(std::stod(cell));
    } else if (key == "horizon") {
      spec.horizon = std::stod(value);
    } else {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    }
  }
  if (spec.varied.empty() || spec.grid.empty()) {
    throw std::invalid_argument(path + ": spec needs varied= and grid=");
  }
  return spec;
}

int cmd_sweep(const CliOptions& opt, const std::string& name, double slack,
              bool horizon_given) {
  auto with_overrides = [&](statusloop::SweepSpec spec) {
    spec.base = opt.params;
    spec.horizon = opt.horizon;
    spec.seeds.clear();
    for (int i = 0; i < opt.seeds; ++i) spec.seeds.push_back(opt.seed + i);
    return spec;
  };

  std::vector<statusloop::SweepSpec> specs;
  if (name == "all") {
    for (statusloop::SweepSpec& spec : statusloop::default_sweeps()) {
      specs.push_back(with_overrides(std::move(spec)));
    }
  } else {
    bool known = false;
    for (const std::string& n : statusloop::sweep_names()) known = known || n == name;
    if (known) {
      specs.push_back(with_overrides(statusloop::default_sweep(name)));
    } else if (std::filesystem::exists(name)) {
      statusloop::SweepSpec spec = sweep_from_file(name, opt);
      if (horizon_given) spec.horizon = opt.horizon;  // explicit flag wins
      specs.push_back(std::move(spec));
    } else {
      std::string valid = "all";
      for (const std::string& n : statusloop::sweep_names()) valid += ", " + n;
      std::cerr << "error: unknown sweep '" << name << "'; valid names: " << valid
                << " (or a spec file path)\n";
      return 1;
    }
  }

  std::filesystem::create_directories(opt.out);
  for (statusloop::SweepSpec& spec : specs) {
    const std::vector<statusloop::SweepRow> rows = statusloop::run_sweep(spec);
    const statusloop::ComparisonReport report = statusloop::check_enclosure(rows, slack);

    const auto base = std::filesystem::path(opt.out);
    {
      std::ofstream csv(base / (spec.varied + ".csv"), std::ios::binary);
      statusloop::write_sweep_csv(csv, rows);
    }
    {
      std::ofstream summary(base / (spec.varied + "-summary.json"), std::ios::binary);
      summary << statusloop::comparison_to_json(report, spec.varied);
    }
    if (opt.plot) {
      std::ofstream svg(base / (spec.varied + ".svg"), std::ios::binary);
      statusloop::write_sweep_svg(svg, spec.varied, rows);
    }
    std::cout << spec.varied << ": " << rows.size() << " points, "
              << report.violations.size() << " enclosure violations, max closed-form gap "
              << statusloop::format_cell(report.max_closed_gap) << '\n';
  }
  return 0;
}

int cmd_verify(const CliOptions& opt) {
  statusloop::AcceptanceOptions options;
  options.quick = opt.quick;
  options.out_dir = (std::filesystem::path(opt.out) / "verify-out").string();
  const statusloop::AcceptanceOutcome outcome =
      statusloop::run_acceptance(options, &std::cout);
  statusloop::print_acceptance(std::cout, outcome);
  return outcome.all_passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form success probability, bounds and event simulation for a "
               "status-driven single-AP/single-server offloading loop"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file");
  app.allow_config_extras(false);

  CliOptions opt;
  app.add_option("--lambda-in", opt.params.lambda_in, "task-arrival rate at the AP [1/s]")
      ->capture_default_str();
  app.add_option("--mu", opt.params.mu, "per-thread service rate [1/s]")
      ->capture_default_str();
  app.add_option("--threads", opt.params.c_threads, "concurrent server threads")
      ->capture_default_str();
  app.add_option("--update-rate", opt.params.r_bar, "status-update rate [1/s]")
      ->capture_default_str();
  app.add_option("--uplink", opt.params.gamma, "uplink rate [1/s]")
      ->capture_default_str();
  app.add_option("--downlink", opt.params.beta, "downlink rate [1/s]")
      ->capture_default_str();
  app.add_option("--horizon", opt.horizon, "simulated arrival window [s]")
      ->capture_default_str();
  app.add_option("--seed", opt.seed, "base PRNG seed")->capture_default_str();
  app.add_option("--seeds", opt.seeds, "number of seeds for sweeps (seed, seed+1, ...)")
      ->capture_default_str();
  app.add_option("--out", opt.out, "output directory")->capture_default_str();
  app.add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"text", "csv", "json-like"}))
      ->capture_default_str();
  app.add_flag("--plot", opt.plot, "write an SVG line chart per sweep");
  app.add_flag("--quick", opt.quick, "verify with reduced seeds/horizon");

  CLI::App* analyze = app.add_subcommand("analyze", "closed-form quantities and bounds");
  CLI::App* simulate = app.add_subcommand("simulate", "one seeded simulation run");
  bool no_drain = false;
  std::string trace_path;
  simulate->add_flag("--no-drain", no_drain, "cut in-flight tasks at the horizon");
  simulate->add_option("--trace", trace_path, "write one structured line per event");
  CLI::App* sweep =
      app.add_subcommand("sweep", "theory-versus-simulation sweep, CSV + summary");
  std::string sweep_name;
  double slack = 0.02;
  sweep->add_option("name", sweep_name, "sweep name, 'all', or a spec file")->required();
  sweep->add_option("--slack", slack, "enclosure slack")->capture_default_str();
  CLI::App* verify = app.add_subcommand("verify", "run the full verification suite");
  for (CLI::App* sub : {analyze, simulate, sweep, verify}) {
    sub->fallthrough();  // global flags may follow the subcommand
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    opt.params.validate();
    if (analyze->parsed()) return cmd_analyze(opt);
    if (simulate->parsed()) return cmd_simulate(opt, !no_drain, trace_path);
    if (sweep->parsed()) {
      return cmd_sweep(opt, sweep_name, slack, app.count("--horizon") > 0);
    }
    if (verify->parsed()) return cmd_verify(opt);
  } catch (const statusloop::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (last iterate " << format_value(e.last_iterate())
              << ", residual " << format_value(e.residual()) << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
