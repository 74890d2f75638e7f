// Command-line front end: simulate, sweep and validate scenarios.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "drn/harness.hpp"
#include "drn/scenario_io.hpp"

namespace fs = std::filesystem;
using drn::format_number;
using nlohmann::json;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string scenario;
  std::string preset;
  std::optional<int> uavs, steps, runs, n_chirp, h_max;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma_r0, sigma_b0, rho;
  std::optional<std::string> r_max;
  std::optional<std::string> capabilities;
  std::string out = "out";
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_outputs) {
  cmd->add_option("--scenario", c.scenario, "Scenario JSON file");
  cmd->add_option("--preset", c.preset, "Shipped preset name (e.g. fig4_los_square)");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--mc", c.runs, "Monte Carlo runs");
  cmd->add_option("--steps", c.steps, "Time steps per run");
  cmd->add_option("--uavs", c.uavs, "Use the first N agents of the fleet");
  cmd->add_option("--sigma-r0", c.sigma_r0, "Ranging std at 1 m and 1 m^2 [m]");
  cmd->add_option("--sigma-b0", c.sigma_b0, "Bearing std [deg]");
  cmd->add_option("--rho", c.rho, "Target RCS [m^2]");
  cmd->add_option("--n-chirp", c.n_chirp, "Chirps per frame");
  cmd->add_option("--h-max", c.h_max, "Maximum relay hops");
  cmd->add_option("--r-max", c.r_max, "Link radius [m] or 'inf'");
  cmd->add_option("--capabilities", c.capabilities, "Comma list of ranging,bearing,doppler");
  if (with_outputs) {
    cmd->add_option("--out", c.out, "Output directory");
    cmd->add_option("--threads", c.threads, "Worker threads (0: all cores)");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) {
    throw drn::ScenarioError(what, "'" + text + "' is not a number");
  }
  return v;
}

fs::path preset_path(const std::string& name) {
  const char* env = std::getenv("DRN_PRESET_DIR");
  const fs::path dir = env ? fs::path(env) : fs::path(DRN_PRESET_DIR);
  return dir / (name + ".json");
}

fs::path scenario_path(const Common& c) {
  if (!c.scenario.empty() && !c.preset.empty()) {
    throw drn::ScenarioError("--scenario/--preset", "give only one of them");
  }
  if (!c.scenario.empty()) return c.scenario;
  if (!c.preset.empty()) return preset_path(c.preset);
  throw drn::ScenarioError("--scenario/--preset", "one of them is required");
}

drn::Overrides overrides_of(const Common& c) {
  drn::Overrides o;
  o.uavs = c.uavs;
  o.steps = c.steps;
  o.runs = c.runs;
  o.seed = c.seed;
  o.sigma_r0_m = c.sigma_r0;
  o.sigma_b0_deg = c.sigma_b0;
  o.rho_m2 = c.rho;
  o.n_chirp = c.n_chirp;
  o.h_max = c.h_max;
  if (c.r_max) o.r_max_m = parse_double(*c.r_max, "--r-max");
  if (c.capabilities) o.capabilities = split(*c.capabilities, ',');
  return o;
}

// All files are rendered before anything touches the disk, then written via temporaries.
void write_outputs(const fs::path& dir, const std::map<std::string, std::string>& files) {
  fs::create_directories(dir);
  std::vector<fs::path> temps;
  try {
    for (const auto& [name, content] : files) {
      const fs::path tmp = dir / (name + ".tmp");
      std::ofstream out(tmp, std::ios::binary);
      out << content;
      out.close();
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
      temps.push_back(tmp);
    }
    for (const auto& [name, content] : files) fs::rename(dir / (name + ".tmp"), dir / name);
  } catch (...) {
    for (const auto& t : temps) fs::remove(t);
    throw;
  }
}

json manifest(const fs::path& scenario, const drn::Overrides& o, std::uint64_t seed,
              const std::vector<std::string>& outputs, double seconds, const std::string& command) {
  json m;
  m["command"] = command;
  m["scenario"] = fs::absolute(scenario).string();
  m["overrides"] = o.describe();
  m["master_seed"] = seed;
  m["tool_version"] = DRN_VERSION;
  m["wall_clock_s"] = seconds;
  m["outputs"] = outputs;
  return m;
}

void print_issues(const drn::ScenarioError& e) {
  std::cerr << "invalid scenario:\n";
  for (const auto& i : e.issues()) std::cerr << "  " << i.field << ": " << i.message << "\n";
}

double sr_at(const drn::MetricsReport& r, double threshold) {
  for (std::size_t i = 0; i < r.thresholds.size(); ++i) {
    if (r.thresholds[i] == threshold) return r.success[i];
  }
  return std::nan("");
}

int cmd_simulate(const Common& c, bool trajectory, int burn_in) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path path = scenario_path(c);
  const drn::Overrides o = overrides_of(c);
  const drn::Scenario s = drn::load_scenario(path, o);

  drn::MonteCarloOptions opts;
  opts.threads = c.threads;
  opts.burn_in = burn_in;
  const drn::MetricsReport report = drn::run_monte_carlo(s, opts);

  std::map<std::string, std::string> files;
  files["metrics.json"] = drn::metrics_json(report).dump(2) + "\n";
  files["sr_curve.csv"] = drn::sr_curve_csv(report);
  files["rmse.csv"] = drn::rmse_csv(report);
  if (trajectory) files["trajectory.csv"] = drn::trajectory_csv(drn::run_episode(s, report.seeds.front()));

  std::vector<std::string> names;
  for (const auto& [name, _] : files) names.push_back(name);
  names.push_back("manifest.json");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  files["manifest.json"] = manifest(path, o, s.seed, names, seconds, "simulate").dump(2) + "\n";
  write_outputs(c.out, files);

  std::cout << s.name << ": N=" << s.agents.size() << " K=" << s.steps << " M=" << s.runs
            << "  RMSE position " << format_number(report.overall.position) << " m, velocity "
            << format_number(report.overall.velocity) << " m/s, SR(1 m) " << format_number(sr_at(report, 1.0))
            << "\n";
  return 0;
}

int cmd_sweep(const Common& c, const std::string& axis, const std::string& values_text,
              const std::string& sr_text, int burn_in) {
  const auto start = std::chrono::steady_clock::now();
  static const std::vector<std::string> axes = {"N", "uavs", "sigma_r0", "sigma_b0", "rho",
                                                "n_chirp", "h_max", "r_max"};
  if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
    throw drn::ScenarioError("--axis", "unknown axis '" + axis + "' (N or uavs, sigma_r0, sigma_b0, rho, "
                                         "n_chirp, h_max, r_max)");
  }
  const std::vector<std::string> values = split(values_text, ',');
  if (values.empty()) throw drn::ScenarioError("--values", "the grid is empty");
  std::vector<double> thresholds;
  for (const auto& t : split(sr_text, ',')) thresholds.push_back(parse_double(t, "--sr-at"));
  if (thresholds.empty()) throw drn::ScenarioError("--sr-at", "at least one threshold is required");

  const fs::path path = scenario_path(c);
  const drn::Overrides base = overrides_of(c);

  // Validate every grid point before spending time on any of them.
  std::vector<drn::Scenario> scenarios;
  for (const std::string& v : values) {
    drn::Overrides o = base;
    const double x = parse_double(v, "--values");
    auto as_int = [&](const char* name) {
      if (x != std::floor(x)) throw drn::ScenarioError("--values", std::string(name) + " needs integers");
      return static_cast<int>(x);
    };
    if (axis == "uavs" || axis == "N") o.uavs = as_int("uavs");
    else if (axis == "sigma_r0") o.sigma_r0_m = x;
    else if (axis == "sigma_b0") o.sigma_b0_deg = x;
    else if (axis == "rho") o.rho_m2 = x;
    else if (axis == "n_chirp") o.n_chirp = as_int("n_chirp");
    else if (axis == "h_max") o.h_max = as_int("h_max");
    else o.r_max_m = x;
    scenarios.push_back(drn::load_scenario(path, o));
  }

  std::string csv = "axis,value";
  for (double t : thresholds) csv += ",sr_" + format_number(t) + "m";
  csv += ",rmse_position_m,rmse_velocity_mps\n";
  drn::MonteCarloOptions opts;
  opts.threads = c.threads;
  opts.burn_in = burn_in;
  opts.thresholds = thresholds;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const drn::MetricsReport r = drn::run_monte_carlo(scenarios[i], opts);
    csv += axis + "," + format_number(parse_double(values[i], "--values"));
    for (double s : r.success) csv += "," + format_number(s);
    csv += "," + format_number(r.overall.position) + "," + format_number(r.overall.velocity) + "\n";
    std::cout << axis << "=" << values[i] << "  RMSE " << format_number(r.overall.position) << " m\n";
  }

  std::map<std::string, std::string> files;
  files["sweep.csv"] = csv;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  drn::Overrides described = base;
  json m = manifest(path, described, scenarios.front().seed, {"sweep.csv", "manifest.json"}, seconds, "sweep");
  m["axis"] = axis;
  m["values"] = values;
  files["manifest.json"] = m.dump(2) + "\n";
  write_outputs(c.out, files);
  return 0;
}

int cmd_validate(const Common& c) {
  const fs::path path = scenario_path(c);
  const drn::Scenario s = drn::load_scenario(path, overrides_of(c));
  std::cout << "ok: " << s.name << " (" << s.agents.size() << " agents, " << s.obstacles.size()
            << " obstacles, K=" << s.steps << ", M=" << s.runs << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic radar network tracking simulator"};
  app.require_subcommand(1);

  Common sim_opts, sweep_opts, val_opts;
  bool trajectory = false;
  int sim_burn_in = 0, sweep_burn_in = 0;
  std::string axis, values, sr_at_text = "1";

  CLI::App* sim = app.add_subcommand("simulate", "Run Monte Carlo episodes and write metrics");
  add_common(sim, sim_opts, true);
  sim->add_flag("--trajectory", trajectory, "Also write the first episode's trajectory.csv");
  sim->add_option("--burn-in", sim_burn_in, "Steps excluded from the metrics");

  CLI::App* sweep = app.add_subcommand("sweep", "Run one Monte Carlo batch per grid value");
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--axis", axis, "N (alias uavs), sigma_r0, sigma_b0, rho, n_chirp, h_max or r_max")->required();
  sweep->add_option("--values", values, "Comma-separated grid")->required();
  sweep->add_option("--sr-at", sr_at_text, "Comma-separated success-rate thresholds [m]");
  sweep->add_option("--burn-in", sweep_burn_in, "Steps excluded from the metrics");

  CLI::App* val = app.add_subcommand("validate", "Check a scenario file");
  add_common(val, val_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts, trajectory, sim_burn_in);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, axis, values, sr_at_text, sweep_burn_in);
    return cmd_validate(val_opts);
  } catch (const drn::ScenarioError& e) {
    print_issues(e);
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
