#include "drn/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace drn {

using nlohmann::json;

ScenarioError::ScenarioError(std::vector<ValidationIssue> issues)
    : std::runtime_error([&] {
        std::string msg = "invalid scenario";
        for (const auto& i : issues) msg += "\n  " + i.field + ": " + i.message;
        return msg;
      }()),
      issues_(std::move(issues)) {}

std::vector<std::string> Overrides::describe() const {
  std::vector<std::string> out;
  auto add = [&out](const char* name, const auto& v) {
    if (!v) return;
    std::ostringstream s;
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, double>) {
      s << name << "=" << format_number(*v);
    } else {
      s << name << "=" << *v;
    }
    out.push_back(s.str());
  };
  add("uavs", uavs);
  add("steps", steps);
  add("mc", runs);
  add("seed", seed);
  add("sigma_r0_m", sigma_r0_m);
  add("sigma_b0_deg", sigma_b0_deg);
  add("rho_m2", rho_m2);
  add("n_chirp", n_chirp);
  add("h_max", h_max);
  add("r_max_m", r_max_m);
  if (capabilities) {
    std::string joined;
    for (const auto& c : *capabilities) joined += (joined.empty() ? "" : ",") + c;
    out.push_back("capabilities=" + joined);
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

void apply_overrides(json& doc, const Overrides& o) {
  if (!doc.is_object()) throw ScenarioError("<root>", "must be a JSON object");
  auto section = [&doc](const char* name) -> json& {
    json& s = doc[name];
    if (s.is_null()) s = json::object();
    return s;
  };
  if (o.uavs) {
    const auto pool = doc.contains("fleet") && doc["fleet"].is_array() ? doc["fleet"].size() : 0;
    if (*o.uavs < 1 || static_cast<std::size_t>(*o.uavs) > pool) {
      throw ScenarioError("uavs", "requested " + std::to_string(*o.uavs) + " agents, fleet lists " +
                                        std::to_string(pool));
    }
    doc["uavs"] = *o.uavs;
  }
  if (o.steps) doc["steps"] = *o.steps;
  if (o.runs) doc["runs"] = *o.runs;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.sigma_r0_m) section("radar")["sigma_r0_m"] = *o.sigma_r0_m;
  if (o.sigma_b0_deg) section("radar")["sigma_b0_deg"] = *o.sigma_b0_deg;
  if (o.rho_m2) section("target")["rcs_m2"] = *o.rho_m2;
  if (o.n_chirp) {
    json& radar = section("radar");
    if (!radar.contains("chirp") || !radar["chirp"].is_object()) {
      throw ScenarioError("radar.chirp", "n_chirp override needs a chirp block");
    }
    radar["chirp"]["n_chirp"] = *o.n_chirp;
  }
  if (o.h_max) section("comms")["h_max"] = *o.h_max;
  if (o.r_max_m) {
    if (std::isinf(*o.r_max_m)) {
      section("comms")["r_max_m"] = "inf";
    } else {
      section("comms")["r_max_m"] = *o.r_max_m;
    }
  }
  if (o.capabilities) {
    section("radar")["capabilities"] = *o.capabilities;
    if (doc.contains("fleet") && doc["fleet"].is_array()) {
      for (json& agent : doc["fleet"]) {
        if (agent.is_object()) agent.erase("capabilities");
      }
    }
  }
}

Capabilities parse_capabilities(const std::vector<std::string>& names) {
  Capabilities caps;
  for (const std::string& n : names) {
    if (n == "ranging") caps.ranging = true;
    else if (n == "bearing") caps.bearing = true;
    else if (n == "doppler") caps.doppler = true;
    else throw std::invalid_argument("unknown capability '" + n + "'");
  }
  return caps;
}

namespace {

constexpr double kDeg = kPi / 180.0;

// Reads typed fields from a JSON object, recording problems against dotted paths.
class Reader {
 public:
  Reader(const json& node, std::string path, std::vector<ValidationIssue>& issues)
      : node_(node), path_(std::move(path)), issues_(issues) {
    if (!node_.is_object()) fail("", "must be an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }
  const json& raw(const std::string& key) const { return node_.at(key); }

  void number(const std::string& key, double& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (v.is_string() && (v == "inf" || v == "infinity")) {
      out = std::numeric_limits<double>::infinity();
    } else if (!v.is_number()) {
      fail(key, "must be a number");
    } else {
      out = v.get<double>();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) {
      fail(key, "must be an integer");
    } else if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned()) out = v.get<Int>();
      else fail(key, "must be a non-negative integer");
    } else {
      out = v.get<Int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    seen_.insert(key);
    if (!has(key)) return;
    if (!node_.at(key).is_boolean()) fail(key, "must be true or false");
    else out = node_.at(key).get<bool>();
  }

  void text(const std::string& key, std::string& out) {
    seen_.insert(key);
    if (!has(key)) return;
    if (!node_.at(key).is_string()) fail(key, "must be a string");
    else out = node_.at(key).get<std::string>();
  }

  bool vec3(const std::string& key, Vec3& out) {
    seen_.insert(key);
    if (!has(key)) return false;
    const json& v = node_.at(key);
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      fail(key, "must be an array of 3 numbers");
      return false;
    }
    out = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    return true;
  }

  bool pair(const std::string& key, std::array<double, 2>& out) {
    seen_.insert(key);
    if (!has(key)) return false;
    const json& v = node_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(key, "must be an array of 2 numbers");
      return false;
    }
    out = {v[0].get<double>(), v[1].get<double>()};
    return true;
  }

  bool capabilities(const std::string& key, Capabilities& out) {
    seen_.insert(key);
    if (!has(key)) return false;
    const json& v = node_.at(key);
    if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); })) {
      fail(key, "must be an array of capability names");
      return false;
    }
    try {
      out = parse_capabilities(v.get<std::vector<std::string>>());
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
      return false;
    }
    return true;
  }

  // Marks a key as known without reading it here.
  void known(const std::string& key) { seen_.insert(key); }

  void fail(const std::string& key, const std::string& message) {
    issues_.push_back({key.empty() ? (path_.empty() ? "<root>" : path_) : field(key), message});
  }

  void reject_unknown() {
    if (!node_.is_object()) return;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::vector<ValidationIssue>& issues_;
  std::set<std::string> seen_;
};

struct RadarDefaults {
  RadarProfile profile;
  Capabilities caps{true, false, false};
};

void read_radar(Reader& r, RadarDefaults& out, std::vector<ValidationIssue>& issues) {
  double sigma_r0 = std::sqrt(out.profile.sigma_r0_sq);
  double sigma_d0 = std::sqrt(out.profile.sigma_d0_sq);
  double sigma_b0_deg = out.profile.sigma_b0 / kDeg;
  double carrier = kSpeedOfLight / out.profile.wavelength;
  r.number("sigma_r0_m", sigma_r0);
  r.number("sigma_d0_hz", sigma_d0);
  r.number("sigma_b0_deg", sigma_b0_deg);
  r.number("carrier_hz", carrier);
  r.number("path_loss_exponent", out.profile.path_loss_exponent);
  r.boolean("distance_scaling", out.profile.distance_scaling);
  r.capabilities("capabilities", out.caps);
  if (!(sigma_r0 > 0.0)) r.fail("sigma_r0_m", "must be > 0");
  if (!(sigma_d0 > 0.0)) r.fail("sigma_d0_hz", "must be > 0");
  if (!(sigma_b0_deg > 0.0)) r.fail("sigma_b0_deg", "must be > 0");
  if (!(carrier > 0.0)) r.fail("carrier_hz", "must be > 0");
  out.profile.sigma_r0_sq = sigma_r0 * sigma_r0;
  out.profile.sigma_d0_sq = sigma_d0 * sigma_d0;
  out.profile.sigma_b0 = sigma_b0_deg * kDeg;
  out.profile.wavelength = kSpeedOfLight / carrier;

  r.known("chirp");
  if (r.has("chirp")) {
    Reader c(r.raw("chirp"), r.field("chirp"), issues);
    PhysicalRadar phys;
    c.number("bandwidth_hz", phys.bandwidth_hz);
    c.number("sweep_time_s", phys.chirp_duration_s);
    c.integer("n_chirp", phys.n_chirp);
    c.number("snr0_db", phys.snr0_db);
    c.reject_unknown();
    if (!(phys.bandwidth_hz > 0.0)) c.fail("bandwidth_hz", "must be > 0");
    if (!(phys.chirp_duration_s > 0.0)) c.fail("sweep_time_s", "must be > 0");
    if (phys.n_chirp < 1) c.fail("n_chirp", "must be >= 1");
    if (r.has("sigma_d0_hz")) r.fail("sigma_d0_hz", "conflicts with the chirp block");
    if (phys.bandwidth_hz > 0.0 && phys.chirp_duration_s > 0.0 && phys.n_chirp >= 1) {
      out.profile.sigma_d0_sq =
          reference_variances_from_physical(phys, out.profile.path_loss_exponent).doppler_sq;
    }
    out.profile.physical = phys;
  }
  r.reject_unknown();
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  std::vector<ValidationIssue> issues;
  Scenario s;
  Reader root(doc, "", issues);
  if (!doc.is_object()) throw ScenarioError(issues);

  root.text("name", s.name);
  root.integer("steps", s.steps);
  root.integer("runs", s.runs);
  root.integer("seed", s.seed);
  root.number("dt_s", s.dt);
  s.nav.limits.dt = s.dt;

  RadarDefaults radar;
  root.known("radar");
  if (root.has("radar")) {
    Reader r(doc.at("radar"), "radar", issues);
    read_radar(r, radar, issues);
  }

  root.known("target");
  if (root.has("target")) {
    Reader t(doc.at("target"), "target", issues);
    t.vec3("position_m", s.target.position);
    t.vec3("velocity_mps", s.target.velocity);
    t.vec3("process_intensity", s.process_intensity);
    t.number("rcs_m2", s.rcs);
    t.reject_unknown();
  }

  root.known("tracker");
  if (root.has("tracker")) {
    Reader t(doc.at("tracker"), "tracker", issues);
    t.number("initial_position_std_m", s.initial_position_std);
    t.number("initial_velocity_std_mps", s.initial_velocity_std);
    t.integer("update_iterations", s.update_iterations);
    if (t.has("initial_mean")) {
      std::string mode;
      t.text("initial_mean", mode);
      if (mode == "origin") {
        s.initial_mean = InitialMean::kOrigin;
      } else if (mode == "perturbed") {
        s.initial_mean = InitialMean::kPerturbed;
      } else {
        issues.push_back({"tracker.initial_mean", "must be \"origin\" or \"perturbed\""});
      }
    }
    if (t.has("process_intensity")) {
      Vec3 w = Vec3::Zero();
      t.vec3("process_intensity", w);
      s.tracker_process_intensity = w;
    }
    t.reject_unknown();
  }

  root.known("fleet");
  if (!root.has("fleet") || !doc.at("fleet").is_array()) {
    root.fail("fleet", "must be an array of agents");
  } else {
    const json& fleet = doc.at("fleet");
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      Reader a(fleet[i], "fleet[" + std::to_string(i) + "]", issues);
      AgentSpec spec;
      spec.caps = radar.caps;
      spec.profile = radar.profile;
      if (!a.vec3("position_m", spec.position)) a.fail("position_m", "is required");
      std::array<double, 2> range{};
      if (a.pair("altitude_range_m", range)) spec.altitude_range = range;
      a.capabilities("capabilities", spec.caps);
      a.boolean("fixed", spec.fixed);
      a.reject_unknown();
      s.agents.push_back(spec);
    }
  }
  int uavs = static_cast<int>(s.agents.size());
  root.integer("uavs", uavs);
  if (uavs < 1 || uavs > static_cast<int>(s.agents.size())) {
    root.fail("uavs", "must be between 1 and the fleet size (" + std::to_string(s.agents.size()) + ")");
  } else {
    s.agents.resize(static_cast<std::size_t>(uavs));
  }

  root.known("obstacles");
  if (root.has("obstacles")) {
    if (!doc.at("obstacles").is_array()) {
      root.fail("obstacles", "must be an array");
    } else {
      const json& list = doc.at("obstacles");
      for (std::size_t i = 0; i < list.size(); ++i) {
        Reader o(list[i], "obstacles[" + std::to_string(i) + "]", issues);
        Obstacle box;
        if (!o.vec3("min_m", box.min_corner)) o.fail("min_m", "is required");
        if (!o.vec3("max_m", box.max_corner)) o.fail("max_m", "is required");
        o.reject_unknown();
        s.obstacles.push_back(box);
      }
    }
  }

  root.known("comms");
  if (root.has("comms")) {
    Reader c(doc.at("comms"), "comms", issues);
    c.number("r_max_m", s.comms.r_max);
    c.integer("h_max", s.comms.h_max);
    c.reject_unknown();
  }

  root.known("nav");
  if (root.has("nav")) {
    Reader n(doc.at("nav"), "nav", issues);
    NavConfig& nav = s.nav;
    double heading_deg = nav.limits.heading_rate_max / kDeg;
    double tilt_deg = nav.limits.tilt_rate_max / kDeg;
    n.number("step_m", nav.step);
    n.number("band_m", nav.band);
    n.number("v_min_mps", nav.limits.v_min);
    n.number("v_max_mps", nav.limits.v_max);
    n.number("heading_rate_max_deg", heading_deg);
    n.number("tilt_rate_max_deg", tilt_deg);
    n.number("min_uav_distance_m", nav.thresholds.inter_uav);
    n.number("min_target_distance_m", nav.thresholds.target);
    n.number("min_obstacle_distance_m", nav.thresholds.obstacle);
    n.number("pursuit_speed_mps", nav.pursuit_speed);
    n.boolean("ground_plane", nav.ground_plane);
    n.integer("max_backtracks", nav.max_backtracks);
    n.reject_unknown();
    nav.limits.heading_rate_max = heading_deg * kDeg;
    nav.limits.tilt_rate_max = tilt_deg * kDeg;
  }

  root.known("outliers");
  if (root.has("outliers")) {
    Reader o(doc.at("outliers"), "outliers", issues);
    o.number("max_range_m", s.outliers.max_range);
    o.number("max_doppler_hz", s.outliers.max_doppler);
    o.reject_unknown();
  }
  root.reject_unknown();

  if (issues.empty()) {
    auto more = validate(s);
    issues.insert(issues.end(), more.begin(), more.end());
  }
  if (!issues.empty()) throw ScenarioError(std::move(issues));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const Overrides& overrides) {
  json doc = read_json_file(path);
  apply_overrides(doc, overrides);
  return scenario_from_json(doc);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string sr_curve_csv(const MetricsReport& report) {
  std::string out = "threshold_m,success_rate\n";
  for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
    out += format_number(report.thresholds[i]) + "," + format_number(report.success[i]) + "\n";
  }
  return out;
}

std::string rmse_csv(const MetricsReport& report) {
  std::string out = "scope,position_m,velocity_mps\n";
  out += "all," + format_number(report.overall.position) + "," + format_number(report.overall.velocity) + "\n";
  for (std::size_t i = 0; i < report.per_agent.size(); ++i) {
    out += "agent_" + std::to_string(i) + "," + format_number(report.per_agent[i].position) + "," +
           format_number(report.per_agent[i].velocity) + "\n";
  }
  return out;
}

namespace {

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

json metrics_json(const MetricsReport& report) {
  json j;
  j["rmse"] = {{"position_m", report.overall.position}, {"velocity_mps", report.overall.velocity}};
  json agents = json::array();
  for (const Rmse& r : report.per_agent) {
    agents.push_back({{"position_m", r.position}, {"velocity_mps", r.velocity}});
  }
  j["rmse_per_agent"] = agents;
  j["success_rate"] = {{"threshold_m", report.thresholds}, {"value", report.success}};
  j["episode_seeds"] = report.seeds;
  j["samples"] = report.samples;
  j["burn_in_steps"] = report.burn_in;
  j["safety"] = {{"min_inter_uav_m", finite_or_string(report.safety.min_inter_uav)},
                 {"min_obstacle_clearance_m", finite_or_string(report.safety.min_obstacle_clearance)},
                 {"min_altitude_m", finite_or_string(report.safety.min_altitude)},
                 {"obstacle_penetrations", report.safety.obstacle_penetrations}};
  return j;
}

std::string trajectory_csv(const EpisodeLog& log) {
  std::string out =
      "k,agent,x_m,y_m,z_m,est_x_m,est_y_m,est_z_m,est_vx_mps,est_vy_mps,est_vz_mps,"
      "var_x,var_y,var_z,target_x_m,target_y_m,target_z_m,cost,active_constraints,hop_digest\n";
  for (const StepLog& step : log.steps) {
    for (std::size_t i = 0; i < step.agents.size(); ++i) {
      const AgentStep& a = step.agents[i];
      std::string row = std::to_string(step.k) + "," + std::to_string(i);
      for (int c = 0; c < 3; ++c) row += "," + format_number(a.position(c));
      for (int c = 0; c < 6; ++c) row += "," + format_number(a.estimate(c));
      for (int c = 0; c < 3; ++c) row += "," + format_number(a.covariance_diag(c));
      for (int c = 0; c < 3; ++c) row += "," + format_number(step.target.position(c));
      row += "," + format_number(a.cost) + "," + std::to_string(a.active_constraints) + "," +
             std::to_string(step.hop_digest) + "\n";
      out += row;
    }
  }
  return out;
}

}  // namespace drn
