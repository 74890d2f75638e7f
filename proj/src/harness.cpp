#include "drn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "drn/infomat.hpp"

namespace drn {

namespace {

std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void check_profile(const RadarProfile& p, const std::string& base, std::vector<ValidationIssue>& out) {
  try {
    p.validate();
  } catch (const std::exception& e) {
    out.push_back({base + ".radar", e.what()});
  }
}

}  // namespace

std::vector<ValidationIssue> validate(const Scenario& s) {
  std::vector<ValidationIssue> out;
  if (s.agents.empty()) out.push_back({"fleet", "at least one agent is required"});
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const AgentSpec& a = s.agents[i];
    const std::string base = at("fleet", i);
    if (!a.position.allFinite()) out.push_back({base + ".position_m", "must be finite"});
    if (a.position.z() < 0.0) out.push_back({base + ".position_m", "altitude must be >= 0"});
    if (a.altitude_range) {
      const auto [lo, hi] = *a.altitude_range;
      if (!(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && lo <= hi)) {
        out.push_back({base + ".altitude_range_m", "needs 0 <= lo <= hi"});
      }
    }
    if (!a.caps.any()) out.push_back({base + ".capabilities", "at least one channel is required"});
    check_profile(a.profile, base, out);
  }
  if (!s.target.position.allFinite() || !s.target.velocity.allFinite()) {
    out.push_back({"target", "state must be finite"});
  }
  if (!s.process_intensity.allFinite() || (s.process_intensity.array() < 0.0).any()) {
    out.push_back({"target.process_intensity", "must be finite and >= 0"});
  }
  if (!(s.dt > 0.0)) out.push_back({"dt_s", "must be > 0"});
  if (!(s.rcs > 0.0)) out.push_back({"target.rcs_m2", "must be > 0"});
  if (!(s.initial_position_std > 0.0)) out.push_back({"tracker.initial_position_std_m", "must be > 0"});
  if (!(s.initial_velocity_std > 0.0)) out.push_back({"tracker.initial_velocity_std_mps", "must be > 0"});
  if (s.tracker_process_intensity &&
      (!s.tracker_process_intensity->allFinite() || (s.tracker_process_intensity->array() < 0.0).any())) {
    out.push_back({"tracker.process_intensity", "must be finite and >= 0"});
  }
  if (s.update_iterations < 1) out.push_back({"tracker.update_iterations", "must be >= 1"});
  for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
    const Obstacle& o = s.obstacles[i];
    if (!o.min_corner.allFinite() || !o.max_corner.allFinite()) {
      out.push_back({at("obstacles", i), "corners must be finite"});
    } else if (!o.valid()) {
      out.push_back({at("obstacles", i) + ".min_m", "min corner exceeds max corner"});
    }
  }
  if (!(s.comms.r_max > 0.0)) out.push_back({"comms.r_max_m", "must be > 0"});
  if (s.comms.h_max < 1) out.push_back({"comms.h_max", "must be >= 1"});
  const NavConfig& n = s.nav;
  if (!(n.step >= 0.0)) out.push_back({"nav.step_m", "must be >= 0"});
  if (!(n.band >= 0.0)) out.push_back({"nav.band_m", "must be >= 0"});
  if (!(n.pursuit_speed >= 0.0)) out.push_back({"nav.pursuit_speed_mps", "must be >= 0"});
  if (!(n.limits.v_min >= 0.0)) out.push_back({"nav.v_min_mps", "must be >= 0"});
  if (!(n.limits.v_min <= n.limits.v_max)) out.push_back({"nav.v_min_mps", "must not exceed nav.v_max_mps"});
  if (!(n.limits.heading_rate_max >= 0.0)) out.push_back({"nav.heading_rate_max_deg", "must be >= 0"});
  if (!(n.limits.tilt_rate_max >= 0.0)) out.push_back({"nav.tilt_rate_max_deg", "must be >= 0"});
  if (std::abs(n.limits.dt - s.dt) > 1e-12) out.push_back({"nav.dt_s", "must equal dt_s"});
  if (!(n.thresholds.inter_uav >= 0.0 && n.thresholds.target >= 0.0 && n.thresholds.obstacle >= 0.0)) {
    out.push_back({"nav.min_distance_m", "distances must be >= 0"});
  }
  if (!(s.outliers.max_range > 0.0 && s.outliers.max_doppler > 0.0)) {
    out.push_back({"outliers", "supports must be > 0"});
  }
  if (s.steps < 1) out.push_back({"steps", "must be >= 1"});
  if (s.runs < 1) out.push_back({"runs", "must be >= 1"});
  return out;
}

std::uint64_t episode_seed(std::uint64_t master, std::uint64_t episode) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(episode), static_cast<std::uint32_t>(episode >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

namespace {

struct AgentRuntime {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  std::optional<Polar> previous;
  Belief belief;
  std::mt19937_64 rng;
};

// Receives each completed step; `moves` holds the segment each agent flew in this step.
template <typename Observer>
void simulate(const Scenario& s, std::uint64_t seed, Observer&& observe) {
  const auto issues = validate(s);
  if (!issues.empty()) {
    std::ostringstream msg;
    msg << "invalid scenario: " << issues.front().field << ": " << issues.front().message;
    throw std::invalid_argument(msg.str());
  }

  const int n = static_cast<int>(s.agents.size());
  const MotionModel model = build_random_walk_model(s.dt, s.process_intensity);
  const MotionModel filter_model =
      build_random_walk_model(s.dt, s.tracker_process_intensity.value_or(s.process_intensity));
  std::mt19937_64 target_rng = stream(seed, 0);
  std::mt19937_64 setup_rng = stream(seed, 1);

  std::vector<AgentRuntime> agents(n);
  for (int i = 0; i < n; ++i) {
    const AgentSpec& spec = s.agents[i];
    agents[i].position = spec.position;
    if (spec.altitude_range) {
      std::uniform_real_distribution<double> z((*spec.altitude_range)[0], (*spec.altitude_range)[1]);
      agents[i].position.z() = z(setup_rng);
    }
    agents[i].rng = stream(seed, 2 + static_cast<std::uint64_t>(i));
  }

  Vec6 initial_mean = Vec6::Zero();
  if (s.initial_mean == InitialMean::kPerturbed) {
    std::normal_distribution<double> normal(0.0, 1.0);
    initial_mean = s.target.stacked();
    for (int c = 0; c < 6; ++c) {
      initial_mean(c) += (c < 3 ? s.initial_position_std : s.initial_velocity_std) * normal(setup_rng);
    }
  }
  for (AgentRuntime& a : agents) {
    a.belief = Belief::diagonal(initial_mean, s.initial_position_std, s.initial_velocity_std);
  }

  std::vector<MeasurementHistory> histories(n, MeasurementHistory(s.comms.h_max));
  TargetState target = s.target;
  std::vector<Vec3> positions(n);
  std::vector<std::pair<Vec3, Vec3>> moves(n);
  std::vector<ControlDecision> decisions(n);

  for (int k = 1; k <= s.steps; ++k) {
    for (int i = 0; i < n; ++i) {
      SensorState sensor{i, agents[i].position, agents[i].velocity, s.agents[i].caps, s.agents[i].profile};
      histories[i].push(sense(target, sensor, s.rcs, s.obstacles, s.outliers, k, agents[i].rng));
      positions[i] = agents[i].position;
    }
    const HopMatrix hops = build_graph(positions, s.comms.r_max);
    const std::vector<InfoVector> infos = exchange(histories, hops, k, s.comms.h_max);

    for (int i = 0; i < n; ++i) {
      const Belief prior = k == 1 ? agents[i].belief : predict(agents[i].belief, filter_model);
      agents[i].belief = update(prior, infos[i], s.update_iterations);
    }

    for (int i = 0; i < n; ++i) {
      decisions[i] = ControlDecision{};
      const Belief ahead = predict(agents[i].belief, filter_model);
      ControlContext ctx;
      ctx.position = agents[i].position;
      ctx.previous = agents[i].previous;
      ctx.problem.target = TargetState::from_stacked(ahead.mean);
      ctx.problem.rcs = s.rcs;
      ctx.problem.prior = prior_information(ahead.covariance);
      for (const ReceivedRecord& entry : infos[i].entries) {
        const MeasurementRecord& rec = entry.record;
        if (rec.sender == i) continue;
        ctx.problem.senders.push_back(
            {rec.sender_position, rec.sender_velocity, rec.caps, rec.profile,
             los_visible(rec.sender_position, ctx.problem.target.position, s.obstacles)});
      }
      ctx.own_index = static_cast<int>(ctx.problem.senders.size());
      ctx.problem.senders.push_back(
          {agents[i].position, agents[i].velocity, s.agents[i].caps, s.agents[i].profile,
           los_visible(agents[i].position, ctx.problem.target.position, s.obstacles)});
      for (int j = 0; j < n; ++j) {
        if (j != i && hops.at(i, j) == 1) ctx.neighbor_positions.push_back(positions[j]);
      }
      if (s.agents[i].fixed) {
        decisions[i].cost = cost(information(ctx.problem));
        continue;
      }
      try {
        decisions[i] = control_step(ctx, s.obstacles, s.nav);
      } catch (const DegenerateGeometry&) {
        decisions[i] = ControlDecision{};
      }
    }

    for (int i = 0; i < n; ++i) {
      moves[i].first = agents[i].position;
      if (!s.agents[i].fixed) {
        agents[i].position += decisions[i].control;
        agents[i].velocity = decisions[i].control / s.dt;
        agents[i].previous = decisions[i].motion;
      }
      moves[i].second = agents[i].position;
    }

    observe(k, target, hops, agents, decisions, moves);
    target = step_target(target, model, target_rng);
  }
}

}  // namespace

EpisodeLog run_episode(const Scenario& scenario, std::uint64_t seed) {
  EpisodeLog log;
  log.seed = seed;
  log.steps.reserve(static_cast<std::size_t>(scenario.steps));
  simulate(scenario, seed,
           [&log](int k, const TargetState& target, const HopMatrix& hops,
                  const std::vector<AgentRuntime>& agents, const std::vector<ControlDecision>& decisions,
                  const std::vector<std::pair<Vec3, Vec3>>&) {
             StepLog step;
             step.k = k;
             step.target = target;
             step.hop_digest = hops.digest();
             for (std::size_t i = 0; i < agents.size(); ++i) {
               AgentStep a;
               a.position = agents[i].position;
               a.estimate = agents[i].belief.mean;
               a.covariance_diag = agents[i].belief.covariance.diagonal();
               a.cost = decisions[i].cost;
               a.active_constraints = decisions[i].active_constraints;
               a.pursuit = decisions[i].pursuit;
               step.agents.push_back(a);
             }
             log.steps.push_back(std::move(step));
           });
  return log;
}

std::vector<double> success_rate(const std::vector<double>& errors, const std::vector<double>& thresholds) {
  std::vector<double> out(thresholds.size(), 0.0);
  if (errors.empty()) return out;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const auto hits = std::count_if(errors.begin(), errors.end(),
                                    [th = thresholds[t]](double e) { return th - e >= 0.0; });
    out[t] = static_cast<double>(hits) / static_cast<double>(errors.size());
  }
  return out;
}

Rmse rmse(const std::vector<EpisodeLog>& logs) {
  double pos = 0.0, vel = 0.0;
  long long count = 0;
  for (const EpisodeLog& log : logs) {
    for (const StepLog& step : log.steps) {
      for (const AgentStep& a : step.agents) {
        pos += (a.estimate.head<3>() - step.target.position).squaredNorm();
        vel += (a.estimate.tail<3>() - step.target.velocity).squaredNorm();
        ++count;
      }
    }
  }
  if (count == 0) return {};
  return {std::sqrt(pos / count), std::sqrt(vel / count)};
}

std::vector<double> default_thresholds() {
  std::vector<double> out;
  for (int i = 1; i <= 100; ++i) out.push_back(0.1 * i);
  return out;
}

namespace {

struct EpisodeTally {
  std::vector<long long> hits;
  std::vector<double> pos_sq, vel_sq;  // per agent
  std::vector<long long> agent_samples;
  long long samples = 0;
  SafetySummary safety;
};

EpisodeTally tally_episode(const Scenario& s, std::uint64_t seed, const std::vector<double>& thresholds,
                           int burn_in) {
  const std::size_t n = s.agents.size();
  EpisodeTally t;
  t.hits.assign(thresholds.size(), 0);
  t.pos_sq.assign(n, 0.0);
  t.vel_sq.assign(n, 0.0);
  t.agent_samples.assign(n, 0);
  simulate(s, seed,
           [&](int k, const TargetState& target, const HopMatrix&, const std::vector<AgentRuntime>& agents,
               const std::vector<ControlDecision>&, const std::vector<std::pair<Vec3, Vec3>>& moves) {
             for (std::size_t i = 0; i < n; ++i) {
               const Vec3& p = agents[i].position;
               t.safety.min_altitude = std::min(t.safety.min_altitude, p.z());
               t.safety.min_obstacle_clearance =
                   std::min(t.safety.min_obstacle_clearance, clearance(p, s.obstacles));
               bool crossed = !los_visible(moves[i].first, moves[i].second, s.obstacles);
               for (const Obstacle& box : s.obstacles) crossed = crossed || box.contains(p);
               if (crossed) ++t.safety.obstacle_penetrations;
               for (std::size_t j = i + 1; j < n; ++j) {
                 t.safety.min_inter_uav = std::min(t.safety.min_inter_uav, (p - agents[j].position).norm());
               }
             }
             if (k <= burn_in) return;
             for (std::size_t i = 0; i < n; ++i) {
               const Vec6& m = agents[i].belief.mean;
               const double e2 = (m.head<3>() - target.position).squaredNorm();
               t.pos_sq[i] += e2;
               t.vel_sq[i] += (m.tail<3>() - target.velocity).squaredNorm();
               ++t.agent_samples[i];
               ++t.samples;
               const double e = std::sqrt(e2);
               for (std::size_t th = 0; th < thresholds.size(); ++th) {
                 if (thresholds[th] - e >= 0.0) ++t.hits[th];
               }
             }
           });
  return t;
}

}  // namespace

MetricsReport run_monte_carlo(const Scenario& scenario, const MonteCarloOptions& options) {
  if (scenario.runs < 1) throw std::invalid_argument("run_monte_carlo: runs must be >= 1");
  MetricsReport report;
  report.thresholds = options.thresholds.empty() ? default_thresholds() : options.thresholds;
  report.burn_in = options.burn_in;
  const int m = scenario.runs;
  for (int r = 0; r < m; ++r) report.seeds.push_back(episode_seed(scenario.seed, static_cast<std::uint64_t>(r)));

  std::vector<EpisodeTally> tallies(m);
  std::vector<std::exception_ptr> errors(m);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < m; r = next++) {
      try {
        tallies[r] = tally_episode(scenario, report.seeds[r], report.thresholds, options.burn_in);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, m);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Fixed episode order keeps the floating-point sums independent of the schedule.
  const std::size_t n = scenario.agents.size();
  std::vector<long long> hits(report.thresholds.size(), 0);
  std::vector<double> pos(n, 0.0), vel(n, 0.0);
  std::vector<long long> per_agent(n, 0);
  for (const EpisodeTally& t : tallies) {
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += t.hits[i];
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] += t.pos_sq[i];
      vel[i] += t.vel_sq[i];
      per_agent[i] += t.agent_samples[i];
    }
    report.samples += t.samples;
    SafetySummary& s = report.safety;
    s.min_inter_uav = std::min(s.min_inter_uav, t.safety.min_inter_uav);
    s.min_obstacle_clearance = std::min(s.min_obstacle_clearance, t.safety.min_obstacle_clearance);
    s.min_altitude = std::min(s.min_altitude, t.safety.min_altitude);
    s.obstacle_penetrations += t.safety.obstacle_penetrations;
  }
  double pos_total = 0.0, vel_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pos_total += pos[i];
    vel_total += vel[i];
    const double c = per_agent[i] > 0 ? static_cast<double>(per_agent[i]) : 1.0;
    report.per_agent.push_back({std::sqrt(pos[i] / c), std::sqrt(vel[i] / c)});
  }
  const double total = report.samples > 0 ? static_cast<double>(report.samples) : 1.0;
  report.overall = {std::sqrt(pos_total / total), std::sqrt(vel_total / total)};
  for (long long h : hits) report.success.push_back(static_cast<double>(h) / total);
  return report;
}

}  // namespace drn
