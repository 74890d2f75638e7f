#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "drn/comms.hpp"
#include "drn/core.hpp"
#include "drn/nav.hpp"
#include "drn/radar.hpp"
#include "drn/tracker.hpp"
#include "drn/world.hpp"

namespace drn {

struct AgentSpec {
  Vec3 position = Vec3::Zero();
  // When set, z is drawn uniformly from [lo, hi] at the start of every episode.
  std::optional<std::array<double, 2>> altitude_range;
  Capabilities caps{true, false, false};
  RadarProfile profile;
  bool fixed = false;  // ground station: senses and relays, never moves
};

enum class InitialMean {
  kOrigin,      // m0 = 0
  kPerturbed,   // m0 = true initial state + one draw from N(0, P0), shared by all agents
};

struct Scenario {
  std::string name = "scenario";
  std::vector<AgentSpec> agents;
  TargetState target;
  Vec3 process_intensity = Vec3(1e-5, 1e-5, 0.0);
  // Intensity assumed by the trackers; unset: the true one.
  std::optional<Vec3> tracker_process_intensity;
  double dt = 1.0;
  double rcs = 1.0;
  double initial_position_std = 20.0;
  double initial_velocity_std = 0.5;
  InitialMean initial_mean = InitialMean::kOrigin;
  int update_iterations = 1;  // 1: plain EKF; more: iterated EKF relinearization
  std::vector<Obstacle> obstacles;
  CommsConfig comms;
  NavConfig nav;
  OutlierModel outliers;
  int steps = 3000;
  int runs = 100;
  std::uint64_t seed = 1;
};

struct ValidationIssue {
  std::string field;
  std::string message;
};

/// Every violated invariant, each naming the offending field.
std::vector<ValidationIssue> validate(const Scenario& scenario);

struct AgentStep {
  Vec3 position = Vec3::Zero();
  Vec6 estimate = Vec6::Zero();
  Vec6 covariance_diag = Vec6::Zero();
  double cost = 0.0;
  int active_constraints = 0;
  bool pursuit = false;
};

struct StepLog {
  int k = 0;
  TargetState target;
  std::uint64_t hop_digest = 0;
  std::vector<AgentStep> agents;
};

struct EpisodeLog {
  std::uint64_t seed = 0;
  std::vector<StepLog> steps;
};

/// Per-episode seed: counter-mode split of the master seed.
std::uint64_t episode_seed(std::uint64_t master, std::uint64_t episode);
/// Independent stream of an episode (0: target, 1: setup, 2 + i: agent i).
std::mt19937_64 stream(std::uint64_t episode_seed, std::uint64_t index);

/// K steps of sense, exchange, track, control, move, with everything drawn from `seed`.
/// Throws std::invalid_argument on an invalid scenario.
EpisodeLog run_episode(const Scenario& scenario, std::uint64_t seed);

/// Fraction of errors with e <= threshold, one entry per threshold.
std::vector<double> success_rate(const std::vector<double>& errors, const std::vector<double>& thresholds);

struct Rmse {
  double position = 0.0;
  double velocity = 0.0;
};

/// Root mean square over steps, agents and episodes of each agent's own estimate error.
Rmse rmse(const std::vector<EpisodeLog>& logs);

struct SafetySummary {
  double min_inter_uav = kNoObstacle;      // m
  double min_obstacle_clearance = kNoObstacle;
  double min_altitude = kNoObstacle;
  int obstacle_penetrations = 0;           // steps whose motion segment crosses a box
};

struct MetricsReport {
  std::vector<double> thresholds;
  std::vector<double> success;
  Rmse overall;
  std::vector<Rmse> per_agent;
  std::vector<std::uint64_t> seeds;
  SafetySummary safety;
  int burn_in = 0;
  long long samples = 0;
};

struct MonteCarloOptions {
  std::vector<double> thresholds;  // empty: 0.1 m .. 10 m grid
  int burn_in = 0;                 // steps excluded from the metrics
  int threads = 0;                 // 0: hardware concurrency
};

std::vector<double> default_thresholds();

/// M independent episodes; the result does not depend on the thread count.
MetricsReport run_monte_carlo(const Scenario& scenario, const MonteCarloOptions& options = {});

}  // namespace drn
