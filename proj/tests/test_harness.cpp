#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "drn/harness.hpp"
#include "drn/scenario_io.hpp"

using namespace drn;

namespace {

Scenario preset(const std::string& name, const Overrides& o = {}) {
  return load_scenario(std::string(DRN_PRESET_DIR) + "/" + name + ".json", o);
}

Scenario small_square(int steps, int runs) {
  Overrides o;
  o.steps = steps;
  o.runs = runs;
  return preset("fig4_los_square", o);
}

EpisodeLog constant_error_log(double error, int steps, int agents) {
  EpisodeLog log;
  for (int k = 1; k <= steps; ++k) {
    StepLog s;
    s.k = k;
    s.target.position = Vec3(k, 0, 90);
    for (int i = 0; i < agents; ++i) {
      AgentStep a;
      a.estimate.head<3>() = s.target.position + Vec3(0, error, 0);
      s.agents.push_back(a);
    }
    log.steps.push_back(s);
  }
  return log;
}

}  // namespace

TEST(SuccessRate, AllPerfect) {
  const std::vector<double> sr = success_rate(std::vector<double>(10, 0.0), {0.0, 0.5, 3.0});
  for (double v : sr) EXPECT_EQ(v, 1.0);
}

TEST(SuccessRate, Counting) {
  const std::vector<double> sr = success_rate({2.0, 0.5, 2.0, 0.5}, {1.0});
  EXPECT_DOUBLE_EQ(sr[0], 0.5);
}

TEST(SuccessRate, ThresholdIsInclusive) {
  EXPECT_DOUBLE_EQ(success_rate({1.0}, {1.0})[0], 1.0);
}

TEST(SuccessRate, NondecreasingInThreshold) {
  std::mt19937_64 rng(12);
  std::exponential_distribution<double> e(0.5);
  const std::vector<double> th = default_thresholds();
  for (int n = 0; n < 50; ++n) {
    std::vector<double> errors(200);
    for (double& x : errors) x = e(rng);
    const std::vector<double> sr = success_rate(errors, th);
    for (std::size_t i = 1; i < sr.size(); ++i) EXPECT_GE(sr[i], sr[i - 1]);
  }
}

TEST(Rmse, Examples) {
  EXPECT_EQ(rmse({constant_error_log(0.0, 5, 3)}).position, 0.0);
  EXPECT_NEAR(rmse({constant_error_log(2.0, 5, 3)}).position, 2.0, 1e-12);
  EXPECT_NEAR(rmse({constant_error_log(3.0, 1, 1), constant_error_log(4.0, 1, 1)}).position, std::sqrt(12.5), 1e-12);
  EXPECT_NEAR(std::sqrt(12.5), 3.536, 1e-3);
}

TEST(Seeds, DistinctAndStable) {
  EXPECT_EQ(episode_seed(1, 0), episode_seed(1, 0));
  EXPECT_NE(episode_seed(1, 0), episode_seed(1, 1));
  EXPECT_NE(episode_seed(1, 0), episode_seed(2, 0));
  std::mt19937_64 a = stream(5, 2), b = stream(5, 3);
  EXPECT_NE(a(), b());
}

TEST(RunEpisode, SingleStaticStepIsOneUpdate) {
  Scenario s = small_square(1, 1);
  s.process_intensity = Vec3::Zero();
  s.target.velocity = Vec3::Zero();
  s.nav.step = 0.0;
  for (AgentSpec& a : s.agents) a.altitude_range.reset();
  const std::uint64_t seed = 7;
  const EpisodeLog log = run_episode(s, seed);
  ASSERT_EQ(log.steps.size(), 1u);

  // Same draws as the episode: agent i senses from stream 2 + i.
  InfoVector info;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    SensorState sensor;
    sensor.id = static_cast<int>(i);
    sensor.position = s.agents[i].position;
    sensor.caps = s.agents[i].caps;
    sensor.profile = s.agents[i].profile;
    std::mt19937_64 rng = stream(seed, 2 + i);
    ReceivedRecord r;
    r.record = sense(s.target, sensor, s.rcs, {}, s.outliers, 1, rng);
    r.effective_time = 1;
    info.entries.push_back(r);
  }
  const Belief expected = update(Belief::diagonal(Vec6::Zero(), s.initial_position_std, s.initial_velocity_std), info);
  for (const AgentStep& a : log.steps[0].agents) {
    EXPECT_LT((a.estimate - expected.mean).norm(), 1e-9);
    EXPECT_LT((a.covariance_diag - expected.covariance.diagonal()).norm(), 1e-9);
  }
}

TEST(RunEpisode, IdenticalSeedsIdenticalLogs) {
  const Scenario s = small_square(200, 1);
  const EpisodeLog a = run_episode(s, 99);
  const EpisodeLog b = run_episode(s, 99);
  EXPECT_EQ(trajectory_csv(a), trajectory_csv(b));
  const EpisodeLog c = run_episode(s, 100);
  EXPECT_NE(trajectory_csv(a), trajectory_csv(c));
}

TEST(RunEpisode, LosSquareFullLengthWithoutViolations) {
  Scenario s = small_square(3000, 1);
  const MetricsReport r = run_monte_carlo(s, {.threads = 1});
  EXPECT_EQ(r.samples, 3000LL * static_cast<long long>(s.agents.size()));
  EXPECT_EQ(r.safety.obstacle_penetrations, 0);
  EXPECT_GE(r.safety.min_inter_uav, s.nav.thresholds.inter_uav - s.nav.limits.v_max * s.dt);
  EXPECT_GE(r.safety.min_altitude, 0.0);
}

TEST(RunEpisode, InvalidScenarioThrows) {
  Scenario s = small_square(10, 1);
  s.agents.clear();
  EXPECT_THROW(run_episode(s, 1), std::invalid_argument);
}

TEST(Validate, NamesFields) {
  Scenario s = small_square(10, 1);
  s.nav.limits.v_min = 30.0;
  s.obstacles.push_back({Vec3(5, 0, 0), Vec3(0, 1, 1)});
  const auto issues = validate(s);
  bool speed = false, box = false;
  for (const ValidationIssue& i : issues) {
    speed = speed || i.field == "nav.v_min_mps";
    box = box || i.field.rfind("obstacles[", 0) == 0;
  }
  EXPECT_TRUE(speed);
  EXPECT_TRUE(box);
}

TEST(MonteCarlo, SingleRunMatchesEpisode) {
  const Scenario s = small_square(150, 1);
  const MetricsReport r = run_monte_carlo(s, {.threads = 1});
  const EpisodeLog log = run_episode(s, r.seeds[0]);
  const Rmse direct = rmse({log});
  EXPECT_NEAR(r.overall.position, direct.position, 1e-9 * (1.0 + direct.position));
  EXPECT_NEAR(r.overall.velocity, direct.velocity, 1e-9 * (1.0 + direct.velocity));
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  const Scenario s = small_square(100, 4);
  const MetricsReport one = run_monte_carlo(s, {.threads = 1});
  const MetricsReport many = run_monte_carlo(s, {.threads = 3});
  EXPECT_EQ(one.overall.position, many.overall.position);
  EXPECT_EQ(one.overall.velocity, many.overall.velocity);
  EXPECT_EQ(one.success, many.success);
  EXPECT_EQ(one.seeds, many.seeds);
}

TEST(MonteCarlo, BurnInExcludesSteps) {
  const Scenario s = small_square(50, 2);
  const MetricsReport r = run_monte_carlo(s, {.burn_in = 10, .threads = 1});
  EXPECT_EQ(r.samples, 2LL * 40 * static_cast<long long>(s.agents.size()));
}

TEST(MonteCarlo, SuccessCurveMonotone) {
  const MetricsReport r = run_monte_carlo(small_square(100, 2), {.threads = 1});
  for (std::size_t i = 1; i < r.success.size(); ++i) EXPECT_GE(r.success[i], r.success[i - 1]);
}
