#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string preset(const std::string& name) { return std::string(DRN_PRESET_DIR) + "/" + name + ".json"; }

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + DRN_SIM_EXE + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("drn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }
  fs::path patched(const std::string& base, const std::function<void(nlohmann::json&)>& edit) {
    nlohmann::json doc;
    std::ifstream(preset(base)) >> doc;
    edit(doc);
    return write("patched.json", doc.dump(2));
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, PresetsValidate) {
  for (const char* name : {"fig4_los_square", "fig6_rcs_sweep", "fig7_multihop", "fig8_nlos", "fig8_terrestrial",
                           "table1_sweep"}) {
    EXPECT_EQ(run("validate --preset " + std::string(name)), 0) << name;
    EXPECT_EQ(run("validate --scenario \"" + preset(name) + "\""), 0) << name;
  }
}

TEST_F(Cli, SpeedBandRejected) {
  const fs::path p = patched("fig4_los_square", [](nlohmann::json& d) { d["nav"]["v_min_mps"] = 25.0; });
  const std::string cmd = std::string("\"") + DRN_SIM_EXE + "\" validate --scenario \"" + p.string() + "\" 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string text;
  char buf[256];
  while (fgets(buf, sizeof buf, pipe)) text += buf;
  const int status = pclose(pipe);
  EXPECT_EQ(WEXITSTATUS(status), 2);
  EXPECT_NE(text.find("nav.v_min_mps"), std::string::npos) << text;
}

TEST_F(Cli, InvertedObstacleRejected) {
  const fs::path p = patched("fig8_nlos", [](nlohmann::json& d) {
    d["obstacles"][0]["min_m"] = nlohmann::json::array({500.0, 0.0, 0.0});
  });
  EXPECT_EQ(run("validate --scenario \"" + p.string() + "\""), 2);
}

TEST_F(Cli, MalformedFileLeavesNoOutputs) {
  const fs::path p = write("bad.json", "{ \"steps\": ");
  const fs::path out = dir_ / "out";
  EXPECT_EQ(run("simulate --scenario \"" + p.string() + "\" --out \"" + out.string() + "\""), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(Cli, MissingFile) {
  EXPECT_EQ(run("validate --scenario \"" + (dir_ / "nope.json").string() + "\""), 2);
}

TEST_F(Cli, SingleStepRun) {
  const fs::path out = dir_ / "out";
  EXPECT_EQ(run("simulate --preset fig4_los_square --steps 1 --mc 1 --trajectory --out \"" + out.string() + "\""), 0);
  for (const char* f : {"metrics.json", "sr_curve.csv", "rmse.csv", "trajectory.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const nlohmann::json manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  for (const auto& entry : fs::directory_iterator(out)) {
    const std::string name = entry.path().filename().string();
    bool listed = false;
    for (const auto& o : manifest["outputs"]) listed = listed || o.get<std::string>() == name;
    EXPECT_TRUE(listed) << name;
  }
}

TEST_F(Cli, ReproducibleCsv) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  const std::string args = "simulate --preset fig4_los_square --steps 40 --mc 3 --seed 5 --trajectory --threads 1";
  ASSERT_EQ(run(args + " --out \"" + a.string() + "\""), 0);
  ASSERT_EQ(run("simulate --preset fig4_los_square --steps 40 --mc 3 --seed 5 --trajectory --threads 2 --out \"" +
                b.string() + "\""),
            0);
  for (const char* f : {"sr_curve.csv", "rmse.csv", "trajectory.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_FALSE(slurp(a / f).empty()) << f;
  }
}

TEST_F(Cli, SweepRows) {
  const fs::path out = dir_ / "out";
  ASSERT_EQ(run("sweep --preset fig7_multihop --steps 5 --mc 1 --axis h_max --values 1,2,3 --out \"" +
                out.string() + "\""),
            0);
  const std::string csv = slurp(out / "sweep.csv");
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  EXPECT_EQ(lines, 4);
  EXPECT_EQ(csv.rfind("axis,value,sr_1m,rmse_position_m,rmse_velocity_mps\n", 0), 0u);
}

TEST_F(Cli, SweepFleetSizeAlias) {
  EXPECT_EQ(run("sweep --preset fig4_los_square --steps 2 --mc 1 --axis N --values 4,6 --out \"" +
                (dir_ / "out").string() + "\""),
            0);
}

TEST_F(Cli, EmptyGridRejected) {
  EXPECT_EQ(run("sweep --preset fig4_los_square --axis rho --values \"\" --out \"" + (dir_ / "o").string() + "\""),
            2);
}

TEST_F(Cli, UnknownAxisRejected) {
  EXPECT_EQ(run("sweep --preset fig4_los_square --axis wind --values 1,2 --out \"" + (dir_ / "o").string() + "\""),
            2);
}

TEST_F(Cli, UnknownFlagRejected) { EXPECT_EQ(run("simulate --preset fig4_los_square --warp 9"), 2); }
