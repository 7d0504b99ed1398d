// Runs the peerfl executable and checks exit codes and outputs.
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome sh(const std::string& args) {
  const std::string cmd = std::string(PEERFL_CLI) + " " + args;
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) o.out.append(buf, n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("peerfl_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string file(const std::string& name, const std::string& text) {
    const auto p = (dir_ / name).string();
    std::ofstream(p) << text;
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenConfigEmitsEveryPreset) {
  for (const char* name : {"line3", "star10", "scale100"}) {
    const auto o = sh(std::string("gen-config --preset ") + name);
    EXPECT_EQ(o.code, 0) << name;
    EXPECT_NE(o.out.find("seed:"), std::string::npos);
    const auto cfg = file(std::string(name) + ".yaml", o.out);
    EXPECT_EQ(sh("validate --config " + cfg).code, 0) << name;
  }
  EXPECT_EQ(sh("gen-config --preset nope 2>/dev/null").code, 2);
}

TEST_F(Cli, ValidateReportsConfigErrorsWithExitTwo) {
  const auto bad = file("bad.yaml", "seed: 1\ndevices: {count: 4}\ntopology: {kind: explicit, edges: [[0,1],[2,3]]}\n");
  const auto o = sh("validate --config " + bad + " 2>&1");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.out.find("topology: no path between device 0 and device 2"), std::string::npos) << o.out;
  const auto unparsable = file("syntax.yaml", "seed: [1\n");
  EXPECT_EQ(sh("validate --config " + unparsable + " 2>/dev/null").code, 2);
  EXPECT_EQ(sh("run --config " + bad + " 2>/dev/null").code, 2);
  EXPECT_EQ(sh("run 2>/dev/null").code, 2);
}

TEST_F(Cli, RunWritesDeterministicMetricsAndSummary) {
  const auto cfg = file("line3.yaml", sh("gen-config --preset line3").out);
  const auto a = sh("run --config " + cfg + " --out " + path("a.csv") + " --summary");
  ASSERT_EQ(a.code, 0);
  const auto summary = nlohmann::json::parse(a.out);
  EXPECT_EQ(summary["devices"], 3);
  ASSERT_EQ(sh("run --config " + cfg + " --out " + path("b.csv")).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  ASSERT_EQ(sh("run --config " + cfg + " --seed 99 --out " + path("c.csv")).code, 0);
  EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));

  const auto stdout_run = sh("run --config " + cfg + " 2>/dev/null");
  EXPECT_EQ(stdout_run.out, slurp(path("a.csv")));

  const auto jsonl = sh("run --config " + cfg + " --format jsonl");
  ASSERT_EQ(jsonl.code, 0);
  std::istringstream lines(jsonl.out);
  std::string line;
  while (std::getline(lines, line)) EXPECT_NO_THROW(nlohmann::json::parse(line));
}

TEST_F(Cli, RuntimeFailureExitsThree) {
  const auto cfg = file("line3.yaml", sh("gen-config --preset line3").out);
  EXPECT_EQ(sh("run --config " + cfg + " --out /no/such/dir/m.csv 2>/dev/null").code, 3);
}

TEST_F(Cli, DivergentTrainingExitsThree) {
  const auto cfg = file("blowup.yaml", R"(
seed: 1
rounds: 2
epochs_per_round: 20
learning_rate: 1e300
data: {rows: 300, features: 4, classes: 3, separation: 0.5}
devices: {count: 2}
model: {hidden: [8]}
)");
  const auto o = sh("run --config " + cfg + " 2>&1 >/dev/null");
  EXPECT_EQ(o.code, 3) << o.out;
  EXPECT_NE(o.out.find("layer"), std::string::npos) << o.out;
}
