// End-to-end checks of the command-line pipeline. Each test shells out to
// the real binary, so these double as smoke tests for flag parsing and
// exit codes.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rlcm/record.hpp"
#include "rlcm/rewards.hpp"

#ifndef RLCM_CLI_PATH
#define RLCM_CLI_PATH "rlcm"
#endif

namespace fs = std::filesystem;
using namespace rlcm;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RLCM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kWork = "cli_test_work";

}  // namespace

TEST_CASE("train twice with the same seed emits byte-identical stats") {
  fs::remove_all(kWork);
  const std::string dir = (kWork / "t").string();
  REQUIRE(run_cli("train --reward-variant none --seed 7 --iterations 20 --batch-size 8 "
                  "--out-dir " + dir) == 0);
  const std::string first = slurp(kWork / "t" / "train_stats.csv");
  REQUIRE(run_cli("train --reward-variant none --seed 7 --iterations 20 --batch-size 8 "
                  "--out-dir " + dir) == 0);
  CHECK(first == slurp(kWork / "t" / "train_stats.csv"));
  CHECK(first.find("iteration,accuracy,mean_reward,probe_loss,mean_margin,ece_online") == 0);
}

TEST_CASE("stages re-run from their on-disk inputs alone") {
  const std::string dir = (kWork / "t").string();
  REQUIRE(run_cli("rollout-eval --seed 7 --eval-tasks 6 --rollouts 4 --out-dir " + dir) == 0);
  REQUIRE(run_cli("calibrate --out-dir " + dir) == 0);
  const std::string metrics = slurp(kWork / "t" / "metrics.json");

  // wipe derived artifacts and regenerate from the log only
  fs::remove(kWork / "t" / "metrics.json");
  fs::remove(kWork / "t" / "reliability.csv");
  REQUIRE(run_cli("calibrate --out-dir " + dir) == 0);
  CHECK(slurp(kWork / "t" / "metrics.json") == metrics);

  REQUIRE(run_cli("ltt --alpha 0.2 --out-dir " + dir) == 0);
  CHECK(fs::exists(kWork / "t" / "ltt_summary.csv"));
  CHECK(fs::exists(kWork / "t" / "ltt_audit_a0.20.csv"));
  REQUIRE(run_cli("vote --out-dir " + dir) == 0);
  CHECK(fs::exists(kWork / "t" / "vote_summary.csv"));
  REQUIRE(run_cli("report --out-dir " + dir) == 0);
  CHECK(fs::exists(kWork / "t" / "report" / "budget_curve.csv"));
}

TEST_CASE("validation problems exit with code 2, missing subcommand too") {
  CHECK(run_cli("train --group-size 0 --out-dir " + (kWork / "bad").string()) == 2);
  CHECK(run_cli("train --reward-variant bogus --out-dir " + (kWork / "bad").string()) == 2);
  CHECK(run_cli("calibrate --log no_such.jsonl --out-dir " + (kWork / "bad").string()) == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("config file keys are overridable by flags of the same name") {
  fs::create_directories(kWork);
  const fs::path cfg_path = kWork / "sweep.ini";
  std::ofstream(cfg_path) << "iterations = 5\nbatch-size = 4\nlambda = 0.3\nseed = 3\n";
  const std::string dir = (kWork / "cfg_run").string();
  REQUIRE(run_cli("train --config " + cfg_path.string() + " --lambda 0.05 --out-dir " + dir) == 0);
  const std::string resolved = slurp(kWork / "cfg_run" / "run_config.ini");
  CHECK(resolved.find("lambda = 0.05") != std::string::npos);  // flag wins
  CHECK(resolved.find("batch-size = 4") != std::string::npos); // file applies
}

TEST_CASE("report on a log with perfect confidences yields zero ECE columns") {
  // four records per task, probe confidence exactly 0.25, exactly one of
  // four correct at every budget: per-bin accuracy equals confidence
  const fs::path dir = kWork / "perfect";
  fs::create_directories(dir);
  std::vector<TrajectoryRecord> records;
  for (int task = 0; task < 4; ++task) {
    for (int k = 0; k < 4; ++k) {
      TrajectoryRecord r;
      r.task_id = "t-" + std::to_string(task);
      r.seed = static_cast<std::uint64_t>(task * 4 + k);
      r.actions = {0, 1, 2, 3};
      r.step_logprobs = {-0.5, -0.5, -0.5, -0.5};
      r.budgets = {2, 4};
      for (int b : r.budgets) {
        BudgetProbeSample s;
        s.budget = b;
        s.features = {0.0, 1.0};
        s.k_samples = 4;
        s.mc_target = 0.25;
        s.probe_conf = 0.25;
        s.readout = k == 0 ? 1 : 0;  // exactly 1 in 4 matches gold=1
        r.budget_samples.push_back(s);
      }
      r.gold_answer = 1;
      r.final_answer = k == 0 ? 1 : 0;
      r.correct = k == 0;
      r.r_ans = r.correct ? 1.0 : -1.0;
      rewards::combined_reward(r, {0.1, RewardVariant::rlcm_margin});
      records.push_back(std::move(r));
    }
  }
  write_rollout_log((dir / "rollouts.jsonl").string(), records);
  REQUIRE(run_cli("report --out-dir " + dir.string()) == 0);
  std::ifstream in(dir / "report" / "budget_curve.csv");
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0");  // ece column
  }
  CHECK(rows == 2);
}

TEST_CASE("cleanup") { fs::remove_all(kWork); }
