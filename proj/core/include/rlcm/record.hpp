#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rlcm {

inline constexpr int kSchemaVersion = 1;

// Label emitted when the exit policy abandons a problem. Counted as
// incorrect everywhere.
inline constexpr int kAbstainLabel = -1;

// One probed truncation point: features at the budget, the Monte Carlo
// correctness target over k_samples forced readouts, the probe's
// confidence, and the single forced readout an exit at this budget would
// emit.
struct BudgetProbeSample {
  int budget = 0;
  std::vector<double> features;
  double mc_target = 0.0;   // multiple of 1/k_samples, in [0,1]
  double probe_conf = 0.5;  // strictly inside (0,1)
  int k_samples = 1;
  int readout = 0;
};

// One sampled rollout, as stored in the line-delimited rollout log.
struct TrajectoryRecord {
  std::string task_id;
  std::uint64_t seed = 0;
  std::vector<int> actions;
  std::vector<double> step_logprobs;  // natural log, one per action
  std::vector<int> budgets;           // strictly increasing, each <= actions.size()
  std::vector<BudgetProbeSample> budget_samples;
  int final_answer = 0;
  int gold_answer = 0;
  bool correct = false;
  double r_ans = -1.0;    // in {-1, +1}
  double r_margin = 0.0;  // in [-1, 1]
  double r_total = -1.0;
  std::string env_version;

  bool operator==(const TrajectoryRecord&) const = default;
};

inline bool operator==(const BudgetProbeSample& a, const BudgetProbeSample& b) {
  return a.budget == b.budget && a.features == b.features &&
         a.mc_target == b.mc_target && a.probe_conf == b.probe_conf &&
         a.k_samples == b.k_samples && a.readout == b.readout;
}

// (answer, confidence) pair consumed by aggregation and risk control.
struct ScoredAnswer {
  int answer = kAbstainLabel;
  double confidence = 0.0;  // in [0,1]
  int tokens_used = 0;      // steps consumed before exit
};

// Throws ValidationError naming the first violated invariant.
void validate_record(const TrajectoryRecord& r);

// Additionally checks r_total == r_ans + lambda * r_margin.
void validate_record(const TrajectoryRecord& r, double lambda);

// One JSON object per line. parse_record throws ParseError (with byte
// offset) on malformed JSON and ValidationError on invariant violations.
TrajectoryRecord parse_record(const std::string& line);
std::string serialize_record(const TrajectoryRecord& r);

// Whole-log helpers over line-delimited files.
std::vector<TrajectoryRecord> read_rollout_log(const std::string& path);
void write_rollout_log(const std::string& path,
                       const std::vector<TrajectoryRecord>& records);

}  // namespace rlcm
