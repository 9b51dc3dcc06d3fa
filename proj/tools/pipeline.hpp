#pragma once

#include <string>
#include <vector>

#include "rlcm/config.hpp"

namespace rlcm::pipeline {

enum class ConfSource { probe_final, sequence };
ConfSource conf_source_from_string(const std::string& name);

struct StageOptions {
  RunConfig cfg;
  std::string out_dir = "out";
  std::string log_path;           // defaults to <out_dir>/rollouts.jsonl
  ConfSource conf_source = ConfSource::probe_final;
  std::vector<double> alphas = {0.1, 0.2, 0.3};
  std::string lexicon_path;       // empty: built-in phrase lists
  std::string input_dir;          // lexicon stage
  std::vector<std::string> run_dirs;  // report stage; empty: just out_dir
};

// Each stage is re-runnable from its on-disk inputs alone.
void stage_train(const StageOptions& opt);
void stage_rollout_eval(const StageOptions& opt);
void stage_calibrate(const StageOptions& opt);
void stage_ltt(const StageOptions& opt);
void stage_vote(const StageOptions& opt);
void stage_lexicon(const StageOptions& opt);
void stage_report(const StageOptions& opt);

// train -> rollout-eval -> calibrate -> ltt -> vote -> report. A stage
// failure aborts with the stage name prepended; artifacts already written
// stay on disk.
void run_experiment(const StageOptions& opt);

}  // namespace rlcm::pipeline
