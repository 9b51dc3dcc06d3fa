#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace rlcm {

enum class RewardVariant { rlcm_margin, final_brier, final_margin, process_brier, none };

RewardVariant reward_variant_from_string(const std::string& name);
std::string to_string(RewardVariant v);

// Full run configuration. Defaults follow the training recipe the rest of
// the toolchain assumes (6 rollouts per group, batch 32, lambda 0.1, K=4
// forced readouts per budget, a budget every 4 steps). Every key can come
// from a flat key=value config file and be overridden by the CLI flag of
// the same name.
struct RunConfig {
  std::uint64_t seed = 0;

  // group sampling / GRPO
  int group_size = 6;
  int batch_size = 32;
  double lambda = 0.1;
  std::string reward_variant = "rlcm_margin";
  double clip_eps = 0.2;
  int inner_epochs = 1;
  int iterations = 300;
  double lr_policy = 2.0;
  double temperature_train = 0.8;
  double temperature_eval = 0.6;
  int checkpoint_every = 100;

  // probe
  int probe_hidden = 32;
  double lr_probe = 1e-2;
  double probe_momentum = 0.9;

  // budgets / Monte Carlo readouts
  int k_samples = 4;
  int budget_stride = 4;
  bool include_final_budget = true;

  // environment
  int num_actions = 4;
  int num_answers = 8;
  int horizon = 24;
  double delta_plus = 0.2;
  double delta_minus = 0.1;
  double derail_q = 0.5;
  double g_max = 0.95;
  double d_min = 0.2;
  double d_max = 0.8;
  int feature_dim = 16;
  double feature_noise = 0.1;

  // evaluation / calibration
  int eval_tasks = 64;
  int rollouts = 32;
  int bins = 10;

  // risk control
  double ltt_delta = 0.1;
  int patience = 2;
  double ltt_split = 0.5;
  std::string ltt_bound = "exact";  // exact | hoeffding

  void validate() const;

  // flat key=value view (kebab-case keys, deterministic order)
  std::map<std::string, std::string> to_map() const;
  static RunConfig from_map(const std::map<std::string, std::string>& kv);
};

// Parses a flat key=value map, fills defaults for missing keys, and
// validates ranges. Throws ConfigError naming the bad key otherwise.
RunConfig validate_run_config(const std::map<std::string, std::string>& kv);

// Reads `key = value` lines ('#' comments, blank lines allowed).
std::map<std::string, std::string> load_config_file(const std::string& path);

}  // namespace rlcm
