#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlcm/config.hpp"
#include "rlcm/rng.hpp"

namespace rlcm::envsim {

inline constexpr const char* kEnvVersion = "latent-chain/1";

struct TaskSpec {
  std::string task_id;
  int gold_answer = 0;      // in {0..A-1}
  double difficulty = 0.0;  // in [0,1], hidden from features
  std::uint64_t rng_seed = 0;
};

struct EnvState {
  int t = 0;
  double progress = 0.0;  // clamped to [0,1]
  bool on_track = true;
  std::vector<double> features;  // dimension D, fixed across all states
};

struct EnvConfig {
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

  double g_min() const { return 1.0 / num_answers; }
  static EnvConfig from_run_config(const RunConfig& cfg);
};

// Latent-chain task environment. Each step has one "good" action derivable
// from the features; good actions raise progress and keep the trajectory
// on track, bad actions lose progress and may derail it. Forced readouts
// emit the gold answer with probability g(progress, on_track), so
// correctness is verifiable and budget truncation is just a step count.
class Environment {
 public:
  explicit Environment(const EnvConfig& cfg);

  const EnvConfig& config() const { return cfg_; }
  int raw_feature_dim() const { return 3 + cfg_.num_actions + 1; }

  // Deterministic in seed: gold answer uniform over labels, difficulty
  // uniform on [d_min, d_max].
  TaskSpec sample_task(std::uint64_t seed) const;

  // Good action at step t, a pure function of (task, t).
  int good_action(const TaskSpec& task, int t) const;

  // Initial state (t=0, progress 0, on track). `noise` feeds the feature
  // noise; one draw per feature computation.
  EnvState reset(const TaskSpec& task, rng::Stream& noise) const;

  // One transition. Good action: progress += delta_plus, and an off-track
  // state re-rails with probability 1 - d*q. Bad action: progress -=
  // delta_minus, and an on-track state derails with probability d*q.
  // Exactly one uniform and one normal are drawn per step regardless of
  // branch. Throws ValidationError if action is out of range.
  EnvState step(const EnvState& state, int action, const TaskSpec& task,
                rng::Stream& noise) const;

  // Probability that a forced readout from this state emits the gold
  // answer: g_min + (g_max - g_min) * progress when on track, g_min
  // (chance level) otherwise.
  double gold_readout_prob(const EnvState& state, const TaskSpec& task) const;

  // Samples one forced answer from the state; remaining mass uniform over
  // the other labels.
  int forced_readout(const EnvState& state, const TaskSpec& task,
                     rng::Stream& rng) const;

  // Monte Carlo correctness target: fraction of K forced readouts that
  // match the gold answer. Throws ValidationError for K < 1.
  double mc_target(const EnvState& state, const TaskSpec& task, int k,
                   rng::Stream& rng) const;

  // Budget set B(y) for a trajectory of `length` steps: every `stride`
  // steps, optionally with the final step appended.
  static std::vector<int> budget_set(int length, int stride, bool include_final);

 private:
  std::vector<double> compute_features(const TaskSpec& task, int t, double progress,
                                       bool on_track, rng::Stream& noise) const;

  EnvConfig cfg_;
  std::vector<double> projection_;  // feature_dim x raw_dim, fixed
};

}  // namespace rlcm::envsim
