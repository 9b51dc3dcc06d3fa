#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rlcm/envsim.hpp"
#include "rlcm/record.hpp"

namespace rlcm::policy {

// Linear-softmax policy over environment actions. Logits are (W * phi) /
// temperature; the temperature is the behavior temperature used for both
// sampling and the stored log-probabilities, so importance ratios against
// these records are well-defined.
struct PolicyParams {
  int num_actions = 0;
  int feature_dim = 0;
  double temperature = 1.0;
  std::vector<double> weights;  // num_actions x feature_dim, row-major

  PolicyParams() = default;
  PolicyParams(int actions, int dim, double tau = 1.0)
      : num_actions(actions), feature_dim(dim), temperature(tau),
        weights(static_cast<std::size_t>(actions) * dim, 0.0) {}

  double& w(int action, int j) { return weights[static_cast<std::size_t>(action) * feature_dim + j]; }
  double w(int action, int j) const { return weights[static_cast<std::size_t>(action) * feature_dim + j]; }
};

// log softmax((W*phi)/tau); entries exponentiate to a distribution.
std::vector<double> action_logprobs(const PolicyParams& params,
                                    std::span<const double> features);

// Exact gradient of log pi(action|features) w.r.t. W:
// (1/tau) * (e_action - softmax((W*phi)/tau)) (x) phi.
std::vector<double> grad_logprob(const PolicyParams& params,
                                 std::span<const double> features, int action);

// Normalized sequence probability: exp(mean of step log-probs), in (0,1].
// Throws ValidationError on an empty trajectory.
double sequence_confidence(const TrajectoryRecord& record);

// Same, truncated to the first `steps` actions (per-budget variant).
double sequence_confidence_prefix(const TrajectoryRecord& record, int steps);

// A sampled rollout plus the per-step features needed to recompute
// log-probabilities under updated parameters.
struct PolicyRollout {
  TrajectoryRecord record;
  std::vector<std::vector<double>> step_features;
};

// Rolls the environment for max_steps (capped by the horizon), recording
// actions and behavior log-probs, budget features and MC targets, per-
// budget forced readouts, and the final answer. probe_conf is left at 0.5
// for the caller to fill; rewards are left at the answer reward only.
// Deterministic given (params, task, seed).
PolicyRollout sample_trajectory(const PolicyParams& params,
                                const envsim::Environment& env,
                                const envsim::TaskSpec& task, int max_steps,
                                int budget_stride, bool include_final_budget,
                                int k_samples, std::uint64_t seed);

// Flat text checkpoint with a shape header; round-trips exactly.
void save_policy(const PolicyParams& params, const std::string& path);
PolicyParams load_policy(const std::string& path);

}  // namespace rlcm::policy
