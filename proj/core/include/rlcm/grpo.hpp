#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rlcm/config.hpp"
#include "rlcm/envsim.hpp"
#include "rlcm/policy.hpp"
#include "rlcm/probe.hpp"
#include "rlcm/rewards.hpp"

namespace rlcm::grpo {

// G rollouts of one task with their rewards and group-relative advantages.
struct RolloutGroup {
  envsim::TaskSpec task;
  std::vector<policy::PolicyRollout> rollouts;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

// (R_i - mean) / std with population std; all zeros when std < 1e-8
// (degenerate all-equal groups are a no-op). Throws for fewer than 2
// rewards.
std::vector<double> group_advantages(std::span<const double> rewards);

// min(ratio * adv, clip(ratio, 1-eps, 1+eps) * adv)
double clipped_term(double ratio, double advantage, double eps);

// Mean over groups of (1/G) sum_i (1/|y_i|) sum_t clipped_term(r_it, A_i),
// with r_it = exp(logpi_new - logpi_old) per step. Old log-probs are the
// ones recorded in the rollouts.
double grpo_objective(std::span<const RolloutGroup> groups,
                      const policy::PolicyParams& params_new, double eps);

// Objective value plus its gradient w.r.t. the new policy weights
// (clipped steps contribute zero gradient).
double grpo_objective_grad(std::span<const RolloutGroup> groups,
                           const policy::PolicyParams& params_new, double eps,
                           std::vector<double>* grad_w);

struct IterationStats {
  int iteration = 0;
  double accuracy = 0.0;
  double mean_reward = 0.0;
  double probe_loss = 0.0;  // per-sample mean BCE, before the probe update
  double mean_margin = 0.0;
  double ece_online = 0.0;  // final-budget probe conf vs correctness
};

// Joint policy+probe training state.
class Trainer {
 public:
  Trainer(const RunConfig& cfg, std::uint64_t seed);

  // One GRPO iteration: sample a batch of task groups, fill probe
  // confidences (pre-update), compute combined rewards and advantages,
  // run inner_epochs ascent steps on the clipped objective, then one
  // probe update on all budget samples.
  IterationStats train_iteration();

  const policy::PolicyParams& policy_params() const { return policy_; }
  const probe::ProbeParams& probe_params() const { return probe_; }
  const envsim::Environment& environment() const { return env_; }
  int iteration() const { return iteration_; }

 private:
  RunConfig cfg_;
  envsim::Environment env_;
  policy::PolicyParams policy_;
  probe::ProbeParams probe_;
  probe::ProbeGradient probe_velocity_;
  std::uint64_t seed_ = 0;
  int iteration_ = 0;
};

}  // namespace rlcm::grpo
