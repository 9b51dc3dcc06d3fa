#include "rlcm/grpo.hpp"

#include <cmath>

#include "rlcm/calib.hpp"
#include "rlcm/errors.hpp"

namespace rlcm::grpo {

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2)
    throw ValidationError("rewards", "group size must be >= 2");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(var / n);  // population std
  std::vector<double> adv(rewards.size(), 0.0);
  if (std_dev < 1e-8) return adv;  // all-equal groups are a no-op
  for (std::size_t i = 0; i < rewards.size(); ++i)
    adv[i] = (rewards[i] - mean) / std_dev;
  return adv;
}

double clipped_term(double ratio, double advantage, double eps) {
  const double clipped = std::min(std::max(ratio, 1.0 - eps), 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

namespace {

double objective_impl(std::span<const RolloutGroup> groups,
                      const policy::PolicyParams& params_new, double eps,
                      std::vector<double>* grad_w) {
  if (groups.empty()) throw ValidationError("groups", "no rollout groups");
  if (grad_w) grad_w->assign(params_new.weights.size(), 0.0);
  double total = 0.0;
  for (const RolloutGroup& group : groups) {
    if (group.rollouts.size() != group.advantages.size())
      throw ValidationError("advantages", "length mismatch with rollouts");
    const double inv_g = 1.0 / static_cast<double>(group.rollouts.size());
    for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
      const policy::PolicyRollout& ro = group.rollouts[i];
      const TrajectoryRecord& rec = ro.record;
      if (ro.step_features.size() != rec.actions.size() ||
          rec.step_logprobs.size() != rec.actions.size())
        throw ValidationError("step_features", "mismatched trajectory bookkeeping");
      if (rec.actions.empty()) continue;
      const double adv = group.advantages[i];
      const double inv_len = 1.0 / static_cast<double>(rec.actions.size());
      const double weight = inv_g * inv_len / static_cast<double>(groups.size());
      for (std::size_t t = 0; t < rec.actions.size(); ++t) {
        const std::vector<double> lp_new =
            policy::action_logprobs(params_new, ro.step_features[t]);
        const int action = rec.actions[t];
        const double ratio = std::exp(lp_new[action] - rec.step_logprobs[t]);
        total += weight * clipped_term(ratio, adv, eps);
        if (!grad_w) continue;
        // min() picks the unclipped branch: gradient A * r * dlogpi; the
        // clipped branch is constant in theta.
        const double clipped = std::min(std::max(ratio, 1.0 - eps), 1.0 + eps);
        if (ratio * adv <= clipped * adv) {
          const double coef = weight * adv * ratio / params_new.temperature;
          const std::vector<double>& phi = ro.step_features[t];
          for (int a = 0; a < params_new.num_actions; ++a) {
            const double ind = (a == action ? 1.0 : 0.0) - std::exp(lp_new[a]);
            double* row = &(*grad_w)[static_cast<std::size_t>(a) * params_new.feature_dim];
            for (int j = 0; j < params_new.feature_dim; ++j)
              row[j] += coef * ind * phi[j];
          }
        }
      }
    }
  }
  return total;
}

}  // namespace

double grpo_objective(std::span<const RolloutGroup> groups,
                      const policy::PolicyParams& params_new, double eps) {
  return objective_impl(groups, params_new, eps, nullptr);
}

double grpo_objective_grad(std::span<const RolloutGroup> groups,
                           const policy::PolicyParams& params_new, double eps,
                           std::vector<double>* grad_w) {
  return objective_impl(groups, params_new, eps, grad_w);
}

Trainer::Trainer(const RunConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      env_(envsim::EnvConfig::from_run_config(cfg)),
      policy_(cfg.num_actions, cfg.feature_dim, cfg.temperature_train),
      probe_(probe::init_probe(cfg.probe_hidden, cfg.feature_dim, seed)),
      seed_(seed) {
  cfg_.validate();
}

IterationStats Trainer::train_iteration() {
  const int iter = iteration_;
  const rewards::RewardConfig reward_cfg{
      cfg_.lambda, reward_variant_from_string(cfg_.reward_variant)};

  std::vector<RolloutGroup> groups;
  groups.reserve(cfg_.batch_size);
  for (int j = 0; j < cfg_.batch_size; ++j) {
    const std::uint64_t task_index =
        static_cast<std::uint64_t>(iter) * cfg_.batch_size + j;
    RolloutGroup group;
    group.task = env_.sample_task(rng::derive_seed(seed_, "train-task", task_index));
    for (int g = 0; g < cfg_.group_size; ++g) {
      const std::uint64_t rollout_index = task_index * cfg_.group_size + g;
      policy::PolicyRollout ro = policy::sample_trajectory(
          policy_, env_, group.task, cfg_.horizon, cfg_.budget_stride,
          cfg_.include_final_budget, cfg_.k_samples,
          rng::derive_seed(seed_, "rollout", rollout_index));
      // confidences come from the probe as it stood at rollout time,
      // before this iteration's probe update
      for (BudgetProbeSample& s : ro.record.budget_samples)
        s.probe_conf = probe::probe_forward(probe_, s.features);
      group.rewards.push_back(rewards::combined_reward(ro.record, reward_cfg));
      group.rollouts.push_back(std::move(ro));
    }
    group.advantages = group_advantages(group.rewards);
    groups.push_back(std::move(group));
  }

  std::vector<double> grad;
  for (int e = 0; e < cfg_.inner_epochs; ++e) {
    grpo_objective_grad(groups, policy_, cfg_.clip_eps, &grad);
    for (std::size_t i = 0; i < policy_.weights.size(); ++i)
      policy_.weights[i] += cfg_.lr_policy * grad[i];
  }

  std::vector<probe::ProbeSample> batch;
  std::vector<calib::ConfidencePair> final_pairs;
  double reward_sum = 0.0, margin_sum = 0.0;
  int correct_count = 0, n_records = 0;
  for (const RolloutGroup& group : groups) {
    for (const policy::PolicyRollout& ro : group.rollouts) {
      const TrajectoryRecord& rec = ro.record;
      ++n_records;
      reward_sum += rec.r_total;
      margin_sum += rec.r_margin;
      correct_count += rec.correct ? 1 : 0;
      for (const BudgetProbeSample& s : rec.budget_samples)
        batch.push_back({s.features, s.mc_target});
      if (!rec.budget_samples.empty())
        final_pairs.push_back({rec.budget_samples.back().probe_conf, rec.correct});
    }
  }

  IterationStats stats;
  stats.iteration = iter;
  stats.accuracy = static_cast<double>(correct_count) / n_records;
  stats.mean_reward = reward_sum / n_records;
  stats.mean_margin = margin_sum / n_records;
  if (!batch.empty()) {
    stats.probe_loss =
        probe::probe_loss_and_grad(probe_, batch, nullptr) / static_cast<double>(batch.size());
    probe::probe_update(probe_, batch, cfg_.lr_probe, &probe_velocity_,
                        cfg_.probe_momentum);
  }
  if (!final_pairs.empty())
    stats.ece_online =
        calib::calibration_errors(calib::reliability_bins(final_pairs, cfg_.bins)).ece;

  ++iteration_;
  return stats;
}

}  // namespace rlcm::grpo
