#include "rlcm/rewards.hpp"

#include "rlcm/errors.hpp"

namespace rlcm::rewards {
namespace {

// Unweighted auxiliary value per variant, always in [-1, 1]. This is what
// gets stored in r_margin; the reward contribution is lambda times it.
double auxiliary_value(const TrajectoryRecord& record, RewardVariant variant) {
  if (variant == RewardVariant::none) return 0.0;
  if (record.budget_samples.empty())
    throw ValidationError("budget_samples", "variant requires budget samples");
  const BudgetProbeSample& last = record.budget_samples.back();
  switch (variant) {
    case RewardVariant::rlcm_margin:
      return margin_reward(record.budget_samples);
    case RewardVariant::final_brier: {
      const double d = last.mc_target - last.probe_conf;
      return -d * d;
    }
    case RewardVariant::final_margin:
      return record.correct ? last.probe_conf : 0.0;
    case RewardVariant::process_brier: {
      double acc = 0.0;
      for (const BudgetProbeSample& s : record.budget_samples) {
        const double d = s.mc_target - s.probe_conf;
        acc += d * d;
      }
      return -acc / static_cast<double>(record.budget_samples.size());
    }
    case RewardVariant::none:
      break;
  }
  throw ConfigError("reward-variant: unknown variant");
}

}  // namespace

double answer_reward(bool correct) { return correct ? 1.0 : -1.0; }

double margin_reward(std::span<const BudgetProbeSample> samples) {
  if (samples.empty()) throw ValidationError("budget_samples", "empty sample list");
  double sum_pos = 0.0, sum_neg = 0.0;
  int n_pos = 0, n_neg = 0;
  // Y_b >= 1/2 goes to the solvable side, boundary included.
  for (const BudgetProbeSample& s : samples) {
    if (s.mc_target >= 0.5) {
      sum_pos += s.probe_conf;
      ++n_pos;
    } else {
      sum_neg += s.probe_conf;
      ++n_neg;
    }
  }
  const double pos = n_pos > 0 ? sum_pos / n_pos : 0.0;
  const double neg = n_neg > 0 ? sum_neg / n_neg : 0.0;
  return pos - neg;
}

double ablation_reward(const TrajectoryRecord& record, RewardVariant variant,
                       double lambda) {
  return lambda * auxiliary_value(record, variant);
}

double combined_reward(TrajectoryRecord& record, const RewardConfig& cfg) {
  if (cfg.lambda < 0.0) throw ConfigError("lambda: must be >= 0");
  record.r_ans = answer_reward(record.correct);
  record.r_margin = auxiliary_value(record, cfg.variant);
  record.r_total = record.r_ans + cfg.lambda * record.r_margin;
  return record.r_total;
}

}  // namespace rlcm::rewards
