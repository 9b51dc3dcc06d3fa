#pragma once

#include <span>

#include "rlcm/config.hpp"
#include "rlcm/record.hpp"

namespace rlcm::rewards {

struct RewardConfig {
  double lambda = 0.1;  // >= 0
  RewardVariant variant = RewardVariant::rlcm_margin;
};

// +1 if the final answer matches gold, -1 otherwise.
double answer_reward(bool correct);

// Margin between average probe confidence over solvable and unsolvable
// budgets: mean C over {Y >= 1/2} minus mean C over {Y < 1/2}, an empty
// set contributing 0. Result in [-1, 1]. Throws on an empty sample list.
double margin_reward(std::span<const BudgetProbeSample> samples);

// The auxiliary reward term only (already scaled by lambda):
//   final_brier:    -lambda * (Y - C)^2 at the final budget
//   final_margin:   +lambda * 1[correct] * C at the final budget
//   process_brier:  -lambda * mean over budgets of (Y_b - C_b)^2
//   rlcm_margin:    +lambda * margin_reward
//   none:           0
double ablation_reward(const TrajectoryRecord& record, RewardVariant variant,
                       double lambda);

// r_ans plus the variant's auxiliary term. Writes r_margin (the unweighted
// auxiliary value, always in [-1,1]) and r_total = r_ans + lambda*r_margin
// into the record, and returns r_total.
double combined_reward(TrajectoryRecord& record, const RewardConfig& cfg);

}  // namespace rlcm::rewards
