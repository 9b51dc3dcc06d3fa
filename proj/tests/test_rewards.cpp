#include "rlcm/rewards.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rlcm/errors.hpp"
#include "test_helpers.hpp"

using namespace rlcm;
using namespace rlcm::rewards;

namespace {

BudgetProbeSample sample(double y, double c) {
  BudgetProbeSample s;
  s.mc_target = y;
  s.probe_conf = c;
  s.k_samples = 4;
  return s;
}

// Independent two-pass enumeration of the margin formula.
double margin_oracle(const std::vector<BudgetProbeSample>& samples) {
  double pos = 0.0, neg = 0.0;
  int np = 0, nn = 0;
  for (const auto& s : samples)
    if (s.mc_target >= 0.5) {
      pos += s.probe_conf;
      ++np;
    }
  for (const auto& s : samples)
    if (s.mc_target < 0.5) {
      neg += s.probe_conf;
      ++nn;
    }
  return (np ? pos / np : 0.0) - (nn ? neg / nn : 0.0);
}

}  // namespace

TEST_CASE("answer reward is the sign of correctness") {
  CHECK(answer_reward(true) == 1.0);
  CHECK(answer_reward(false) == -1.0);
  CHECK(answer_reward(true) == -answer_reward(false));
}

TEST_CASE("margin reward hand cases") {
  std::vector<BudgetProbeSample> v{sample(1.0, 0.8), sample(0.75, 0.6), sample(0.25, 0.2)};
  CHECK(margin_reward(v) == doctest::Approx(0.5));

  std::vector<BudgetProbeSample> only_pos{sample(0.75, 0.7)};
  CHECK(margin_reward(only_pos) == doctest::Approx(0.7));  // empty B- contributes 0

  std::vector<BudgetProbeSample> boundary{sample(0.5, 0.4)};
  CHECK(margin_reward(boundary) == doctest::Approx(0.4));  // Y = 1/2 goes to B+

  std::vector<BudgetProbeSample> empty;
  CHECK_THROWS_AS(margin_reward(empty), ValidationError);
}

TEST_CASE("margin reward stays in [-1,1] and hits +1 only at the extreme") {
  rng::Stream s(31);
  for (int i = 0; i < 500; ++i) {
    std::vector<BudgetProbeSample> v;
    const int n = 1 + static_cast<int>(s.uniform_int(6));
    for (int j = 0; j < n; ++j)
      v.push_back(sample(static_cast<double>(s.uniform_int(5)) / 4, s.uniform()));
    const double m = margin_reward(v);
    CHECK(m >= -1.0);
    CHECK(m <= 1.0);
  }
  std::vector<BudgetProbeSample> extreme{sample(1.0, 1.0), sample(0.0, 0.0)};
  CHECK(margin_reward(extreme) == 1.0);
  std::vector<BudgetProbeSample> near{sample(1.0, 1.0), sample(0.0, 0.01)};
  CHECK(margin_reward(near) < 1.0);
}

TEST_CASE("margin reward is permutation invariant") {
  rng::Stream s(32);
  for (int i = 0; i < 100; ++i) {
    std::vector<BudgetProbeSample> v;
    for (int j = 0; j < 6; ++j)
      v.push_back(sample(static_cast<double>(s.uniform_int(5)) / 4, s.uniform()));
    const double before = margin_reward(v);
    for (int k = 5; k > 0; --k)
      std::swap(v[k], v[s.uniform_int(k + 1)]);
    CHECK(margin_reward(v) == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("margin reward equals the two-pass enumeration oracle exactly") {
  rng::Stream s(33);
  for (int pattern = 0; pattern < (1 << 6); ++pattern) {
    std::vector<BudgetProbeSample> v;
    for (int j = 0; j < 6; ++j) {
      const bool pos = pattern & (1 << j);
      const double y = pos ? 0.5 + 0.5 * s.uniform() : 0.49 * s.uniform();
      v.push_back(sample(y, s.uniform()));
    }
    CHECK(margin_reward(v) == margin_oracle(v));
  }
}

TEST_CASE("ablation rewards match the per-variant formulas") {
  rng::Stream s(34);
  TrajectoryRecord r = testing::random_record(s);
  r.budget_samples.back().mc_target = 1.0;
  r.budget_samples.back().probe_conf = 0.6;
  CHECK(ablation_reward(r, RewardVariant::final_brier, 0.1) == doctest::Approx(-0.016));

  r.correct = true;
  r.budget_samples.back().probe_conf = 0.9;
  CHECK(ablation_reward(r, RewardVariant::final_margin, 0.1) == doctest::Approx(0.09));
  r.correct = false;
  CHECK(ablation_reward(r, RewardVariant::final_margin, 0.1) == 0.0);

  for (auto& b : r.budget_samples) b.probe_conf = b.mc_target == 0.0 ? 1e-9 : b.mc_target;
  for (auto& b : r.budget_samples) b.mc_target = b.probe_conf;  // exact match
  CHECK(ablation_reward(r, RewardVariant::process_brier, 0.1) == 0.0);

  CHECK(ablation_reward(r, RewardVariant::rlcm_margin, 0.1) ==
        doctest::Approx(0.1 * margin_oracle(r.budget_samples)));
  CHECK(ablation_reward(r, RewardVariant::none, 0.1) == 0.0);

  TrajectoryRecord bare = r;
  bare.budget_samples.clear();
  CHECK_THROWS_AS(ablation_reward(bare, RewardVariant::final_brier, 0.1), ValidationError);
}

TEST_CASE("combined reward writes the audit fields") {
  rng::Stream s(35);
  TrajectoryRecord r = testing::random_record(s);
  r.final_answer = r.gold_answer;
  r.correct = true;
  // force margin exactly 0.5: one positive at 0.7, one negative at 0.2
  r.budgets = {2, 4};
  r.budget_samples.resize(2);
  r.budget_samples[0] = sample(1.0, 0.7);
  r.budget_samples[0].budget = 2;
  r.budget_samples[0].features = {0.0};
  r.budget_samples[1] = sample(0.0, 0.2);
  r.budget_samples[1].budget = 4;
  r.budget_samples[1].features = {0.0};

  RewardConfig cfg{0.1, RewardVariant::rlcm_margin};
  const double total = combined_reward(r, cfg);
  CHECK(total == doctest::Approx(1.05));
  CHECK(r.r_margin == doctest::Approx(0.5));
  CHECK(r.r_total == total);

  r.final_answer = r.gold_answer + 1;
  r.correct = false;
  r.budget_samples[0] = sample(1.0, 0.0);
  r.budget_samples[0].budget = 2;
  r.budget_samples[1] = sample(0.0, 1.0);
  r.budget_samples[1].budget = 4;
  CHECK(combined_reward(r, cfg) == doctest::Approx(-1.1));  // worst margin -1

  // lambda 0 is the GRPO fallback: r_total equals r_ans bitwise
  RewardConfig off{0.0, RewardVariant::rlcm_margin};
  combined_reward(r, off);
  CHECK(r.r_total == r.r_ans);
}

TEST_CASE("rlcm r_total is bounded by 1 + lambda") {
  rng::Stream s(36);
  RewardConfig cfg{0.1, RewardVariant::rlcm_margin};
  for (int i = 0; i < 200; ++i) {
    TrajectoryRecord r = testing::random_record(s);
    const double total = combined_reward(r, cfg);
    CHECK(total >= -1.0 - cfg.lambda);
    CHECK(total <= 1.0 + cfg.lambda);
    CHECK(r.r_total == doctest::Approx(r.r_ans + cfg.lambda * r.r_margin));
  }
}
