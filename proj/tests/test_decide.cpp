#include "rlcm/decide.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rlcm/errors.hpp"

using namespace rlcm;
using namespace rlcm::decide;

namespace {

BudgetTrace make_trace(std::vector<double> confs, std::vector<int> answers, int gold) {
  BudgetTrace t;
  t.confs = std::move(confs);
  t.answers = std::move(answers);
  for (std::size_t i = 0; i < t.confs.size(); ++i) t.budgets.push_back(4 * (1 + static_cast<int>(i)));
  t.gold = gold;
  return t;
}

// Synthetic pool of traces with a controllable per-record solve rate.
// Confidence tracks the true readout-correctness probability, optionally
// with bounded noise.
std::vector<BudgetTrace> synth_pool(int n, rng::Stream& s, double conf_noise,
                                    double hard_fraction = 0.05) {
  std::vector<BudgetTrace> pool;
  const int n_budgets = 6;
  for (int i = 0; i < n; ++i) {
    const bool hard = s.uniform() < hard_fraction;
    const double solve = hard ? s.uniform(0.3, 0.7) : s.uniform(0.9, 1.0);
    BudgetTrace t;
    t.gold = 0;
    for (int b = 1; b <= n_budgets; ++b) {
      const double ramp = std::pow(static_cast<double>(b) / n_budgets, 0.25);
      const double p_correct = solve * ramp;
      t.budgets.push_back(4 * b);
      t.answers.push_back(s.uniform() < p_correct ? 0 : 1 + static_cast<int>(s.uniform_int(7)));
      double c = solve * std::sqrt(ramp);
      if (conf_noise > 0.0) c += s.uniform(-conf_noise, conf_noise);
      t.confs.push_back(std::clamp(c, 0.001, 0.999));
    }
    pool.push_back(std::move(t));
  }
  return pool;
}

double test_risk(const std::vector<BudgetTrace>& traces, const ExitPolicyConfig& cfg) {
  int errors = 0;
  for (const auto& t : traces) {
    ScoredAnswer a = run_exit_policy(t, cfg);
    if (a.answer == kAbstainLabel || a.answer != t.gold) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(traces.size());
}

}  // namespace

TEST_CASE("exit policy rule traces") {
  // persistently low confidence abandons after `patience` budgets
  BudgetTrace low = make_trace({0.1, 0.1, 0.1}, {3, 3, 3}, 3);
  ScoredAnswer a = run_exit_policy(low, {0.2, 1.0, 2});
  CHECK(a.answer == kAbstainLabel);
  CHECK(a.tokens_used == low.budgets[1]);

  // high confidence exits early with that budget's answer
  BudgetTrace high = make_trace({0.3, 0.9}, {1, 2}, 2);
  a = run_exit_policy(high, {0.0, 0.85, 2});
  CHECK(a.answer == 2);
  CHECK(a.tokens_used == high.budgets[1]);
  CHECK(a.confidence == doctest::Approx(0.9));

  // degenerate thresholds always run to the final budget
  BudgetTrace mid = make_trace({0.4, 0.5, 0.6}, {1, 2, 3}, 3);
  a = run_exit_policy(mid, {0.0, 1.0, 2});
  CHECK(a.answer == 3);
  CHECK(a.tokens_used == mid.budgets.back());
}

TEST_CASE("low-confidence streak must be consecutive") {
  BudgetTrace t = make_trace({0.1, 0.5, 0.1, 0.1}, {1, 1, 1, 1}, 1);
  ScoredAnswer a = run_exit_policy(t, {0.2, 1.0, 2});
  CHECK(a.answer == kAbstainLabel);
  CHECK(a.tokens_used == t.budgets[3]);  // streak resets at the 0.5
}

TEST_CASE("exit policy input validation") {
  BudgetTrace empty;
  CHECK_THROWS_AS(run_exit_policy(empty, {0.1, 0.9, 2}), ValidationError);
  BudgetTrace t = make_trace({0.5}, {1}, 1);
  CHECK_THROWS_AS(run_exit_policy(t, {0.9, 0.1, 2}), ValidationError);  // l1 > l2
}

TEST_CASE("lowering the high threshold can only exit earlier") {
  rng::Stream s(61);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> confs;
    std::vector<int> answers;
    for (int i = 0; i < 6; ++i) {
      confs.push_back(s.uniform());
      answers.push_back(static_cast<int>(s.uniform_int(4)));
    }
    BudgetTrace t = make_trace(confs, answers, 0);
    const double l1 = 0.05;
    double prev_tokens = -1.0;
    for (double l2 : {0.5, 0.7, 0.9, 1.0}) {  // ascending
      ScoredAnswer a = run_exit_policy(t, {l1, l2, 2});
      if (prev_tokens >= 0.0) CHECK(prev_tokens <= a.tokens_used + 1e-12);
      prev_tokens = a.tokens_used;
    }
  }
}

TEST_CASE("binomial tail p-values") {
  CHECK(binomial_pvalue(10, 0, 0.5) == doctest::Approx(0.0009765625).epsilon(1e-10));
  CHECK(binomial_pvalue(4, 1, 0.5) == doctest::Approx(0.3125).epsilon(1e-12));
  CHECK(binomial_pvalue(7, 7, 0.3) == 1.0);
  CHECK_THROWS_AS(binomial_pvalue(0, 0, 0.5), ValidationError);
  CHECK_THROWS_AS(binomial_pvalue(5, 6, 0.5), ValidationError);
  CHECK_THROWS_AS(binomial_pvalue(5, -1, 0.5), ValidationError);
  CHECK_THROWS_AS(binomial_pvalue(5, 2, 0.0), ValidationError);
}

TEST_CASE("hoeffding p-values") {
  CHECK(hoeffding_pvalue(100, 20, 0.2) == 1.0);
  CHECK(hoeffding_pvalue(100, 10, 0.2) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("degenerate one-point grid reduces to the full-budget error rate") {
  rng::Stream s(62);
  std::vector<BudgetTrace> cal = synth_pool(400, s, 0.05);
  int full_errors = 0;
  for (const auto& t : cal)
    if (t.answers.back() != t.gold) ++full_errors;

  LttConfig cfg;
  cfg.alpha = 0.3;
  cfg.delta = 0.1;
  cfg.grid = {{0.0, 1.0}};
  LttResult res = ltt_select(cal, cfg);
  REQUIRE(res.audit.size() == 1);
  CHECK(res.audit[0].risk ==
        doctest::Approx(static_cast<double>(full_errors) / cal.size()).epsilon(1e-12));
  const double p = binomial_pvalue(static_cast<int>(cal.size()), full_errors, cfg.alpha);
  CHECK(res.audit[0].accepted == (p <= cfg.delta));
}

TEST_CASE("all-correct calibration accepts the most compute-saving point") {
  std::vector<BudgetTrace> cal;
  for (int i = 0; i < 50; ++i)
    cal.push_back(make_trace({0.9, 0.95, 0.99}, {5, 5, 5}, 5));
  LttConfig cfg;
  cfg.alpha = 0.2;
  cfg.delta = 0.1;
  cfg.grid = LttConfig::default_grid();
  LttResult res = ltt_select(cal, cfg);
  CHECK_FALSE(res.fallback);
  // every point has zero risk, so the selected one is the min-token point
  double min_tokens = 1e18;
  for (const auto& row : res.audit) min_tokens = std::min(min_tokens, row.mean_tokens);
  for (const auto& row : res.audit)
    if (row.lambda1 == res.lambda1 && row.lambda2 == res.lambda2)
      CHECK(row.mean_tokens == doctest::Approx(min_tokens));
}

TEST_CASE("hopeless calibration falls back to the safe pair") {
  std::vector<BudgetTrace> cal;
  for (int i = 0; i < 50; ++i)
    cal.push_back(make_trace({0.5, 0.5, 0.5}, {1, 1, 1}, 0));  // always wrong
  LttConfig cfg;
  cfg.alpha = 0.1;
  cfg.delta = 0.1;
  cfg.grid = LttConfig::default_grid();
  LttResult res = ltt_select(cal, cfg);
  CHECK(res.fallback);
  CHECK(res.lambda1 == 0.0);
  CHECK(res.lambda2 == 1.0);
}

TEST_CASE("empty inputs are rejected") {
  std::vector<BudgetTrace> none;
  LttConfig cfg;
  cfg.grid = LttConfig::default_grid();
  CHECK_THROWS_AS(ltt_select(none, cfg), ValidationError);
  std::vector<BudgetTrace> cal{make_trace({0.5}, {0}, 0)};
  cfg.grid.clear();
  CHECK_THROWS_AS(ltt_select(cal, cfg), ValidationError);
}

TEST_CASE("ltt holds the risk level on resampled splits with oracle confidences") {
  rng::Stream s(63);
  std::vector<BudgetTrace> pool = synth_pool(2000, s, 0.0, 0.25);
  LttConfig cfg;
  cfg.alpha = 0.3;
  cfg.delta = 0.1;
  cfg.grid = LttConfig::default_grid();

  const int n_splits = 200, n_cal = 500;
  int violations = 0;
  std::vector<int> index(pool.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = static_cast<int>(i);
  rng::Stream split_rng(rng::derive_seed(63, "ltt-splits"));
  for (int rep = 0; rep < n_splits; ++rep) {
    for (int k = static_cast<int>(index.size()) - 1; k > 0; --k)
      std::swap(index[k], index[split_rng.uniform_int(k + 1)]);
    std::vector<BudgetTrace> cal, test;
    for (int k = 0; k < n_cal; ++k) cal.push_back(pool[index[k]]);
    for (std::size_t k = n_cal; k < index.size(); ++k) test.push_back(pool[index[k]]);
    LttResult res = ltt_select(cal, cfg);
    if (test_risk(test, {res.lambda1, res.lambda2, cfg.patience}) > cfg.alpha) ++violations;
  }
  CHECK(static_cast<double>(violations) / n_splits <= 0.10);
}

TEST_CASE("vote aggregation hand cases") {
  rng::Stream rng(64);
  std::vector<ScoredAnswer> answers{{0, 0.1, 24}, {0, 0.2, 24}, {1, 0.9, 24}};
  VoteResult v = aggregate_votes(answers, rng, 0);
  CHECK(v.majority == 0);
  CHECK(v.confidence_weighted == 1);  // 0.9 > 0.3
  CHECK(v.pass1.has_value());
  CHECK(*v.pass1 == doctest::Approx(2.0 / 3.0));

  std::vector<ScoredAnswer> same{{4, 0.5, 8}, {4, 0.8, 8}};
  v = aggregate_votes(same, rng);
  CHECK(v.majority == 4);
  CHECK(v.confidence_weighted == 4);
  CHECK_FALSE(v.pass1.has_value());
}

TEST_CASE("confidence ties break to the earliest answer, majority ties uniformly") {
  std::vector<ScoredAnswer> tied{{7, 0.5, 8}, {3, 0.5, 8}};
  rng::Stream rng(65);
  bool saw_a = false, saw_b = false;
  for (int i = 0; i < 200; ++i) {
    VoteResult v = aggregate_votes(tied, rng);
    CHECK(v.confidence_weighted == 7);  // first occurrence
    if (v.majority == 7) saw_a = true;
    if (v.majority == 3) saw_b = true;
  }
  CHECK(saw_a);
  CHECK(saw_b);
}

TEST_CASE("confidence vote is invariant to uniform positive rescaling") {
  rng::Stream s(66);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<ScoredAnswer> answers;
    for (int i = 0; i < 9; ++i)
      answers.push_back({static_cast<int>(s.uniform_int(4)), s.uniform(0.01, 1.0), 24});
    rng::Stream r1(1), r2(1);
    const int before = aggregate_votes(answers, r1).confidence_weighted;
    const double c = s.uniform(0.1, 10.0);
    for (auto& a : answers) a.confidence *= c;
    CHECK(aggregate_votes(answers, r2).confidence_weighted == before);
  }
}

TEST_CASE("duplicating the majority answer never changes it") {
  rng::Stream s(67);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<ScoredAnswer> answers;
    for (int i = 0; i < 7; ++i)
      answers.push_back({static_cast<int>(s.uniform_int(3)), s.uniform(), 24});
    rng::Stream r1(2), r2(2);
    VoteResult v = aggregate_votes(answers, r1);
    answers.push_back({v.majority, 0.5, 24});
    CHECK(aggregate_votes(answers, r2).majority == v.majority);
  }
}

TEST_CASE("empty vote lists are rejected") {
  rng::Stream rng(68);
  std::vector<ScoredAnswer> none;
  CHECK_THROWS_AS(aggregate_votes(none, rng), ValidationError);
}
