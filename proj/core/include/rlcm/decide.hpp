#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rlcm/record.hpp"
#include "rlcm/rng.hpp"

namespace rlcm::decide {

// Dual-threshold exit rule: abandon after `patience` consecutive budgets
// below lambda1, answer early at the first budget at or above lambda2.
struct ExitPolicyConfig {
  double lambda1 = 0.0;
  double lambda2 = 1.0;
  int patience = 2;
};

// Per-budget view of one rollout as the exit policy sees it.
struct BudgetTrace {
  std::vector<int> budgets;      // step indices, ascending
  std::vector<double> confs;     // aligned confidence per budget
  std::vector<int> answers;      // aligned forced readout per budget
  int gold = 0;
};

// Scans budgets in order; emits the first budget with conf >= lambda2,
// abandons (kAbstainLabel) after `patience` consecutive confs < lambda1,
// and otherwise runs to the final budget. tokens_used is the step index
// at exit.
ScoredAnswer run_exit_policy(std::span<const double> confs,
                             std::span<const int> answers,
                             std::span<const int> budgets,
                             const ExitPolicyConfig& cfg);
ScoredAnswer run_exit_policy(const BudgetTrace& trace, const ExitPolicyConfig& cfg);

// Exact binomial tail P(Bin(n, alpha) <= errors): the p-value for the
// null hypothesis "true risk > alpha".
double binomial_pvalue(int n, int errors, double alpha);

// Hoeffding alternative: exp(-2 n max(0, alpha - errors/n)^2).
double hoeffding_pvalue(int n, int errors, double alpha);

enum class PvalueBound { exact, hoeffding };

struct LttConfig {
  double alpha = 0.1;  // target risk, in (0,1)
  double delta = 0.1;  // failure probability, in (0,1)
  std::vector<std::pair<double, double>> grid;  // (lambda1, lambda2) pairs
  int patience = 2;
  PvalueBound bound = PvalueBound::exact;

  // lambda1 in {0,0.05,..,0.5} x lambda2 in {0.5,0.55,..,1.0}
  static std::vector<std::pair<double, double>> default_grid();
};

struct LttAuditRow {
  double lambda1 = 0.0;
  double lambda2 = 1.0;
  double risk = 0.0;        // wrong-or-abandoned fraction on calibration
  double pvalue = 1.0;
  double mean_tokens = 0.0;
  bool tested = false;      // reached by the fixed-sequence pass
  bool accepted = false;
};

struct LttResult {
  double lambda1 = 0.0;
  double lambda2 = 1.0;
  bool fallback = false;  // no grid point accepted; degenerate safe pair
  std::vector<LttAuditRow> audit;  // in tested order
};

// Learn-Then-Test threshold selection. Grid points are ordered most
// conservative first (descending mean tokens on the calibration set),
// tested in that fixed sequence while p <= delta, stopping at the first
// rejection; the last accepted point, i.e. the most compute-saving
// validated one, is returned. Abandoned problems count as errors.
LttResult ltt_select(std::span<const BudgetTrace> calibration, const LttConfig& cfg);

struct VoteResult {
  int majority = kAbstainLabel;
  int confidence_weighted = kAbstainLabel;
  std::optional<double> pass1;  // mean correctness, when gold is supplied
};

// Majority vote (ties uniform at random via rng) and confidence-weighted
// vote (argmax of summed confidence, ties to the earliest-seen answer).
VoteResult aggregate_votes(std::span<const ScoredAnswer> answers, rng::Stream& rng,
                           std::optional<int> gold = std::nullopt);

}  // namespace rlcm::decide
