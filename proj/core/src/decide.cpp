#include "rlcm/decide.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rlcm/errors.hpp"

namespace rlcm::decide {

ScoredAnswer run_exit_policy(std::span<const double> confs,
                             std::span<const int> answers,
                             std::span<const int> budgets,
                             const ExitPolicyConfig& cfg) {
  if (confs.empty()) throw ValidationError("confs", "empty confidence sequence");
  if (confs.size() != answers.size() || confs.size() != budgets.size())
    throw ValidationError("answers", "sequences not aligned");
  if (cfg.lambda1 > cfg.lambda2)
    throw ValidationError("lambda1", "must be <= lambda2");
  if (cfg.patience < 1) throw ValidationError("patience", "must be >= 1");

  int low_streak = 0;
  for (std::size_t i = 0; i < confs.size(); ++i) {
    if (confs[i] >= cfg.lambda2)
      return {answers[i], confs[i], budgets[i]};  // exit-high
    if (confs[i] < cfg.lambda1) {
      if (++low_streak >= cfg.patience)
        return {kAbstainLabel, confs[i], budgets[i]};  // abandon
    } else {
      low_streak = 0;
    }
  }
  return {answers.back(), confs.back(), budgets.back()};
}

ScoredAnswer run_exit_policy(const BudgetTrace& trace, const ExitPolicyConfig& cfg) {
  return run_exit_policy(trace.confs, trace.answers, trace.budgets, cfg);
}

double binomial_pvalue(int n, int errors, double alpha) {
  if (n < 1 || errors < 0 || errors > n)
    throw ValidationError("errors", "need 0 <= errors <= n, n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("alpha", "must be in (0,1)");
  if (errors == n) return 1.0;
  // P(Bin(n, alpha) <= errors), summed via log terms
  const double lg_n = std::lgamma(n + 1.0);
  const double log_a = std::log(alpha);
  const double log_b = std::log1p(-alpha);
  double p = 0.0;
  for (int k = 0; k <= errors; ++k) {
    const double log_term = lg_n - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                            k * log_a + (n - k) * log_b;
    p += std::exp(log_term);
  }
  return std::min(1.0, p);
}

double hoeffding_pvalue(int n, int errors, double alpha) {
  if (n < 1 || errors < 0 || errors > n)
    throw ValidationError("errors", "need 0 <= errors <= n, n >= 1");
  const double gap = alpha - static_cast<double>(errors) / n;
  if (gap <= 0.0) return 1.0;
  return std::exp(-2.0 * n * gap * gap);
}

std::vector<std::pair<double, double>> LttConfig::default_grid() {
  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j)
      grid.emplace_back(0.05 * i, 0.5 + 0.05 * j);
  return grid;
}

LttResult ltt_select(std::span<const BudgetTrace> calibration, const LttConfig& cfg) {
  if (calibration.empty()) throw ValidationError("calibration", "empty calibration set");
  if (cfg.grid.empty()) throw ValidationError("grid", "empty threshold grid");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ValidationError("alpha", "must be in (0,1)");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ValidationError("delta", "must be in (0,1)");

  const int n = static_cast<int>(calibration.size());
  std::vector<LttAuditRow> rows;
  rows.reserve(cfg.grid.size());
  for (const auto& [l1, l2] : cfg.grid) {
    ExitPolicyConfig exit_cfg{l1, l2, cfg.patience};
    int errors = 0;
    double tokens = 0.0;
    for (const BudgetTrace& trace : calibration) {
      const ScoredAnswer ans = run_exit_policy(trace, exit_cfg);
      // abandoned problems count as errors
      if (ans.answer == kAbstainLabel || ans.answer != trace.gold) ++errors;
      tokens += ans.tokens_used;
    }
    LttAuditRow row;
    row.lambda1 = l1;
    row.lambda2 = l2;
    row.risk = static_cast<double>(errors) / n;
    row.pvalue = cfg.bound == PvalueBound::exact
                     ? binomial_pvalue(n, errors, cfg.alpha)
                     : hoeffding_pvalue(n, errors, cfg.alpha);
    row.mean_tokens = tokens / n;
    rows.push_back(row);
  }

  // Fixed testing sequence, committed before any p-value is examined:
  // most conservative (most tokens) first, walking toward aggressive, so
  // the last accepted point is the most compute-saving validated one.
  std::stable_sort(rows.begin(), rows.end(), [](const LttAuditRow& a, const LttAuditRow& b) {
    if (a.mean_tokens != b.mean_tokens) return a.mean_tokens > b.mean_tokens;
    if (a.lambda2 != b.lambda2) return a.lambda2 > b.lambda2;
    return a.lambda1 < b.lambda1;
  });

  LttResult result;
  int best = -1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].tested = true;
    if (rows[i].pvalue <= cfg.delta) {
      rows[i].accepted = true;
      best = static_cast<int>(i);  // last accepted: max savings among accepted
    } else {
      break;  // first rejection stops the sequence
    }
  }
  if (best >= 0) {
    result.lambda1 = rows[best].lambda1;
    result.lambda2 = rows[best].lambda2;
  } else {
    result.lambda1 = 0.0;  // degenerate safe pair: thresholds disabled
    result.lambda2 = 1.0;
    result.fallback = true;
  }
  result.audit = std::move(rows);
  return result;
}

VoteResult aggregate_votes(std::span<const ScoredAnswer> answers, rng::Stream& rng,
                           std::optional<int> gold) {
  if (answers.empty()) throw ValidationError("answers", "empty answer list");

  std::map<int, int> counts;
  std::map<int, double> conf_sums;
  std::map<int, std::size_t> first_seen;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const ScoredAnswer& a = answers[i];
    ++counts[a.answer];
    conf_sums[a.answer] += a.confidence;
    first_seen.emplace(a.answer, i);
  }

  int max_count = 0;
  for (const auto& [ans, c] : counts) max_count = std::max(max_count, c);
  std::vector<int> tied;
  for (const auto& [ans, c] : counts)
    if (c == max_count) tied.push_back(ans);
  std::sort(tied.begin(), tied.end());
  VoteResult out;
  out.majority = tied[rng.uniform_int(tied.size())];  // uniform tie-break

  double best_sum = -1.0;
  std::size_t best_first = answers.size();
  for (const auto& [ans, sum] : conf_sums) {
    const std::size_t first = first_seen[ans];
    if (sum > best_sum || (sum == best_sum && first < best_first)) {
      best_sum = sum;
      best_first = first;
      out.confidence_weighted = ans;
    }
  }

  if (gold) {
    int correct = 0;
    for (const ScoredAnswer& a : answers)
      if (a.answer == *gold) ++correct;
    out.pass1 = static_cast<double>(correct) / static_cast<double>(answers.size());
  }
  return out;
}

}  // namespace rlcm::decide
