#include "rlcm/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "rlcm/errors.hpp"

namespace rlcm::policy {
namespace {

void check_dims(const PolicyParams& params, std::span<const double> features) {
  if (static_cast<int>(features.size()) != params.feature_dim)
    throw ValidationError("features", "dimension mismatch with policy");
  if (params.temperature <= 0.0)
    throw ValidationError("temperature", "must be > 0");
}

}  // namespace

std::vector<double> action_logprobs(const PolicyParams& params,
                                    std::span<const double> features) {
  check_dims(params, features);
  const int V = params.num_actions;
  std::vector<double> logits(V, 0.0);
  for (int a = 0; a < V; ++a) {
    double acc = 0.0;
    for (int j = 0; j < params.feature_dim; ++j) acc += params.w(a, j) * features[j];
    logits[a] = acc / params.temperature;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double logz = mx + std::log(z);
  for (double& l : logits) l -= logz;
  return logits;
}

std::vector<double> grad_logprob(const PolicyParams& params,
                                 std::span<const double> features, int action) {
  check_dims(params, features);
  if (action < 0 || action >= params.num_actions)
    throw ValidationError("action", "out of range");
  std::vector<double> lp = action_logprobs(params, features);
  std::vector<double> grad(params.weights.size(), 0.0);
  const double inv_tau = 1.0 / params.temperature;
  for (int a = 0; a < params.num_actions; ++a) {
    const double coef = ((a == action ? 1.0 : 0.0) - std::exp(lp[a])) * inv_tau;
    for (int j = 0; j < params.feature_dim; ++j)
      grad[static_cast<std::size_t>(a) * params.feature_dim + j] = coef * features[j];
  }
  return grad;
}

double sequence_confidence(const TrajectoryRecord& record) {
  return sequence_confidence_prefix(record, static_cast<int>(record.step_logprobs.size()));
}

double sequence_confidence_prefix(const TrajectoryRecord& record, int steps) {
  if (steps < 1 || steps > static_cast<int>(record.step_logprobs.size()))
    throw ValidationError("step_logprobs", "empty trajectory or bad prefix length");
  double sum = std::accumulate(record.step_logprobs.begin(),
                               record.step_logprobs.begin() + steps, 0.0);
  return std::exp(sum / steps);
}

PolicyRollout sample_trajectory(const PolicyParams& params,
                                const envsim::Environment& env,
                                const envsim::TaskSpec& task, int max_steps,
                                int budget_stride, bool include_final_budget,
                                int k_samples, std::uint64_t seed) {
  if (max_steps < 1) throw ValidationError("max_steps", "must be >= 1");
  rng::Stream noise = rng::substream(seed, "env-noise");
  rng::Stream action_rng = rng::substream(seed, "action");
  rng::Stream readout_rng = rng::substream(seed, "readout");

  const int steps = std::min(max_steps, env.config().horizon);
  const std::vector<int> budgets =
      envsim::Environment::budget_set(steps, budget_stride, include_final_budget);

  PolicyRollout out;
  TrajectoryRecord& rec = out.record;
  rec.task_id = task.task_id;
  rec.seed = seed;
  rec.gold_answer = task.gold_answer;
  rec.budgets = budgets;
  rec.env_version = envsim::kEnvVersion;

  envsim::EnvState state = env.reset(task, noise);
  std::vector<envsim::EnvState> snapshots;
  std::size_t next_budget = 0;
  std::vector<double> probs(params.num_actions);
  for (int t = 0; t < steps; ++t) {
    std::vector<double> lp = action_logprobs(params, state.features);
    for (int a = 0; a < params.num_actions; ++a) probs[a] = std::exp(lp[a]);
    const int action = static_cast<int>(action_rng.categorical(probs));
    out.step_features.push_back(state.features);
    rec.actions.push_back(action);
    rec.step_logprobs.push_back(lp[action]);
    state = env.step(state, action, task, noise);
    if (next_budget < budgets.size() && state.t == budgets[next_budget]) {
      snapshots.push_back(state);
      ++next_budget;
    }
  }

  rec.final_answer = env.forced_readout(state, task, readout_rng);
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    BudgetProbeSample s;
    s.budget = budgets[i];
    s.features = snapshots[i].features;
    s.k_samples = k_samples;
    s.mc_target = env.mc_target(snapshots[i], task, k_samples, readout_rng);
    s.probe_conf = 0.5;
    // exiting at the trajectory end is the final answer itself
    s.readout = (budgets[i] == steps) ? rec.final_answer
                                      : env.forced_readout(snapshots[i], task, readout_rng);
    rec.budget_samples.push_back(std::move(s));
  }

  rec.correct = (rec.final_answer == rec.gold_answer);
  rec.r_ans = rec.correct ? 1.0 : -1.0;
  rec.r_margin = 0.0;
  rec.r_total = rec.r_ans;
  return out;
}

void save_policy(const PolicyParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  char buf[64];
  out << "rlcm-policy 1 " << params.num_actions << ' ' << params.feature_dim << ' ';
  std::snprintf(buf, sizeof(buf), "%.17g", params.temperature);
  out << buf << '\n';
  for (double w : params.weights) {
    std::snprintf(buf, sizeof(buf), "%.17g", w);
    out << buf << '\n';
  }
}

PolicyParams load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0, actions = 0, dim = 0;
  double tau = 0.0;
  in >> magic >> version >> actions >> dim >> tau;
  if (!in || magic != "rlcm-policy" || version != 1)
    throw ParseError("bad policy checkpoint header: " + path);
  PolicyParams params(actions, dim, tau);
  for (double& w : params.weights)
    if (!(in >> w)) throw ParseError("truncated policy checkpoint: " + path);
  return params;
}

}  // namespace rlcm::policy
