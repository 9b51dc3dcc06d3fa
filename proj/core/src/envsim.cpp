#include "rlcm/envsim.hpp"

#include <algorithm>
#include <cmath>

#include "rlcm/errors.hpp"

namespace rlcm::envsim {
namespace {

// Seed of the fixed feature projection; shared by every environment so
// logs from different runs are comparable.
constexpr std::uint64_t kProjectionStream = 0x70726f6a31ULL;  // "proj1"

}  // namespace

EnvConfig EnvConfig::from_run_config(const RunConfig& cfg) {
  EnvConfig e;
  e.num_actions = cfg.num_actions;
  e.num_answers = cfg.num_answers;
  e.horizon = cfg.horizon;
  e.delta_plus = cfg.delta_plus;
  e.delta_minus = cfg.delta_minus;
  e.derail_q = cfg.derail_q;
  e.g_max = cfg.g_max;
  e.d_min = cfg.d_min;
  e.d_max = cfg.d_max;
  e.feature_dim = cfg.feature_dim;
  e.feature_noise = cfg.feature_noise;
  return e;
}

Environment::Environment(const EnvConfig& cfg) : cfg_(cfg) {
  if (cfg_.num_answers < 2) throw ConfigError("num-answers: must be >= 2");
  if (cfg_.num_actions < 2) throw ConfigError("num-actions: must be >= 2");
  const int raw = raw_feature_dim();
  rng::Stream s(rng::derive_seed(kProjectionStream, kEnvVersion));
  projection_.resize(static_cast<std::size_t>(cfg_.feature_dim) * raw);
  const double scale = 1.0 / std::sqrt(static_cast<double>(raw));
  for (double& p : projection_) p = scale * s.normal();
}

TaskSpec Environment::sample_task(std::uint64_t seed) const {
  rng::Stream s(rng::derive_seed(seed, "task"));
  TaskSpec task;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "t-%016llx", static_cast<unsigned long long>(seed));
  task.task_id = buf;
  task.gold_answer = static_cast<int>(s.uniform_int(cfg_.num_answers));
  task.difficulty = s.uniform(cfg_.d_min, cfg_.d_max);
  task.rng_seed = seed;
  return task;
}

int Environment::good_action(const TaskSpec& task, int t) const {
  return static_cast<int>(
      rng::splitmix64(task.rng_seed ^ rng::splitmix64(0x900da571ULL + static_cast<std::uint64_t>(t))) %
      static_cast<std::uint64_t>(cfg_.num_actions));
}

std::vector<double> Environment::compute_features(const TaskSpec& task, int t,
                                                  double progress, bool on_track,
                                                  rng::Stream& noise) const {
  const int raw_dim = raw_feature_dim();
  std::vector<double> raw(raw_dim, 0.0);
  raw[0] = progress;
  raw[1] = (on_track ? 1.0 : 0.0) + cfg_.feature_noise * noise.normal();
  raw[2] = static_cast<double>(t) / cfg_.horizon;
  raw[3 + good_action(task, t)] = 1.0;
  raw[raw_dim - 1] = 1.0;

  std::vector<double> out(cfg_.feature_dim, 0.0);
  for (int i = 0; i < cfg_.feature_dim; ++i) {
    double acc = 0.0;
    const double* row = &projection_[static_cast<std::size_t>(i) * raw_dim];
    for (int j = 0; j < raw_dim; ++j) acc += row[j] * raw[j];
    out[i] = acc;
  }
  return out;
}

EnvState Environment::reset(const TaskSpec& task, rng::Stream& noise) const {
  EnvState s;
  s.t = 0;
  s.progress = 0.0;
  s.on_track = true;
  s.features = compute_features(task, 0, 0.0, true, noise);
  return s;
}

EnvState Environment::step(const EnvState& state, int action, const TaskSpec& task,
                           rng::Stream& noise) const {
  if (action < 0 || action >= cfg_.num_actions)
    throw ValidationError("action", "out of [0, num_actions)");
  const double u = noise.uniform();
  const double slip = task.difficulty * cfg_.derail_q;

  EnvState next;
  next.t = state.t + 1;
  if (action == good_action(task, state.t)) {
    next.progress = std::min(1.0, state.progress + cfg_.delta_plus);
    next.on_track = state.on_track ? true : (u < 1.0 - slip);
  } else {
    next.progress = std::max(0.0, state.progress - cfg_.delta_minus);
    next.on_track = state.on_track ? (u >= slip) : false;
  }
  next.features = compute_features(task, next.t, next.progress, next.on_track, noise);
  return next;
}

double Environment::gold_readout_prob(const EnvState& state, const TaskSpec&) const {
  const double g_min = cfg_.g_min();
  return state.on_track ? g_min + (cfg_.g_max - g_min) * state.progress : g_min;
}

int Environment::forced_readout(const EnvState& state, const TaskSpec& task,
                                rng::Stream& rng) const {
  const double g = gold_readout_prob(state, task);
  const double u = rng.uniform();
  if (u < g) return task.gold_answer;
  // remaining mass uniform over the other labels
  const int others = cfg_.num_answers - 1;
  int idx = std::min(others - 1, static_cast<int>((u - g) / (1.0 - g) * others));
  return idx < task.gold_answer ? idx : idx + 1;
}

double Environment::mc_target(const EnvState& state, const TaskSpec& task, int k,
                              rng::Stream& rng) const {
  if (k < 1) throw ValidationError("k_samples", "must be >= 1");
  int hits = 0;
  for (int i = 0; i < k; ++i)
    if (forced_readout(state, task, rng) == task.gold_answer) ++hits;
  return static_cast<double>(hits) / k;
}

std::vector<int> Environment::budget_set(int length, int stride, bool include_final) {
  if (stride < 1) throw ConfigError("budget-stride: must be >= 1");
  std::vector<int> budgets;
  for (int b = stride; b <= length; b += stride) budgets.push_back(b);
  if (include_final && length >= 1 && (budgets.empty() || budgets.back() != length))
    budgets.push_back(length);
  return budgets;
}

}  // namespace rlcm::envsim
