#include "rlcm/config.hpp"

#include <charconv>
#include <fstream>

#include "rlcm/errors.hpp"

namespace rlcm {
namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, end) : "nan";
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError(key + ": expected unsigned integer, got '" + s + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError(key + ": expected integer, got '" + s + "'");
  return v;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected number, got '" + s + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": expected boolean, got '" + s + "'");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

RewardVariant reward_variant_from_string(const std::string& name) {
  if (name == "rlcm_margin") return RewardVariant::rlcm_margin;
  if (name == "final_brier") return RewardVariant::final_brier;
  if (name == "final_margin") return RewardVariant::final_margin;
  if (name == "process_brier") return RewardVariant::process_brier;
  if (name == "none") return RewardVariant::none;
  throw ConfigError("reward-variant: unknown variant '" + name + "'");
}

std::string to_string(RewardVariant v) {
  switch (v) {
    case RewardVariant::rlcm_margin: return "rlcm_margin";
    case RewardVariant::final_brier: return "final_brier";
    case RewardVariant::final_margin: return "final_margin";
    case RewardVariant::process_brier: return "process_brier";
    case RewardVariant::none: return "none";
  }
  throw ConfigError("reward-variant: invalid enum value");
}

void RunConfig::validate() const {
  if (group_size < 2) throw ConfigError("group-size: group size must be >= 2");
  if (batch_size < 1) throw ConfigError("batch-size: must be >= 1");
  if (lambda < 0.0) throw ConfigError("lambda: must be >= 0");
  reward_variant_from_string(reward_variant);
  if (clip_eps <= 0.0 || clip_eps >= 1.0) throw ConfigError("clip-eps: must be in (0,1)");
  if (inner_epochs < 1) throw ConfigError("inner-epochs: must be >= 1");
  if (iterations < 1) throw ConfigError("iterations: must be >= 1");
  if (lr_policy <= 0.0) throw ConfigError("lr-policy: must be > 0");
  if (temperature_train <= 0.0) throw ConfigError("temperature-train: must be > 0");
  if (temperature_eval <= 0.0) throw ConfigError("temperature-eval: must be > 0");
  if (checkpoint_every < 1) throw ConfigError("checkpoint-every: must be >= 1");
  if (probe_hidden < 1) throw ConfigError("probe-hidden: must be >= 1");
  if (lr_probe <= 0.0) throw ConfigError("lr-probe: must be > 0");
  if (probe_momentum < 0.0 || probe_momentum >= 1.0)
    throw ConfigError("probe-momentum: must be in [0,1)");
  if (k_samples < 1) throw ConfigError("k-samples: must be >= 1");
  if (budget_stride < 1) throw ConfigError("budget-stride: must be >= 1");
  if (num_actions < 2) throw ConfigError("num-actions: must be >= 2");
  if (num_answers < 2) throw ConfigError("num-answers: must be >= 2");
  if (horizon < 1) throw ConfigError("horizon: must be >= 1");
  if (delta_plus < 0.0) throw ConfigError("delta-plus: must be >= 0");
  if (delta_minus < 0.0) throw ConfigError("delta-minus: must be >= 0");
  if (derail_q < 0.0 || derail_q > 1.0) throw ConfigError("derail-q: must be in [0,1]");
  if (g_max <= 0.0 || g_max > 1.0) throw ConfigError("g-max: must be in (0,1]");
  if (d_min < 0.0 || d_max > 1.0 || d_min > d_max)
    throw ConfigError("d-min/d-max: need 0 <= d-min <= d-max <= 1");
  if (feature_dim < 1) throw ConfigError("feature-dim: must be >= 1");
  if (feature_noise < 0.0) throw ConfigError("feature-noise: must be >= 0");
  if (eval_tasks < 1) throw ConfigError("eval-tasks: must be >= 1");
  if (rollouts < 1) throw ConfigError("rollouts: must be >= 1");
  if (bins < 1) throw ConfigError("bins: must be >= 1");
  if (ltt_delta <= 0.0 || ltt_delta >= 1.0) throw ConfigError("ltt-delta: must be in (0,1)");
  if (patience < 1) throw ConfigError("patience: must be >= 1");
  if (ltt_split <= 0.0 || ltt_split >= 1.0) throw ConfigError("ltt-split: must be in (0,1)");
  if (ltt_bound != "exact" && ltt_bound != "hoeffding")
    throw ConfigError("ltt-bound: must be 'exact' or 'hoeffding'");
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(seed);
  kv["group-size"] = std::to_string(group_size);
  kv["batch-size"] = std::to_string(batch_size);
  kv["lambda"] = fmt_double(lambda);
  kv["reward-variant"] = reward_variant;
  kv["clip-eps"] = fmt_double(clip_eps);
  kv["inner-epochs"] = std::to_string(inner_epochs);
  kv["iterations"] = std::to_string(iterations);
  kv["lr-policy"] = fmt_double(lr_policy);
  kv["temperature-train"] = fmt_double(temperature_train);
  kv["temperature-eval"] = fmt_double(temperature_eval);
  kv["checkpoint-every"] = std::to_string(checkpoint_every);
  kv["probe-hidden"] = std::to_string(probe_hidden);
  kv["lr-probe"] = fmt_double(lr_probe);
  kv["probe-momentum"] = fmt_double(probe_momentum);
  kv["k-samples"] = std::to_string(k_samples);
  kv["budget-stride"] = std::to_string(budget_stride);
  kv["include-final-budget"] = include_final_budget ? "true" : "false";
  kv["num-actions"] = std::to_string(num_actions);
  kv["num-answers"] = std::to_string(num_answers);
  kv["horizon"] = std::to_string(horizon);
  kv["delta-plus"] = fmt_double(delta_plus);
  kv["delta-minus"] = fmt_double(delta_minus);
  kv["derail-q"] = fmt_double(derail_q);
  kv["g-max"] = fmt_double(g_max);
  kv["d-min"] = fmt_double(d_min);
  kv["d-max"] = fmt_double(d_max);
  kv["feature-dim"] = std::to_string(feature_dim);
  kv["feature-noise"] = fmt_double(feature_noise);
  kv["eval-tasks"] = std::to_string(eval_tasks);
  kv["rollouts"] = std::to_string(rollouts);
  kv["bins"] = std::to_string(bins);
  kv["ltt-delta"] = fmt_double(ltt_delta);
  kv["patience"] = std::to_string(patience);
  kv["ltt-split"] = fmt_double(ltt_split);
  kv["ltt-bound"] = ltt_bound;
  return kv;
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
  RunConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "group-size") cfg.group_size = parse_int(key, value);
    else if (key == "batch-size") cfg.batch_size = parse_int(key, value);
    else if (key == "lambda") cfg.lambda = parse_double(key, value);
    else if (key == "reward-variant") cfg.reward_variant = value;
    else if (key == "clip-eps") cfg.clip_eps = parse_double(key, value);
    else if (key == "inner-epochs") cfg.inner_epochs = parse_int(key, value);
    else if (key == "iterations") cfg.iterations = parse_int(key, value);
    else if (key == "lr-policy") cfg.lr_policy = parse_double(key, value);
    else if (key == "temperature-train") cfg.temperature_train = parse_double(key, value);
    else if (key == "temperature-eval") cfg.temperature_eval = parse_double(key, value);
    else if (key == "checkpoint-every") cfg.checkpoint_every = parse_int(key, value);
    else if (key == "probe-hidden") cfg.probe_hidden = parse_int(key, value);
    else if (key == "lr-probe") cfg.lr_probe = parse_double(key, value);
    else if (key == "probe-momentum") cfg.probe_momentum = parse_double(key, value);
    else if (key == "k-samples") cfg.k_samples = parse_int(key, value);
    else if (key == "budget-stride") cfg.budget_stride = parse_int(key, value);
    else if (key == "include-final-budget") cfg.include_final_budget = parse_bool(key, value);
    else if (key == "num-actions") cfg.num_actions = parse_int(key, value);
    else if (key == "num-answers") cfg.num_answers = parse_int(key, value);
    else if (key == "horizon") cfg.horizon = parse_int(key, value);
    else if (key == "delta-plus") cfg.delta_plus = parse_double(key, value);
    else if (key == "delta-minus") cfg.delta_minus = parse_double(key, value);
    else if (key == "derail-q") cfg.derail_q = parse_double(key, value);
    else if (key == "g-max") cfg.g_max = parse_double(key, value);
    else if (key == "d-min") cfg.d_min = parse_double(key, value);
    else if (key == "d-max") cfg.d_max = parse_double(key, value);
    else if (key == "feature-dim") cfg.feature_dim = parse_int(key, value);
    else if (key == "feature-noise") cfg.feature_noise = parse_double(key, value);
    else if (key == "eval-tasks") cfg.eval_tasks = parse_int(key, value);
    else if (key == "rollouts") cfg.rollouts = parse_int(key, value);
    else if (key == "bins") cfg.bins = parse_int(key, value);
    else if (key == "ltt-delta") cfg.ltt_delta = parse_double(key, value);
    else if (key == "patience") cfg.patience = parse_int(key, value);
    else if (key == "ltt-split") cfg.ltt_split = parse_double(key, value);
    else if (key == "ltt-bound") cfg.ltt_bound = value;
    else throw ConfigError(key + ": unknown config key");
  }
  return cfg;
}

RunConfig validate_run_config(const std::map<std::string, std::string>& kv) {
  RunConfig cfg = RunConfig::from_map(kv);
  cfg.validate();
  return cfg;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

}  // namespace rlcm
