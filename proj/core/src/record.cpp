#include "rlcm/record.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rlcm/errors.hpp"

namespace rlcm {
namespace {

using nlohmann::json;

const json& require_field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ValidationError(name, "missing field");
  return *it;
}

template <typename T>
T field_as(const json& obj, const char* name) {
  const json& v = require_field(obj, name);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(name, "wrong type");
  }
}

bool is_near_multiple(double value, double unit) {
  double q = value / unit;
  return std::abs(q - std::round(q)) < 1e-9;
}

}  // namespace

void validate_record(const TrajectoryRecord& r) {
  for (std::size_t i = 0; i < r.budgets.size(); ++i) {
    if (r.budgets[i] < 1 || r.budgets[i] > static_cast<int>(r.actions.size()))
      throw ValidationError("budgets", "budget out of [1, length(actions)]");
    if (i > 0 && r.budgets[i] <= r.budgets[i - 1])
      throw ValidationError("budgets", "not strictly increasing");
  }
  if (r.budget_samples.size() != r.budgets.size())
    throw ValidationError("budget_samples", "length mismatch with budgets");
  for (std::size_t i = 0; i < r.budget_samples.size(); ++i) {
    const BudgetProbeSample& s = r.budget_samples[i];
    if (s.budget != r.budgets[i])
      throw ValidationError("budget_samples", "budget misaligned with budgets");
    if (s.features.size() != r.budget_samples.front().features.size())
      throw ValidationError("features", "inconsistent feature dimension");
    if (s.k_samples < 1) throw ValidationError("k_samples", "must be >= 1");
    if (!(s.mc_target >= 0.0 && s.mc_target <= 1.0))
      throw ValidationError("mc_target", "out of [0,1]");
    if (!is_near_multiple(s.mc_target, 1.0 / s.k_samples))
      throw ValidationError("mc_target", "not a multiple of 1/k_samples");
    if (!(s.probe_conf > 0.0 && s.probe_conf < 1.0))
      throw ValidationError("probe_conf", "out of (0,1)");
  }
  if (r.step_logprobs.size() != r.actions.size())
    throw ValidationError("step_logprobs", "length mismatch with actions");
  for (double lp : r.step_logprobs)
    if (!(lp <= 0.0) || std::isnan(lp))
      throw ValidationError("step_logprobs", "log-probability must be <= 0");
  if (r.correct != (r.final_answer == r.gold_answer))
    throw ValidationError("correct", "inconsistent with final_answer == gold_answer");
  if (r.r_ans != (r.correct ? 1.0 : -1.0))
    throw ValidationError("r_ans", "must be +1 iff correct else -1");
  if (!(r.r_margin >= -1.0 && r.r_margin <= 1.0))
    throw ValidationError("r_margin", "out of [-1,1]");
}

void validate_record(const TrajectoryRecord& r, double lambda) {
  validate_record(r);
  if (std::abs(r.r_total - (r.r_ans + lambda * r.r_margin)) > 1e-12)
    throw ValidationError("r_total", "!= r_ans + lambda * r_margin");
}

TrajectoryRecord parse_record(const std::string& line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
  if (!obj.is_object()) throw ValidationError("record", "line is not a JSON object");
  if (field_as<int>(obj, "schema_version") != kSchemaVersion)
    throw ValidationError("schema_version", "unsupported version");

  TrajectoryRecord r;
  r.task_id = field_as<std::string>(obj, "task_id");
  r.seed = field_as<std::uint64_t>(obj, "seed");
  r.actions = field_as<std::vector<int>>(obj, "actions");
  r.step_logprobs = field_as<std::vector<double>>(obj, "step_logprobs");
  r.budgets = field_as<std::vector<int>>(obj, "budgets");
  const json& samples = require_field(obj, "budget_samples");
  if (!samples.is_array()) throw ValidationError("budget_samples", "wrong type");
  for (const json& s : samples) {
    BudgetProbeSample b;
    b.budget = field_as<int>(s, "budget");
    b.features = field_as<std::vector<double>>(s, "features");
    b.mc_target = field_as<double>(s, "mc_target");
    b.probe_conf = field_as<double>(s, "probe_conf");
    b.k_samples = field_as<int>(s, "k_samples");
    b.readout = field_as<int>(s, "readout");
    r.budget_samples.push_back(std::move(b));
  }
  r.final_answer = field_as<int>(obj, "final_answer");
  r.gold_answer = field_as<int>(obj, "gold_answer");
  r.correct = field_as<bool>(obj, "correct");
  r.r_ans = field_as<double>(obj, "r_ans");
  r.r_margin = field_as<double>(obj, "r_margin");
  r.r_total = field_as<double>(obj, "r_total");
  if (obj.contains("env_version"))
    r.env_version = field_as<std::string>(obj, "env_version");

  validate_record(r);
  return r;
}

std::string serialize_record(const TrajectoryRecord& r) {
  json samples = json::array();
  for (const BudgetProbeSample& s : r.budget_samples) {
    samples.push_back({{"budget", s.budget},
                       {"features", s.features},
                       {"mc_target", s.mc_target},
                       {"probe_conf", s.probe_conf},
                       {"k_samples", s.k_samples},
                       {"readout", s.readout}});
  }
  json obj{{"schema_version", kSchemaVersion},
           {"task_id", r.task_id},
           {"seed", r.seed},
           {"actions", r.actions},
           {"step_logprobs", r.step_logprobs},
           {"budgets", r.budgets},
           {"budget_samples", std::move(samples)},
           {"final_answer", r.final_answer},
           {"gold_answer", r.gold_answer},
           {"correct", r.correct},
           {"r_ans", r.r_ans},
           {"r_margin", r.r_margin},
           {"r_total", r.r_total},
           {"env_version", r.env_version}};
  return obj.dump();
}

std::vector<TrajectoryRecord> read_rollout_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open rollout log: " + path);
  std::vector<TrajectoryRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(parse_record(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what(),
                       e.byte_offset());
    } catch (const ValidationError& e) {
      throw ValidationError(e.field(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

void write_rollout_log(const std::string& path,
                       const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  for (const TrajectoryRecord& r : records) out << serialize_record(r) << '\n';
}

}  // namespace rlcm
