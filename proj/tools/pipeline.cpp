#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rlcm/calib.hpp"
#include "rlcm/decide.hpp"
#include "rlcm/errors.hpp"
#include "rlcm/grpo.hpp"
#include "rlcm/lexicon.hpp"
#include "rlcm/record.hpp"

namespace fs = std::filesystem;

namespace rlcm::pipeline {
namespace {

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  return out;
}

std::string log_path_of(const StageOptions& opt) {
  return opt.log_path.empty() ? (fs::path(opt.out_dir) / "rollouts.jsonl").string()
                              : opt.log_path;
}

double record_confidence(const TrajectoryRecord& rec, ConfSource source) {
  if (source == ConfSource::sequence) return policy::sequence_confidence(rec);
  if (rec.budget_samples.empty())
    throw ValidationError("budget_samples", "record has no budget samples");
  return rec.budget_samples.back().probe_conf;
}

decide::BudgetTrace budget_trace(const TrajectoryRecord& rec, ConfSource source) {
  decide::BudgetTrace t;
  t.gold = rec.gold_answer;
  for (const BudgetProbeSample& s : rec.budget_samples) {
    t.budgets.push_back(s.budget);
    t.answers.push_back(s.readout);
    t.confs.push_back(source == ConfSource::sequence
                          ? policy::sequence_confidence_prefix(rec, s.budget)
                          : s.probe_conf);
  }
  return t;
}

void write_run_config(const RunConfig& cfg, const fs::path& path) {
  std::ofstream out = open_out(path);
  for (const auto& [key, value] : cfg.to_map()) out << key << " = " << value << "\n";
}

}  // namespace

ConfSource conf_source_from_string(const std::string& name) {
  if (name == "probe") return ConfSource::probe_final;
  if (name == "sequence") return ConfSource::sequence;
  throw ConfigError("conf-source: expected 'probe' or 'sequence', got '" + name + "'");
}

void stage_train(const StageOptions& opt) {
  const RunConfig& cfg = opt.cfg;
  cfg.validate();
  const fs::path out_dir(opt.out_dir);
  write_run_config(cfg, out_dir / "run_config.ini");

  grpo::Trainer trainer(cfg, cfg.seed);
  std::ofstream stats = open_out(out_dir / "train_stats.csv");
  stats << "iteration,accuracy,mean_reward,probe_loss,mean_margin,ece_online\n";
  for (int i = 0; i < cfg.iterations; ++i) {
    const grpo::IterationStats st = trainer.train_iteration();
    stats << st.iteration << ',' << fmt(st.accuracy) << ',' << fmt(st.mean_reward)
          << ',' << fmt(st.probe_loss) << ',' << fmt(st.mean_margin) << ','
          << fmt(st.ece_online) << '\n';
    if ((i + 1) % cfg.checkpoint_every == 0 && i + 1 < cfg.iterations) {
      char tag[32];
      std::snprintf(tag, sizeof(tag), "%06d", i + 1);
      fs::create_directories(out_dir / "checkpoints");
      policy::save_policy(trainer.policy_params(),
                          (out_dir / "checkpoints" / ("policy-" + std::string(tag) + ".txt")).string());
      probe::save_probe(trainer.probe_params(),
                        (out_dir / "checkpoints" / ("probe-" + std::string(tag) + ".txt")).string());
    }
  }
  policy::save_policy(trainer.policy_params(), (out_dir / "policy.txt").string());
  probe::save_probe(trainer.probe_params(), (out_dir / "probe.txt").string());
}

void stage_rollout_eval(const StageOptions& opt) {
  const RunConfig& cfg = opt.cfg;
  cfg.validate();
  const fs::path out_dir(opt.out_dir);
  policy::PolicyParams pol = policy::load_policy((out_dir / "policy.txt").string());
  probe::ProbeParams prb = probe::load_probe((out_dir / "probe.txt").string());
  pol.temperature = cfg.temperature_eval;

  const envsim::Environment env{envsim::EnvConfig::from_run_config(cfg)};
  const rewards::RewardConfig reward_cfg{cfg.lambda,
                                         reward_variant_from_string(cfg.reward_variant)};
  std::ofstream out = open_out(log_path_of(opt));
  for (int ti = 0; ti < cfg.eval_tasks; ++ti) {
    const envsim::TaskSpec task =
        env.sample_task(rng::derive_seed(cfg.seed, "eval-task", ti));
    for (int k = 0; k < cfg.rollouts; ++k) {
      const std::uint64_t rollout_seed = rng::derive_seed(
          cfg.seed, "eval-rollout", static_cast<std::uint64_t>(ti) * cfg.rollouts + k);
      policy::PolicyRollout ro = policy::sample_trajectory(
          pol, env, task, cfg.horizon, cfg.budget_stride, cfg.include_final_budget,
          cfg.k_samples, rollout_seed);
      for (BudgetProbeSample& s : ro.record.budget_samples)
        s.probe_conf = probe::probe_forward(prb, s.features);
      rewards::combined_reward(ro.record, reward_cfg);
      validate_record(ro.record, cfg.lambda);
      out << serialize_record(ro.record) << '\n';
    }
  }
}

void stage_calibrate(const StageOptions& opt) {
  const fs::path out_dir(opt.out_dir);
  const std::vector<TrajectoryRecord> records = read_rollout_log(log_path_of(opt));
  if (records.empty()) throw ValidationError("rollouts", "empty rollout log");

  std::vector<calib::ConfidencePair> pairs;
  std::vector<double> confs;
  for (const TrajectoryRecord& rec : records) {
    const double c = record_confidence(rec, opt.conf_source);
    pairs.push_back({c, rec.correct});
    confs.push_back(c);
  }
  const calib::ReliabilityTable table = calib::reliability_bins(pairs, opt.cfg.bins);
  const calib::CalibrationErrors errors = calib::calibration_errors(table);
  const calib::ConfidenceSummary summary = calib::confidence_summary(confs);

  std::ofstream rel = open_out(out_dir / "reliability.csv");
  rel << "bin_lo,bin_hi,count,mean_conf,acc\n";
  for (const calib::ReliabilityBin& b : table.bins)
    rel << fmt(b.lo) << ',' << fmt(b.hi) << ',' << b.count << ',' << fmt(b.mean_conf)
        << ',' << fmt(b.accuracy) << '\n';

  nlohmann::json metrics{{"ece", errors.ece},
                         {"pce", errors.pce},
                         {"brier", calib::brier_score(pairs)},
                         {"n", table.total},
                         {"mean_conf", summary.mean},
                         {"median_conf", summary.median}};
  std::ofstream mj = open_out(out_dir / "metrics.json");
  mj << metrics.dump(2) << '\n';
}

void stage_ltt(const StageOptions& opt) {
  const RunConfig& cfg = opt.cfg;
  const fs::path out_dir(opt.out_dir);
  const std::vector<TrajectoryRecord> records = read_rollout_log(log_path_of(opt));
  if (records.size() < 2) throw ValidationError("rollouts", "need at least 2 records");

  std::vector<decide::BudgetTrace> traces;
  traces.reserve(records.size());
  for (const TrajectoryRecord& rec : records) traces.push_back(budget_trace(rec, opt.conf_source));

  // seeded calibration/test split
  std::vector<std::size_t> index(traces.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  rng::Stream split_rng = rng::substream(cfg.seed, "ltt-splits");
  for (std::size_t k = index.size() - 1; k > 0; --k)
    std::swap(index[k], index[split_rng.uniform_int(k + 1)]);
  const std::size_t n_cal = std::max<std::size_t>(
      1, std::min(index.size() - 1,
                  static_cast<std::size_t>(cfg.ltt_split * static_cast<double>(index.size()))));
  std::vector<decide::BudgetTrace> cal, test;
  for (std::size_t i = 0; i < index.size(); ++i)
    (i < n_cal ? cal : test).push_back(traces[index[i]]);

  std::ofstream summary = open_out(out_dir / "ltt_summary.csv");
  summary << "alpha,target_accuracy,lambda1,lambda2,fallback,cal_risk,test_risk,"
             "test_accuracy,test_mean_tokens\n";
  for (double alpha : opt.alphas) {
    decide::LttConfig ltt_cfg;
    ltt_cfg.alpha = alpha;
    ltt_cfg.delta = cfg.ltt_delta;
    ltt_cfg.grid = decide::LttConfig::default_grid();
    ltt_cfg.patience = cfg.patience;
    ltt_cfg.bound = cfg.ltt_bound == "hoeffding" ? decide::PvalueBound::hoeffding
                                                 : decide::PvalueBound::exact;
    const decide::LttResult res = decide::ltt_select(cal, ltt_cfg);

    char tag[32];
    std::snprintf(tag, sizeof(tag), "%.2f", alpha);
    std::ofstream audit = open_out(out_dir / ("ltt_audit_a" + std::string(tag) + ".csv"));
    audit << "lambda1,lambda2,risk,pvalue,mean_tokens,accepted\n";
    for (const decide::LttAuditRow& row : res.audit)
      audit << fmt(row.lambda1) << ',' << fmt(row.lambda2) << ',' << fmt(row.risk) << ','
            << fmt(row.pvalue) << ',' << fmt(row.mean_tokens) << ','
            << (row.accepted ? 1 : 0) << '\n';

    double cal_risk = 0.0;
    for (const decide::LttAuditRow& row : res.audit)
      if (row.lambda1 == res.lambda1 && row.lambda2 == res.lambda2) cal_risk = row.risk;

    const decide::ExitPolicyConfig exit_cfg{res.lambda1, res.lambda2, cfg.patience};
    int errors = 0;
    double tokens = 0.0;
    for (const decide::BudgetTrace& t : test) {
      const ScoredAnswer a = decide::run_exit_policy(t, exit_cfg);
      if (a.answer == kAbstainLabel || a.answer != t.gold) ++errors;
      tokens += a.tokens_used;
    }
    const double test_risk = test.empty() ? 0.0 : static_cast<double>(errors) / test.size();
    const double mean_tokens = test.empty() ? 0.0 : tokens / test.size();
    summary << fmt(alpha) << ',' << fmt(1.0 - alpha) << ',' << fmt(res.lambda1) << ','
            << fmt(res.lambda2) << ',' << (res.fallback ? 1 : 0) << ',' << fmt(cal_risk)
            << ',' << fmt(test_risk) << ',' << fmt(1.0 - test_risk) << ','
            << fmt(mean_tokens) << '\n';
  }
}

void stage_vote(const StageOptions& opt) {
  const fs::path out_dir(opt.out_dir);
  const std::vector<TrajectoryRecord> records = read_rollout_log(log_path_of(opt));
  if (records.empty()) throw ValidationError("rollouts", "empty rollout log");

  std::map<std::string, std::vector<const TrajectoryRecord*>> by_task;
  for (const TrajectoryRecord& rec : records) by_task[rec.task_id].push_back(&rec);

  rng::Stream tie_rng = rng::substream(opt.cfg.seed, "tie-breaks");
  std::ofstream votes = open_out(out_dir / "votes.csv");
  votes << "task_id,gold,n,pass1,maj,conf,maj_correct,conf_correct\n";
  double pass1_sum = 0.0;
  int maj_correct = 0, conf_correct = 0;
  long total_rollouts = 0;
  for (const auto& [task_id, group] : by_task) {
    std::vector<ScoredAnswer> answers;
    for (const TrajectoryRecord* rec : group) {
      answers.push_back({rec->final_answer, record_confidence(*rec, opt.conf_source),
                         static_cast<int>(rec->actions.size())});
    }
    const int gold = group.front()->gold_answer;
    const decide::VoteResult v = decide::aggregate_votes(answers, tie_rng, gold);
    const bool maj_ok = v.majority == gold;
    const bool conf_ok = v.confidence_weighted == gold;
    votes << task_id << ',' << gold << ',' << answers.size() << ',' << fmt(*v.pass1) << ','
          << v.majority << ',' << v.confidence_weighted << ',' << (maj_ok ? 1 : 0) << ','
          << (conf_ok ? 1 : 0) << '\n';
    pass1_sum += *v.pass1;
    maj_correct += maj_ok ? 1 : 0;
    conf_correct += conf_ok ? 1 : 0;
    total_rollouts += static_cast<long>(answers.size());
  }
  const double n_tasks = static_cast<double>(by_task.size());
  std::ofstream summary = open_out(out_dir / "vote_summary.csv");
  summary << "n_tasks,mean_rollouts_per_task,pass1,maj_acc,conf_acc\n";
  summary << by_task.size() << ',' << fmt(static_cast<double>(total_rollouts) / n_tasks)
          << ',' << fmt(pass1_sum / n_tasks) << ',' << fmt(maj_correct / n_tasks) << ','
          << fmt(conf_correct / n_tasks) << '\n';
}

void stage_lexicon(const StageOptions& opt) {
  const fs::path out_dir(opt.out_dir);
  if (opt.input_dir.empty()) throw ConfigError("lexicon: --input-dir is required");
  const lexicon::IndicatorLexicon lex = opt.lexicon_path.empty()
                                            ? lexicon::default_lexicon()
                                            : lexicon::load_lexicon(opt.lexicon_path);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(opt.input_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("lexicon: no .txt files in " + opt.input_dir);

  std::ofstream csv = open_out(out_dir / "lexicon.csv");
  csv << "file,category,count,per_token,per_rollout\n";
  lexicon::CategoryCounts total;
  long total_tokens = 0;
  for (const fs::path& file : files) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const lexicon::CategoryCounts counts = lexicon::count_indicators(text, lex);
    const long tokens = std::max<long>(1, lexicon::count_tokens(text));
    const auto rates = lexicon::indicator_rates(counts, tokens, 1);
    for (int c = 0; c < 3; ++c) {
      csv << file.filename().string() << ',' << lexicon::kCategoryNames[c] << ','
          << counts.at(static_cast<lexicon::Category>(c)) << ',' << fmt(rates[c].per_token)
          << ',' << fmt(rates[c].per_rollout) << '\n';
    }
    total.self_correction += counts.self_correction;
    total.confidence_hedging += counts.confidence_hedging;
    total.knowledge_gap += counts.knowledge_gap;
    total_tokens += tokens;
  }
  const auto total_rates =
      lexicon::indicator_rates(total, total_tokens, static_cast<long>(files.size()));
  for (int c = 0; c < 3; ++c)
    csv << "TOTAL," << lexicon::kCategoryNames[c] << ','
        << total.at(static_cast<lexicon::Category>(c)) << ',' << fmt(total_rates[c].per_token)
        << ',' << fmt(total_rates[c].per_rollout) << '\n';
}

void stage_report(const StageOptions& opt) {
  const fs::path out_dir(opt.out_dir);
  const fs::path report_dir = out_dir / "report";
  std::vector<std::string> runs = opt.run_dirs;
  if (runs.empty()) runs.push_back(opt.out_dir);

  // accuracy/ECE per budget (forced readouts + per-budget confidence)
  std::ofstream budget_csv = open_out(report_dir / "budget_curve.csv");
  budget_csv << "run,budget,n,accuracy,ece\n";
  // accuracy-vs-ECE frontier across runs
  std::ofstream frontier = open_out(report_dir / "frontier.csv");
  frontier << "run,variant,lambda,accuracy,ece,pce,brier\n";
  // risk-control curves and voting table
  std::ofstream risk = open_out(report_dir / "risk_curves.csv");
  risk << "run,alpha,target_accuracy,realized_accuracy,test_mean_tokens\n";
  std::ofstream agg = open_out(report_dir / "aggregation.csv");
  agg << "run,n_tasks,pass1,maj_acc,conf_acc\n";

  for (const std::string& run : runs) {
    const fs::path run_dir(run);
    const std::string label = run_dir.filename().empty()
                                  ? run_dir.parent_path().filename().string()
                                  : run_dir.filename().string();
    const std::vector<TrajectoryRecord> records =
        read_rollout_log((run_dir / "rollouts.jsonl").string());
    if (records.empty()) throw ValidationError("rollouts", "empty rollout log in " + run);

    // budget curve
    std::map<int, std::vector<calib::ConfidencePair>> per_budget;
    for (const TrajectoryRecord& rec : records)
      for (const BudgetProbeSample& s : rec.budget_samples)
        per_budget[s.budget].push_back(
            {opt.conf_source == ConfSource::sequence
                 ? policy::sequence_confidence_prefix(rec, s.budget)
                 : s.probe_conf,
             s.readout == rec.gold_answer});
    for (const auto& [budget, pairs] : per_budget) {
      double acc = 0.0;
      for (const auto& p : pairs) acc += p.correct ? 1.0 : 0.0;
      acc /= static_cast<double>(pairs.size());
      const double ece =
          calib::calibration_errors(calib::reliability_bins(pairs, opt.cfg.bins)).ece;
      budget_csv << label << ',' << budget << ',' << pairs.size() << ',' << fmt(acc) << ','
                 << fmt(ece) << '\n';
    }

    // frontier row: accuracy from the log, calibration from metrics.json
    double accuracy = 0.0;
    for (const TrajectoryRecord& rec : records) accuracy += rec.correct ? 1.0 : 0.0;
    accuracy /= static_cast<double>(records.size());
    std::string variant = "?";
    std::string lambda = "?";
    const fs::path cfg_path = run_dir / "run_config.ini";
    if (fs::exists(cfg_path)) {
      const auto kv = load_config_file(cfg_path.string());
      if (auto it = kv.find("reward-variant"); it != kv.end()) variant = it->second;
      if (auto it = kv.find("lambda"); it != kv.end()) lambda = it->second;
    }
    const fs::path metrics_path = run_dir / "metrics.json";
    if (fs::exists(metrics_path)) {
      std::ifstream in(metrics_path);
      nlohmann::json metrics = nlohmann::json::parse(in);
      frontier << label << ',' << variant << ',' << lambda << ',' << fmt(accuracy) << ','
               << fmt(metrics.at("ece").get<double>()) << ','
               << fmt(metrics.at("pce").get<double>()) << ','
               << fmt(metrics.at("brier").get<double>()) << '\n';
    }

    // pass through the per-run ltt and vote summaries
    const fs::path ltt_path = run_dir / "ltt_summary.csv";
    if (fs::exists(ltt_path)) {
      std::ifstream in(ltt_path);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() >= 9)
          risk << label << ',' << cols[0] << ',' << cols[1] << ',' << cols[7] << ','
               << cols[8] << '\n';
      }
    }
    const fs::path vote_path = run_dir / "vote_summary.csv";
    if (fs::exists(vote_path)) {
      std::ifstream in(vote_path);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() >= 5)
          agg << label << ',' << cols[0] << ',' << cols[2] << ',' << cols[3] << ','
              << cols[4] << '\n';
      }
    }
  }
}

void run_experiment(const StageOptions& opt) {
  struct Stage {
    const char* name;
    void (*fn)(const StageOptions&);
  };
  const Stage stages[] = {{"train", stage_train},
                          {"rollout-eval", stage_rollout_eval},
                          {"calibrate", stage_calibrate},
                          {"ltt", stage_ltt},
                          {"vote", stage_vote},
                          {"report", stage_report}};
  for (const Stage& stage : stages) {
    const std::string tag = "stage '" + std::string(stage.name) + "' failed: ";
    try {
      stage.fn(opt);
    } catch (const ValidationError& e) {
      throw ValidationError(e.field(), tag + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(tag + e.what());
    } catch (const ParseError& e) {
      throw ParseError(tag + e.what(), e.byte_offset());
    } catch (const std::exception& e) {
      throw std::runtime_error(tag + e.what());
    }
  }
}

}  // namespace rlcm::pipeline
