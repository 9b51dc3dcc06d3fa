#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "rlcm/errors.hpp"

using rlcm::pipeline::StageOptions;

namespace {

// Every run-config key is a flag of the same name, so config-file values
// and CLI overrides stay interchangeable.
void add_config_options(CLI::App& app, rlcm::RunConfig& cfg) {
  app.add_option("--seed", cfg.seed, "master seed for all substreams");
  app.add_option("--group-size", cfg.group_size, "rollouts per task group (G)");
  app.add_option("--batch-size", cfg.batch_size, "task groups per iteration");
  app.add_option("--lambda", cfg.lambda, "auxiliary reward weight");
  app.add_option("--reward-variant", cfg.reward_variant,
                 "rlcm_margin|final_brier|final_margin|process_brier|none");
  app.add_option("--clip-eps", cfg.clip_eps, "GRPO clipping epsilon");
  app.add_option("--inner-epochs", cfg.inner_epochs, "ascent steps per iteration");
  app.add_option("--iterations", cfg.iterations, "training iterations");
  app.add_option("--lr-policy", cfg.lr_policy, "policy learning rate");
  app.add_option("--temperature-train", cfg.temperature_train, "behavior temperature");
  app.add_option("--temperature-eval", cfg.temperature_eval, "evaluation temperature");
  app.add_option("--checkpoint-every", cfg.checkpoint_every, "checkpoint period");
  app.add_option("--probe-hidden", cfg.probe_hidden, "probe hidden width");
  app.add_option("--lr-probe", cfg.lr_probe, "probe learning rate");
  app.add_option("--probe-momentum", cfg.probe_momentum, "probe SGD momentum");
  app.add_option("--k-samples", cfg.k_samples, "forced readouts per budget (K)");
  app.add_option("--budget-stride", cfg.budget_stride, "steps between budgets");
  app.add_option("--include-final-budget", cfg.include_final_budget,
                 "append the final step to the budget set");
  app.add_option("--num-actions", cfg.num_actions, "environment action count (V)");
  app.add_option("--num-answers", cfg.num_answers, "answer label count (A)");
  app.add_option("--horizon", cfg.horizon, "max trajectory length");
  app.add_option("--delta-plus", cfg.delta_plus, "progress gain per good action");
  app.add_option("--delta-minus", cfg.delta_minus, "progress loss per bad action");
  app.add_option("--derail-q", cfg.derail_q, "derail probability scale");
  app.add_option("--g-max", cfg.g_max, "gold readout probability at full progress");
  app.add_option("--d-min", cfg.d_min, "difficulty lower bound");
  app.add_option("--d-max", cfg.d_max, "difficulty upper bound");
  app.add_option("--feature-dim", cfg.feature_dim, "projected feature dimension (D)");
  app.add_option("--feature-noise", cfg.feature_noise, "on-track feature noise sigma");
  app.add_option("--eval-tasks", cfg.eval_tasks, "tasks in the evaluation suite");
  app.add_option("--rollouts", cfg.rollouts, "rollouts per evaluation task");
  app.add_option("--bins", cfg.bins, "calibration bin count (B)");
  app.add_option("--ltt-delta", cfg.ltt_delta, "LTT failure probability");
  app.add_option("--patience", cfg.patience, "consecutive low-confidence budgets to abandon");
  app.add_option("--ltt-split", cfg.ltt_split, "calibration fraction for LTT");
  app.add_option("--ltt-bound", cfg.ltt_bound, "p-value bound: exact|hoeffding");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RLCM lab: margin-rewarded GRPO training with calibration, "
               "risk-control, and aggregation tools"};
  app.require_subcommand(1);
  app.fallthrough();

  StageOptions opt;
  std::string conf_source = "probe";
  app.set_config("--config", "", "flat key=value config file");
  add_config_options(app, opt.cfg);
  app.add_option("--out-dir", opt.out_dir, "artifact directory");

  CLI::App* train = app.add_subcommand("train", "run GRPO + probe training");
  CLI::App* rollout_eval =
      app.add_subcommand("rollout-eval", "sample evaluation rollouts into a log");
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "reliability table and calibration metrics from a log");
  CLI::App* ltt = app.add_subcommand("ltt", "learn-then-test threshold selection from a log");
  CLI::App* vote = app.add_subcommand("vote", "majority and confidence-weighted voting from a log");
  CLI::App* lexicon = app.add_subcommand("lexicon", "count uncertainty indicators in trace files");
  CLI::App* report = app.add_subcommand("report", "aggregate plot-ready CSVs from run artifacts");
  CLI::App* run = app.add_subcommand("run", "full pipeline: train through report");

  for (CLI::App* sub : {calibrate, ltt, vote, report, run})
    sub->add_option("--conf-source", conf_source, "confidence source: probe|sequence");
  for (CLI::App* sub : {calibrate, ltt, vote, report})
    sub->add_option("--log", opt.log_path, "rollout log (default <out-dir>/rollouts.jsonl)");
  for (CLI::App* sub : {ltt, run})
    sub->add_option("--alpha", opt.alphas, "target risk level(s)");
  lexicon->add_option("--input-dir", opt.input_dir, "directory of plain-text trace files")
      ->required();
  lexicon->add_option("--lexicon", opt.lexicon_path, "phrase list file (default built-in)");
  report->add_option("--run", opt.run_dirs, "run directories to aggregate (default out-dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags / config are validation errors
  }

  try {
    opt.conf_source = rlcm::pipeline::conf_source_from_string(conf_source);
    if (train->parsed()) rlcm::pipeline::stage_train(opt);
    if (rollout_eval->parsed()) rlcm::pipeline::stage_rollout_eval(opt);
    if (calibrate->parsed()) rlcm::pipeline::stage_calibrate(opt);
    if (ltt->parsed()) rlcm::pipeline::stage_ltt(opt);
    if (vote->parsed()) rlcm::pipeline::stage_vote(opt);
    if (lexicon->parsed()) rlcm::pipeline::stage_lexicon(opt);
    if (report->parsed()) rlcm::pipeline::stage_report(opt);
    if (run->parsed()) rlcm::pipeline::run_experiment(opt);
  } catch (const rlcm::ValidationError& e) {
    std::fprintf(stderr, "rlcm: validation error: %s\n", e.what());
    return 2;
  } catch (const rlcm::ConfigError& e) {
    std::fprintf(stderr, "rlcm: config error: %s\n", e.what());
    return 2;
  } catch (const rlcm::ParseError& e) {
    std::fprintf(stderr, "rlcm: parse error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rlcm: %s\n", e.what());
    return 1;
  }
  return 0;
}
