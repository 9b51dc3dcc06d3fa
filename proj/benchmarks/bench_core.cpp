#include <benchmark/benchmark.h>

#include <vector>

#include "rlcm/calib.hpp"
#include "rlcm/decide.hpp"
#include "rlcm/grpo.hpp"
#include "rlcm/rewards.hpp"

using namespace rlcm;

namespace {

std::vector<BudgetProbeSample> make_samples(int n, rng::Stream& s) {
  std::vector<BudgetProbeSample> v;
  for (int i = 0; i < n; ++i) {
    BudgetProbeSample b;
    b.budget = 4 * (i + 1);
    b.mc_target = static_cast<double>(s.uniform_int(5)) / 4;
    b.probe_conf = s.uniform(0.01, 0.99);
    b.k_samples = 4;
    v.push_back(b);
  }
  return v;
}

void BM_MarginReward(benchmark::State& state) {
  rng::Stream s(1);
  auto samples = make_samples(static_cast<int>(state.range(0)), s);
  for (auto _ : state) benchmark::DoNotOptimize(rewards::margin_reward(samples));
}
BENCHMARK(BM_MarginReward)->Arg(6)->Arg(64);

void BM_GroupAdvantages(benchmark::State& state) {
  rng::Stream s(2);
  std::vector<double> rewards(state.range(0));
  for (double& r : rewards) r = s.uniform(-1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(grpo::group_advantages(rewards));
}
BENCHMARK(BM_GroupAdvantages)->Arg(6)->Arg(64);

void BM_CalibrationErrors(benchmark::State& state) {
  rng::Stream s(3);
  std::vector<calib::ConfidencePair> pairs(state.range(0));
  for (auto& p : pairs) {
    p.confidence = s.uniform();
    p.correct = s.bernoulli(p.confidence);
  }
  for (auto _ : state) {
    auto table = calib::reliability_bins(pairs, 10);
    benchmark::DoNotOptimize(calib::calibration_errors(table));
  }
}
BENCHMARK(BM_CalibrationErrors)->Arg(128)->Arg(2048);

void BM_BinomialPvalue(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(decide::binomial_pvalue(static_cast<int>(state.range(0)),
                                                     static_cast<int>(state.range(0) / 10), 0.2));
}
BENCHMARK(BM_BinomialPvalue)->Arg(500)->Arg(5000);

void BM_ProbeForward(benchmark::State& state) {
  probe::ProbeParams p = probe::init_probe(32, 16, 1);
  rng::Stream s(4);
  std::vector<double> phi(16);
  for (double& x : phi) x = s.normal();
  for (auto _ : state) benchmark::DoNotOptimize(probe::probe_forward(p, phi));
}
BENCHMARK(BM_ProbeForward);

void BM_ProbeUpdate(benchmark::State& state) {
  probe::ProbeParams p = probe::init_probe(32, 16, 1);
  rng::Stream s(5);
  std::vector<probe::ProbeSample> batch(state.range(0));
  for (auto& sample : batch) {
    sample.features.resize(16);
    for (double& x : sample.features) x = s.normal();
    sample.target = s.uniform();
  }
  probe::ProbeGradient velocity;
  for (auto _ : state) probe::probe_update(p, batch, 1e-3, &velocity, 0.9);
}
BENCHMARK(BM_ProbeUpdate)->Arg(1152);

void BM_SampleTrajectory(benchmark::State& state) {
  envsim::Environment env{envsim::EnvConfig{}};
  envsim::TaskSpec task = env.sample_task(42);
  policy::PolicyParams pol(4, 16, 0.8);
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        policy::sample_trajectory(pol, env, task, 24, 4, true, 4, ++seed));
}
BENCHMARK(BM_SampleTrajectory);

void BM_TrainIteration(benchmark::State& state) {
  RunConfig cfg;
  cfg.batch_size = static_cast<int>(state.range(0));
  grpo::Trainer trainer(cfg, 7);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.train_iteration());
}
BENCHMARK(BM_TrainIteration)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ExitPolicy(benchmark::State& state) {
  rng::Stream s(6);
  decide::BudgetTrace t;
  t.gold = 0;
  for (int b = 1; b <= 6; ++b) {
    t.budgets.push_back(4 * b);
    t.confs.push_back(s.uniform());
    t.answers.push_back(static_cast<int>(s.uniform_int(8)));
  }
  const decide::ExitPolicyConfig cfg{0.2, 0.9, 2};
  for (auto _ : state) benchmark::DoNotOptimize(decide::run_exit_policy(t, cfg));
}
BENCHMARK(BM_ExitPolicy);

}  // namespace

BENCHMARK_MAIN();
