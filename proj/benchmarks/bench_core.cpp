#include <benchmark/benchmark.h>

#include "flowids/attacks.hpp"
#include "flowids/classifier.hpp"
#include "flowids/explain.hpp"
#include "flowids/robustness.hpp"
#include "flowids/synth.hpp"
#include "flowids/util.hpp"

using namespace flowids;

namespace {

Matrix random_input(std::size_t steps, int width, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(steps, static_cast<std::size_t>(width));
  for (auto& v : m.d) v = rng.normal();
  return m;
}

void ForwardPass(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  const ModelParams params = init_params(3, hidden, 15, 1);
  const Matrix input = random_input(10, 15, 2);
  for (auto _ : state) {
    const ForwardTrace tr = forward(params, input);
    benchmark::DoNotOptimize(tr.logits.back());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 10);
}
BENCHMARK(ForwardPass)->Arg(32)->Arg(64)->Arg(128);

void BackwardPass(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  const ModelParams params = init_params(3, hidden, 15, 1);
  const Matrix input = random_input(10, 15, 2);
  const std::vector<double> labels(10, 1.0);
  const ForwardTrace tr = forward(params, input);
  for (auto _ : state) {
    const Gradients g = backward(params, tr, GradObjective::loss(labels));
    benchmark::DoNotOptimize(g.params[0]);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 10);
}
BENCHMARK(BackwardPass)->Arg(32)->Arg(64);

void CWAttackSmall(benchmark::State& state) {
  const Dataset ds = synth_generate({.benign = 30, .dos = 10, .scan = 0, .slow = 0, .bot = 0, .exfil = 0,
                                     .min_len = 3, .max_len = 6}, 3);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.layers = 2;
  cfg.hidden = 32;
  cfg.seed = 3;
  const Model model = train(ds, fit_normalizer(ds), cfg).model;
  Flow attack;
  for (const auto& fl : ds.flows)
    if (fl.is_attack()) {
      attack = fl;
      break;
    }
  CWConfig cw;
  cw.base_iters = 100;
  for (auto _ : state) {
    const AdversarialResult res = cw_attack(model, attack, cw);
    benchmark::DoNotOptimize(res.attempted_l1);
  }
}
BENCHMARK(CWAttackSmall)->Unit(benchmark::kMillisecond);

void ArsFromDistances(benchmark::State& state) {
  Rng rng(5);
  std::vector<double> d(static_cast<std::size_t>(state.range(0)));
  for (auto& v : d)
    v = rng.bernoulli(0.2) ? std::numeric_limits<double>::infinity() : rng.uniform(0.0, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(ars_from_distances(d));
}
BENCHMARK(ArsFromDistances)->Arg(1000)->Arg(100000);

void MiFromJoint(benchmark::State& state) {
  Rng rng(6);
  std::vector<std::vector<std::uint64_t>> joint(16, std::vector<std::uint64_t>(2, 0));
  for (int i = 0; i < 100000; ++i)
    joint[static_cast<std::size_t>(rng.uniform_int(0, 15))]
         [static_cast<std::size_t>(rng.uniform_int(0, 1))] += 1;
  for (auto _ : state) benchmark::DoNotOptimize(mi_from_joint(joint));
}
BENCHMARK(MiFromJoint);

}  // namespace

BENCHMARK_MAIN();
