#include <benchmark/benchmark.h>

#include <vector>

#include "wiretap/capacity.hpp"
#include "wiretap/codec.hpp"
#include "wiretap/secrecy.hpp"

using namespace wiretap;

static void BM_optimize_binary(benchmark::State& state) {
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  for (auto _ : state) {
    BoundReport rep = optimize(sys, 0.1, Objective::corollary);
    benchmark::DoNotOptimize(rep.lower);
  }
}
BENCHMARK(BM_optimize_binary)->Unit(benchmark::kMillisecond);

static void BM_entropy_joint(benchmark::State& state) {
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  InputPolicy pol = InputPolicy::uniform(2, 2);
  JointPmf joint = policy_joint(sys, pol);
  for (auto _ : state) {
    double h = entropy(joint, {1, 2, 3});
    benchmark::DoNotOptimize(h);
  }
}
BENCHMARK(BM_entropy_joint);

static void BM_decode_block(benchmark::State& state) {
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  CodebookSpec spec;
  spec.n = 12;
  spec.num_blocks = 3;
  spec.rate0 = spec.rate1 = 0.2;
  spec.epsilon = 0.02;
  spec.aux = AuxPolicy::identity(Pmf::uniform(2), 2);
  Rng rng(11);
  Codebook cb = build_codebook(sys, spec, rng);
  std::vector<int> s = sample_states(sys, spec.n, rng);
  std::vector<int> x(static_cast<size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) x[static_cast<size_t>(i)] = cb.symbol(0, i);
  auto [y, z] = sample_block(sys, x, s, rng);
  for (auto _ : state) {
    DecodeOutcome out = try_decode_block(sys, cb, y, s, BlockKeys{},
                                         DecoderKind::maximum_likelihood);
    benchmark::DoNotOptimize(out.word);
  }
}
BENCHMARK(BM_decode_block)->Unit(benchmark::kMicrosecond);

static void BM_exact_leakage_small(benchmark::State& state) {
  BscScenario scn;
  WiretapSystem sys = make_state_bsc(scn, true);
  CodebookSpec spec;
  spec.n = 5;
  spec.num_blocks = 2;
  spec.rate0 = spec.rate1 = spec.rate2 = 1.1 / 5.0;
  spec.epsilon = 0.02;
  spec.aux = AuxPolicy::identity(Pmf::uniform(2), 2);
  Rng rng(21);
  Codebook cb = build_codebook(sys, spec, rng);
  for (auto _ : state) {
    SecrecyReport rep = exact_leakage(sys, cb);
    benchmark::DoNotOptimize(rep.total_leakage);
  }
}
BENCHMARK(BM_exact_leakage_small)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
