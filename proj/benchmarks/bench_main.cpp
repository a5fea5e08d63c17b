#include <benchmark/benchmark.h>

#include "ndpmpm/gibbs.hpp"
#include "ndpmpm/model.hpp"
#include "ndpmpm/risk.hpp"
#include "ndpmpm/rules.hpp"
#include "ndpmpm/simulate.hpp"
#include "ndpmpm/truncated.hpp"

using namespace ndpmpm;

namespace {

ToyPopulationConfig toy(std::size_t households) {
  ToyPopulationConfig c;
  c.households = households;
  c.size_probabilities = {0.25, 0.35, 0.2, 0.1, 0.06, 0.04};
  c.household_vars = {{"ownership", {0.65, 0.35}}};
  c.individual_vars = {{"relationship", {0.4, 0.2, 0.3, 0.1}},
                       {"race", {0.5, 0.25, 0.15, 0.1}},
                       {"gender", {0.5, 0.5}},
                       {"age", {0.3, 0.45, 0.25}}};
  c.copy_variable = "race";
  c.copy_probability = 0.9;
  return c;
}

const Dataset& sample_data() {
  static const Dataset d = simulate_toy_population(toy(2000), 1);
  return d;
}

Params fitted_like(const Schema& schema, int F, int S) {
  Rng rng(7);
  return prior_draw(uniform_prior(schema, F, S), rng);
}

void BM_HouseholdLogLikelihood(benchmark::State& state) {
  const Dataset& d = sample_data();
  const Params p = fitted_like(d.schema, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const LogTables tables(p);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tables.household_log_likelihood(d.households[i]));
    i = (i + 1) % d.households.size();
  }
}
BENCHMARK(BM_HouseholdLogLikelihood)->Args({15, 8})->Args({30, 10})->Args({40, 15});

void BM_GibbsSweep(benchmark::State& state) {
  const Dataset& d = sample_data();
  const Hyperparams hyper = empirical_prior(d, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  ChainState chain = initial_state(d, hyper, 3);
  for (auto _ : state) gibbs_sweep(d, hyper, chain, 1, 3);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.num_households()));
}
BENCHMARK(BM_GibbsSweep)->Args({15, 8})->Args({30, 10})->Unit(benchmark::kMillisecond);

void BM_Augmentation(benchmark::State& state) {
  const Dataset& d = sample_data();
  const RuleSet rules = compile_rules(
      "exactly_one relationship = 1\n"
      "min_value age >= 2 when relationship = 1\n"
      "order age : 3 < 1 by relationship\n",
      d.schema);
  const Params p = fitted_like(d.schema, 15, 8);
  const SizeHistogram hist = size_histogram(d);
  std::size_t it = 0;
  for (auto _ : state) {
    const auto batch = generate_augmented(p, d.schema, rules, hist, {5, ++it, 1}, 100'000'000);
    benchmark::DoNotOptimize(batch.total_generated());
  }
}
BENCHMARK(BM_Augmentation)->Unit(benchmark::kMillisecond);

void BM_ImportancePosterior(benchmark::State& state) {
  const Dataset& d = sample_data();
  std::vector<Params> draws;
  for (std::int64_t r = 0; r < state.range(0); ++r) {
    Rng rng(100 + r);
    draws.push_back(prior_draw(uniform_prior(d.schema, 15, 8), rng));
  }
  const std::vector<Dataset> Z{d, d, d, d, d};
  const TargetSupport support = build_support_household(d.households[1], d.schema);
  for (auto _ : state) benchmark::DoNotOptimize(importance_posterior(Z, support, draws).rank_of_truth);
}
BENCHMARK(BM_ImportancePosterior)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
