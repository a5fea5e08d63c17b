#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "ndpmpm/checkpoint.hpp"
#include "ndpmpm/rules.hpp"
#include "ndpmpm/truncated.hpp"

using namespace ndpmpm;
using fixtures::make_household;

namespace {

Schema role_schema() {
  Schema s = fixtures::make_schema(3, {{"own", 2}}, {{"role", 3}, {"age", 3}});
  s.individual_vars[0].labels = {"head", "spouse", "child"};
  return s;
}

const char* kRules = "exactly_one role = head\norder age : child < head by role\n";

Dataset feasible_data() {
  Dataset d;
  d.schema = role_schema();
  d.households.push_back(make_household("1", {0}, {{0, 2}, {2, 0}}));
  d.households.push_back(make_household("2", {1}, {{0, 1}}));
  d.households.push_back(make_household("3", {1}, {{0, 2}, {1, 2}, {2, 1}}));
  d.households.push_back(make_household("4", {0}, {{0, 1}, {1, 0}}));
  d.households.push_back(make_household("5", {0}, {{0, 0}}));
  return d;
}

}  // namespace

TEST_CASE("augmentation: each stratum gets exactly n feasible households") {
  const Dataset d = feasible_data();
  const RuleSet rules = compile_rules(kRules, d.schema);
  const Params params = fixtures::random_params(d.schema, 3, 2, 4);
  const AugmentedBatch batch = generate_augmented(params, d.schema, rules, size_histogram(d), {9, 1, 1}, 100000);
  REQUIRE(batch.strata.size() == 3);
  std::size_t generated = 0;
  for (const auto& s : batch.strata) {
    CHECK(s.feasible.size() == size_histogram(d).at(s.h));
    for (const auto& g : s.feasible) {
      CHECK(rules.feasible(g.record));
      CHECK(static_cast<int>(g.record.members.size()) == s.h);
      CHECK(g.M.size() == g.record.members.size());
    }
    for (const auto& g : s.infeasible) CHECK_FALSE(rules.feasible(g.record));
    generated += s.feasible.size() + s.infeasible.size();
  }
  CHECK(batch.total_generated() == generated);
  CHECK(batch.total_infeasible() == generated - d.num_households());
}

TEST_CASE("augmentation: infeasible count has the negative binomial mean") {
  const Dataset d = feasible_data();
  const RuleSet rules = compile_rules(kRules, d.schema);
  const Params params = fixtures::random_params(d.schema, 2, 2, 21);
  SizeHistogram hist{{2, 10}};
  const double p = 1.0 - infeasible_mass_exact(params, d.schema, 2, rules).value;
  const int reps = 3000;
  double sum = 0.0;
  for (int t = 0; t < reps; ++t)
    sum += static_cast<double>(
        generate_augmented(params, d.schema, rules, hist, {3, static_cast<std::size_t>(t), 1}, 1'000'000)
            .total_infeasible());
  const double mean = 10.0 * (1 - p) / p;
  const double sd = std::sqrt(10.0 * (1 - p) / (p * p));
  CHECK(std::abs(sum / reps - mean) < 4.0 * sd / std::sqrt(reps));
}

TEST_CASE("augmentation: thread count does not change the batch") {
  const Dataset d = feasible_data();
  const RuleSet rules = compile_rules(kRules, d.schema);
  const Params params = fixtures::random_params(d.schema, 3, 2, 4);
  const auto a = generate_augmented(params, d.schema, rules, size_histogram(d), {9, 2, 1}, 100000);
  const auto b = generate_augmented(params, d.schema, rules, size_histogram(d), {9, 2, 3}, 100000);
  REQUIRE(a.strata.size() == b.strata.size());
  for (std::size_t i = 0; i < a.strata.size(); ++i) {
    REQUIRE(a.strata[i].infeasible.size() == b.strata[i].infeasible.size());
    for (std::size_t j = 0; j < a.strata[i].feasible.size(); ++j) {
      CHECK(a.strata[i].feasible[j].record.members == b.strata[i].feasible[j].record.members);
      CHECK(a.strata[i].feasible[j].G == b.strata[i].feasible[j].G);
    }
  }
}

TEST_CASE("augmentation: cap is enforced") {
  const Dataset d = feasible_data();
  const RuleSet rules = compile_rules(kRules, d.schema);
  const Params params = fixtures::random_params(d.schema, 3, 2, 4);
  CHECK_THROWS_AS(generate_augmented(params, d.schema, rules, size_histogram(d), {9, 1, 1}, 3), AugmentCapExceeded);
}

TEST_CASE("byproduct dataset: feasible households in size order") {
  const Dataset d = feasible_data();
  const RuleSet rules = compile_rules(kRules, d.schema);
  const Params params = fixtures::random_params(d.schema, 3, 2, 4);
  const auto batch = generate_augmented(params, d.schema, rules, size_histogram(d), {9, 1, 1}, 100000);
  const Dataset out = byproduct_dataset(batch, d.schema);
  CHECK(out.num_households() == d.num_households());
  CHECK_NOTHROW(out.validate());
  for (std::size_t i = 1; i < out.households.size(); ++i)
    CHECK(out.households[i - 1].members.size() <= out.households[i].members.size());
}

TEST_CASE("truncated chain: captures, thread invariance and feasible by-products") {
  const Dataset d = feasible_data();
  const RuleSet rules = compile_rules(kRules, d.schema);
  ChainConfig config;
  config.iterations = 12;
  config.burn_in = 6;
  config.thin = 2;
  config.seed = 77;
  config.save_latent = false;
  config.capture_iterations = {8, 12};
  auto run = [&](int threads, std::vector<std::size_t>* captured) {
    config.threads = threads;
    std::ostringstream out;
    run_chain(d, uniform_prior(d.schema, 3, 2), config, &rules, [&](const Checkpoint& c) { write_checkpoint(out, c); },
              [&](std::size_t it, const AugmentedBatch& b) {
                if (captured) captured->push_back(it);
                for (const auto& s : b.strata)
                  for (const auto& g : s.feasible) CHECK(rules.feasible(g.record));
              });
    return out.str();
  };
  std::vector<std::size_t> captured;
  const std::string one = run(1, &captured);
  CHECK(captured == std::vector<std::size_t>{8, 12});
  CHECK(run(2, nullptr) == one);
  std::istringstream in(one);
  const auto cps = read_checkpoints(in);
  REQUIRE(cps.size() == 3);
  CHECK_FALSE(cps[0].latent.has_value());
}
