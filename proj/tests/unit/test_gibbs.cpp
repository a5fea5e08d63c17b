#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "ndpmpm/checkpoint.hpp"
#include "ndpmpm/error.hpp"
#include "ndpmpm/gibbs.hpp"
#include "ndpmpm/rules.hpp"

using namespace ndpmpm;
using fixtures::make_household;
using fixtures::make_schema;

namespace {

Dataset small_data() {
  Dataset d;
  d.schema = make_schema(3, {{"own", 2}}, {{"a", 3}, {"b", 2}});
  d.households.push_back(make_household("1", {0}, {{0, 1}, {2, 0}}));
  d.households.push_back(make_household("2", {1}, {{1, 1}}));
  d.households.push_back(make_household("3", {1}, {{2, 1}, {2, 0}, {0, 0}}));
  d.households.push_back(make_household("4", {0}, {{0, 0}, {1, 1}}));
  return d;
}

std::string run_to_text(const Dataset& d, const ChainConfig& config, const RuleSet* rules = nullptr) {
  std::ostringstream out;
  run_chain(d, uniform_prior(d.schema, 4, 3), config, rules, [&](const Checkpoint& c) { write_checkpoint(out, c); });
  return out.str();
}

}  // namespace

TEST_CASE("tally: counts by class") {
  const Dataset d = small_data();
  const Params shape = fixtures::random_params(d.schema, 2, 2, 1);
  LatentState latent;
  latent.G = {0, 1, 1, 0};
  latent.M = {{0, 1}, {1}, {0, 0, 1}, {1, 1}};
  const ClassCounts c = tally(d, latent, shape);
  CHECK(c.households(0) == 2);
  CHECK(c.households(1) == 2);
  CHECK(c.individuals(0, 0) == 1);
  CHECK(c.individuals(0, 1) == 3);
  CHECK(c.individuals(1, 0) == 2);
  CHECK(c.individuals(1, 1) == 2);
  // own (k = 1) in class 1: households 2 and 3 are both rented
  CHECK(c.lambda_counts(1)[1 * 2 + 1] == 2);
  // a = 2 (code 2) for class (1, 0): household 3 members 0 and 1
  CHECK(c.phi_counts(0)[(1 * 2 + 0) * 3 + 2] == 2);
}

TEST_CASE("sample_G: class frequencies follow the exact posterior") {
  Dataset d = small_data();
  d.households.resize(1);
  ChainState state;
  state.params = fixtures::random_params(d.schema, 3, 2, 99);
  state.latent.G = {0};
  state.latent.M = {{0, 0}};
  std::vector<double> post(3);
  double total = 0.0;
  for (int g = 0; g < 3; ++g) {
    Params only = state.params;  // likelihood with the class fixed: zero the other weights
    for (int f = 0; f < 3; ++f) only.pi[f] = f == g ? 1.0 : 0.0;
    total += post[g] = state.params.pi[g] * fixtures::brute_force_likelihood(d.households[0], only);
  }
  std::vector<int> counts(3, 0);
  const int n = 30000;
  for (int t = 0; t < n; ++t) {
    sample_G(d, state, SweepContext{5, static_cast<std::size_t>(t), 1});
    ++counts[state.latent.G[0]];
  }
  for (int g = 0; g < 3; ++g) {
    const double p = post[g] / total;
    CHECK(std::abs(counts[g] / double(n) - p) < 4 * std::sqrt(p * (1 - p) / n) + 1e-12);
  }
}

TEST_CASE("stick and concentration updates match their conditional means") {
  const Dataset d = small_data();
  Params params = fixtures::random_params(d.schema, 3, 2, 7);
  params.alpha = 0.7;
  LatentState latent;
  latent.G = {0, 0, 1, 2};
  latent.M = {{0, 0}, {1}, {0, 1, 1}, {0, 0}};
  const ClassCounts counts = tally(d, latent, params);
  Hyperparams hyper = uniform_prior(d.schema, 3, 2);
  const int n = 40000;
  double u0 = 0.0, alpha = 0.0, lambda = 0.0, lambda2 = 0.0;
  for (int t = 0; t < n; ++t) {
    Params p = params;
    SweepContext ctx{11, static_cast<std::size_t>(t), 1};
    sample_household_sticks(counts, p, ctx);
    sample_lambda(counts, hyper, p, ctx);
    u0 += p.u[0];
    lambda += p.lambda_at(1, 0, 0);
    lambda2 += p.lambda_at(1, 2, 0);
    p.u = {0.5, 0.25, 1.0};
    p.log1m_u.clear();
    sample_alpha(hyper, p, ctx);
    alpha += p.alpha;
  }
  // u_1 ~ Beta(1 + 2, alpha + 2)
  CHECK(u0 / n == doctest::Approx(3.0 / (3.0 + 2.7)).epsilon(0.01));
  // lambda_own, class 0: prior (1, 1) plus one owned and one rented -> Dirichlet(2, 2)
  CHECK(lambda / n == doctest::Approx(0.5).epsilon(0.01));
  // class 2 holds one owned household -> Dirichlet(2, 1)
  CHECK(lambda2 / n == doctest::Approx(2.0 / 3.0).epsilon(0.01));
  // alpha ~ Gamma(0.25 + 2, 0.25 - log(0.5) - log(0.75))
  CHECK(alpha / n == doctest::Approx(2.25 / (0.25 - std::log(0.5) - std::log(0.75))).epsilon(0.015));
}

TEST_CASE("beta update: common and per-class shapes") {
  const Dataset d = small_data();
  Params params = fixtures::random_params(d.schema, 2, 3, 7);
  params.v = {0.5, 0.5, 1.0, 0.2, 0.2, 1.0};
  params.log1m_v.clear();
  Hyperparams hyper = uniform_prior(d.schema, 2, 3);
  const int n = 40000;
  double common = 0.0, first = 0.0;
  for (int t = 0; t < n; ++t) {
    Params p = params;
    SweepContext ctx{3, static_cast<std::size_t>(t), 1};
    hyper.beta_mode = BetaMode::kCommon;
    sample_beta(hyper, p, ctx);
    common += p.beta[0];
    hyper.beta_mode = BetaMode::kPerClass;
    sample_beta(hyper, p, ctx);
    REQUIRE(p.beta.size() == 2);
    first += p.beta[0];
  }
  const double l5 = -std::log(0.5), l8 = -std::log(0.8);
  CHECK(common / n == doctest::Approx((0.25 + 4) / (0.25 + 2 * l5 + 2 * l8)).epsilon(0.015));
  CHECK(first / n == doctest::Approx((0.25 + 2) / (0.25 + 2 * l5)).epsilon(0.015));
}

TEST_CASE("run_chain: checkpoint schedule and thread invariance") {
  const Dataset d = small_data();
  ChainConfig config;
  config.iterations = 10;
  config.burn_in = 4;
  config.thin = 3;
  config.seed = 123;
  std::vector<std::size_t> seen;
  run_chain(d, uniform_prior(d.schema, 4, 3), config, nullptr, [&](const Checkpoint& c) {
    seen.push_back(c.iteration);
    CHECK(c.latent.has_value());
    CHECK(c.params.simplex_error() < 1e-12);
  });
  CHECK(seen == std::vector<std::size_t>{7, 10});

  config.thin = 1;
  const std::string one = run_to_text(d, config);
  config.threads = 3;
  CHECK(run_to_text(d, config) == one);
  config.seed = 124;
  CHECK(run_to_text(d, config) != one);
}

TEST_CASE("run_chain: bad configurations and infeasible data are rejected") {
  const Dataset d = small_data();
  ChainConfig config;
  config.iterations = 5;
  config.burn_in = 5;
  CHECK_THROWS_AS(run_chain(d, uniform_prior(d.schema, 2, 2), config, nullptr, {}), InputError);
  config.burn_in = 1;
  config.thin = 0;
  CHECK_THROWS_AS(run_chain(d, uniform_prior(d.schema, 2, 2), config, nullptr, {}), InputError);
  config.thin = 1;
  const RuleSet rules = compile_rules("exactly_one a = 1", d.schema);
  CHECK_THROWS_AS(run_chain(d, uniform_prior(d.schema, 2, 2), config, &rules, {}), InputError);
}

TEST_CASE("diagnostics: occupancy and CSV columns") {
  const Dataset d = small_data();
  ChainConfig config;
  config.iterations = 3;
  config.burn_in = 1;
  config.seed = 5;
  Hyperparams hyper = uniform_prior(d.schema, 4, 3);
  hyper.beta_mode = BetaMode::kPerClass;
  const Diagnostics diag = run_chain(d, hyper, config, nullptr, {});
  REQUIRE(diag.iterations.size() == 3);
  for (const auto& it : diag.iterations) {
    CHECK(it.occupied_household >= 1);
    CHECK(it.occupied_household <= 4);
    CHECK(it.occupied_individual <= 3);
    CHECK(it.pi.size() == 4);
    CHECK(it.beta.size() == 4);
  }
  std::ostringstream out;
  write_diagnostics_csv(out, diag);
  const std::string header = out.str().substr(0, out.str().find('\n'));
  CHECK(header ==
        "iteration,occupied_household,occupied_individual,alpha,beta_1,beta_2,beta_3,beta_4,pi_1,pi_2,pi_3,pi_4");
}

TEST_CASE("occupancy: counts distinct classes in the latent state") {
  const Dataset d = small_data();
  ChainState state;
  state.params = fixtures::random_params(d.schema, 4, 3, 2);
  state.latent.G = {0, 2, 2, 0};
  state.latent.M = {{0, 1}, {1}, {0, 2, 1}, {0, 0}};
  const auto o = occupancy(d, state);
  CHECK(o.occupied_household == 2);
  CHECK(o.occupied_individual == 3);  // class 2 uses m = 0, 1, 2
}

TEST_CASE("alpha update: uses the recorded complement of a stick that rounded to 1") {
  const Dataset d = small_data();
  Params params = fixtures::random_params(d.schema, 2, 2, 9);
  params.u = {1.0, 1.0};
  params.log1m_u = {-40.0, -std::numeric_limits<double>::infinity()};
  const Hyperparams hyper = uniform_prior(d.schema, 2, 2);
  const int n = 40000;
  double exact = 0.0, floored = 0.0;
  for (int t = 0; t < n; ++t) {
    Params p = params;
    const SweepContext ctx{13, static_cast<std::size_t>(t), 1};
    sample_alpha(hyper, p, ctx);
    exact += p.alpha;
    p.log1m_u.clear();
    sample_alpha(hyper, p, ctx);
    floored += p.alpha;
  }
  CHECK(exact / n == doctest::Approx(1.25 / 40.25).epsilon(0.015));
  CHECK(floored / n == doctest::Approx(1.25 / (0.25 - std::log(kStickComplementFloor))).epsilon(0.015));
}
