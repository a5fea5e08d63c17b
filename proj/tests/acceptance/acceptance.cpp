// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "fixtures.hpp"
#include "ndpmpm/gibbs.hpp"
#include "ndpmpm/inference.hpp"
#include "ndpmpm/model.hpp"
#include "ndpmpm/risk.hpp"
#include "ndpmpm/rules.hpp"
#include "ndpmpm/simulate.hpp"
#include "ndpmpm/truncated.hpp"

using namespace ndpmpm;
using fixtures::make_household;
using fixtures::make_schema;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Moments {
  double mean = 0.0, se = 0.0;
};

Moments iid(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1) / n)};
}

Moments batched(const std::vector<double>& x) {
  const auto b = fixtures::batch_means(x, 50);
  return {b.mean, b.se};
}

// Draw a whole dataset of n households from the untruncated model.
Dataset generate_dataset(const Params& params, const Schema& schema, std::size_t n, Rng& rng) {
  Dataset d;
  d.schema = schema;
  std::vector<double> size_w(schema.max_size());
  for (int h = 1; h <= schema.max_size(); ++h) size_w[h - 1] = size_probability(params, schema, h);
  for (std::size_t i = 0; i < n; ++i) {
    const int h = static_cast<int>(rng.categorical(size_w)) + 1;
    auto g = generate_household(params, schema, h, rng);
    g.record.household_id = std::to_string(i + 1);
    d.households.push_back(std::move(g.record));
  }
  return d;
}

// ---- 1 ----
Outcome simplex_invariants() {
  const Schema s = make_schema(4, {{"a", 3}, {"b", 5}}, {{"c", 2}, {"d", 7}});
  double worst = 0.0;
  Rng rng(101);
  for (int t = 0; t < 10000; ++t) {
    const int F = 1 + static_cast<int>(rng.below(30));
    const int S = 1 + static_cast<int>(rng.below(15));
    Hyperparams hyper = uniform_prior(s, F, S);
    hyper.beta_mode = t % 2 ? BetaMode::kPerClass : BetaMode::kCommon;
    hyper.a_alpha = hyper.a_beta = 0.05 + rng.uniform();
    const Params p = prior_draw(hyper, rng);
    worst = std::max(worst, p.simplex_error());
  }
  return {worst <= 1e-12, fmt("max simplex error %.3e over 10^4 draws", worst)};
}

// ---- 2 ----
Params pair_fixture(bool class_independent_size) {
  Params p;
  p.F = 2;
  p.S = 2;
  p.u = {0.6, 1.0};
  p.pi = {0.6, 0.4};
  p.v = {0.3, 1.0, 0.8, 1.0};
  p.omega = {0.3, 0.7, 0.8, 0.2};
  p.alpha = 1.0;
  p.beta = {1.0};
  p.lambda = {class_independent_size ? std::vector<double>{0.3, 0.7, 0.3, 0.7} : std::vector<double>{0.9, 0.1, 0.2, 0.8},
              {0.25, 0.75, 0.7, 0.3}};
  p.phi = {{0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.05, 0.95}, {0.5, 0.5, 0.1, 0.9, 0.7, 0.3, 0.35, 0.65}};
  return p;
}

Outcome pair_probability_check() {
  const Schema s = make_schema(2, {{"own", 2}}, {{"x", 2}, {"y", 2}});
  const std::size_t n = 1'000'000;
  double worst = 0.0;  // in standard errors
  for (bool independent : {true, false}) {
    const Params p = pair_fixture(independent);
    std::vector<double> counts(2 * 4, 0.0);
    Rng rng(independent ? 202 : 203);
    for (std::size_t t = 0; t < n; ++t) {
      const auto g = generate_household(p, s, 2, rng);
      for (std::size_t k = 0; k < 2; ++k) counts[k * 4 + g.record.members[0][k] * 2 + g.record.members[1][k]] += 1.0;
    }
    for (std::size_t k = 0; k < 2; ++k)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          const double expected =
              independent ? pair_probability(k, c, d, p) : pair_probability_given_size(k, c, d, p, s, 2);
          const double se = std::sqrt(expected * (1 - expected) / static_cast<double>(n));
          worst = std::max(worst, std::abs(counts[k * 4 + c * 2 + d] / static_cast<double>(n) - expected) / se);
        }
  }
  return {worst <= 3.0, fmt("max deviation %.2f MC standard errors over 16 cells, 10^6 households per model", worst)};
}

// ---- 3 ----
Outcome geweke() {
  const Schema s = make_schema(2, {{"h", 2}}, {{"x", 2}});
  const Hyperparams hyper = uniform_prior(s, 3, 3);
  const std::size_t N = 50000, n = 20;
  std::vector<std::vector<double>> a(3), b(3);
  auto record = [](std::vector<std::vector<double>>& out, const Params& p) {
    out[0].push_back(p.pi[0]);
    out[1].push_back(p.alpha);
    out[2].push_back(p.lambda_at(1, 0, 0));
  };
  Rng rng(303);
  for (std::size_t t = 0; t < N; ++t) record(a, prior_draw(hyper, rng));

  ChainState state;
  state.params = prior_draw(hyper, rng);
  Dataset data = generate_dataset(state.params, s, n, rng);
  state.latent.G.assign(n, 0);
  state.latent.M.assign(n, {});
  for (std::size_t t = 0; t < N; ++t) {
    gibbs_sweep(data, hyper, state, 1, 304);
    data = generate_dataset(state.params, s, n, rng);
    record(b, state.params);
  }
  const char* names[] = {"pi_1", "alpha", "lambda_11"};
  bool ok = true;
  std::string detail;
  for (int f = 0; f < 3; ++f) {
    const Moments ma = iid(a[f]), mb = batched(b[f]);
    const double z = (ma.mean - mb.mean) / std::sqrt(ma.se * ma.se + mb.se * mb.se);
    ok &= std::abs(z) <= 4.0;
    detail += fmt("%s %.4f vs %.4f (z=%.2f)%s", names[f], ma.mean, mb.mean, z, f < 2 ? "; " : "");
  }
  return {ok, detail};
}

// ---- 4 ----
Outcome rejection_count_law() {
  Schema s = make_schema(2, {}, {{"x", 2}});
  const RuleSet rules = compile_rules("exactly_one x = 1", s);
  Params p = fixtures::random_params(s, 2, 2, 404);
  for (double& v : p.phi[0]) v = 0.5;
  const double pi0 = infeasible_mass_exact(p, s, 2, rules).value;
  const auto e = enumerate_feasible(s, rules, 2);
  const SizeHistogram hist{{2, 100}};
  const std::size_t T = 2000;
  std::vector<double> n0;
  for (std::size_t t = 1; t <= T; ++t)
    n0.push_back(static_cast<double>(generate_augmented(p, s, rules, hist, {405, t, 1}, 1'000'000).total_infeasible()));
  const double mean = std::accumulate(n0.begin(), n0.end(), 0.0) / T;
  double ss = 0.0;
  for (double v : n0) ss += (v - mean) * (v - mean);
  const double var = ss / (T - 1);
  const bool ok = std::abs(pi0 - 0.5) <= 1e-12 && e.feasible * 2 == e.total && std::abs(mean - 100.0) <= 5.0 &&
                  std::abs(var - 200.0) <= 30.0;
  return {ok, fmt("pi_0h %.6f (%llu of %llu cells feasible); mean n_0h %.2f, variance %.1f", pi0,
                  static_cast<unsigned long long>(e.feasible), static_cast<unsigned long long>(e.total), mean, var)};
}

// ---- 5 ----
Outcome truncated_equivalence() {
  const Schema s = make_schema(2, {{"own", 2}}, {{"x", 2}});
  const RuleSet rules = compile_rules("forbid own = 1, x = 1", s);
  // cells (own, x): (1,2) x 20, (2,1) x 10, (2,2) x 10; (1,1) forbidden
  Dataset d;
  d.schema = s;
  auto add = [&](int own, int x, int count) {
    for (int i = 0; i < count; ++i)
      d.households.push_back(make_household(std::to_string(d.households.size() + 1), {own}, {{x}}));
  };
  add(0, 1, 20);
  add(1, 0, 10);
  add(1, 1, 10);

  // a = Pr(own = 1), b = Pr(x = 1); truncated posterior under uniform priors
  const int G = 2001;
  double z = 0.0, ma = 0.0, mb = 0.0;
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j) {
      const double a = i / double(G - 1), b = j / double(G - 1);
      const double wa = (i == 0 || i == G - 1) ? 0.5 : 1.0, wb = (j == 0 || j == G - 1) ? 0.5 : 1.0;
      const double denom = 1.0 - a * b;
      if (denom <= 0.0) continue;
      const double logf = 20 * std::log(a) + 20 * std::log1p(-a) + 10 * std::log(b) + 30 * std::log1p(-b) -
                          40 * std::log(denom);
      if (!std::isfinite(logf)) continue;
      const double w = wa * wb * std::exp(logf + 40.0);
      z += w;
      ma += w * a;
      mb += w * b;
    }
  ma /= z;
  mb /= z;

  ChainConfig config;
  config.iterations = 30000;
  config.burn_in = 2000;
  config.thin = 1;
  config.seed = 505;
  config.save_latent = false;
  double sa = 0.0, sb = 0.0, count = 0.0;
  run_chain(d, uniform_prior(s, 1, 1), config, &rules, [&](const Checkpoint& c) {
    sa += c.params.lambda_at(1, 0, 0);
    sb += c.params.phi_at(0, 0, 0, 0);
    count += 1.0;
  });
  sa /= count;
  sb /= count;
  const bool ok = std::abs(sa - ma) <= 0.01 && std::abs(sb - mb) <= 0.01;
  return {ok, fmt("Pr(own=1): sampler %.4f grid %.4f; Pr(x=1): sampler %.4f grid %.4f", sa, ma, sb, mb)};
}

// ---- 6 ----
Outcome combining_rules() {
  const std::vector<Estimate> e{{1, 1}, {2, 1}, {3, 1}};
  const CombinedEstimate c = combine(e);
  const bool ok = c.q_bar == 2.0 && c.u_bar == 1.0 && c.b_L == 1.0 && c.T_L == 4.0 / 3.0 && c.nu_df == 32.0;
  return {ok, fmt("q_bar %.17g u_bar %.17g b %.17g T %.17g nu %.17g", c.q_bar, c.u_bar, c.b_L, c.T_L, c.nu_df)};
}

// ---- 7 and 9 share the toy pipeline ----
int run_tool(const std::string& args) {
  const std::string cmd = std::string(NDPMPM_TOOL) + " " + args + " >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const fs::path kToyConfig = fs::path(NDPMPM_SOURCE_DIR) / "configs" / "toy" / "toy.json";
const std::vector<std::string> kSteps{"simulate", "fit", "synthesize", "evaluate", "risk"};

bool toy_pipeline(const fs::path& out) {
  fs::remove_all(out);
  for (const auto& step : kSteps)
    if (run_tool(step + " --config " + kToyConfig.string() + " --out " + out.string()) != 0) return false;
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / ("ndpmpm_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

Outcome toy_utility(const fs::path& out, bool ran) {
  if (!ran) return {false, "toy pipeline failed"};
  const auto config = cli::load_run_config(kToyConfig, out, std::nullopt, std::nullopt);
  const ToyPopulationConfig pop = parse_toy_config(config.simulate_document.value());
  const double truth = toy_all_same_probability(pop, 2);
  double baseline = 0.0;
  for (const auto& v : pop.individual_vars)
    if (v.name == pop.copy_variable)
      for (double p : v.probabilities) baseline += p * p;
  // households.csv: query,Q_truth,q_orig,lo_orig,hi_orig,q_syn,lo_syn,hi_syn
  std::istringstream in(slurp(out / "households.csv"));
  std::string line;
  double synthetic = std::nan("");
  while (std::getline(in, line)) {
    if (line.rfind("all_same_race_2,", 0) != 0) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    if (cols.size() == 8) synthetic = std::stod(cols[5]);
  }
  const bool ok = std::abs(synthetic - truth) <= 0.05 && std::abs(synthetic - truth) < std::abs(baseline - truth);
  return {ok, fmt("synthetic %.4f, truth %.4f, independence baseline %.4f", synthetic, truth, baseline)};
}

Outcome toy_determinism(const fs::path& first, bool ran_first, const fs::path& second) {
  if (!ran_first || !toy_pipeline(second)) return {false, "toy pipeline failed"};
  std::size_t files = 0, differing = 0;
  std::string which;
  for (const auto& entry : fs::recursive_directory_iterator(first)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), first);
    ++files;
    if (!fs::exists(second / rel) || slurp(entry.path()) != slurp(second / rel)) {
      ++differing;
      which += " " + rel.string();
    }
  }
  std::size_t second_files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(second)) second_files += entry.is_regular_file();
  return {differing == 0 && files == second_files && files > 0,
          fmt("%zu files compared, %zu differ%s", files, differing, which.c_str())};
}

// ---- 8 ----
Outcome risk_machinery() {
  // (a), (b) on a multi-class fixture
  const Schema s = make_schema(3, {{"own", 2}}, {{"x", 3}, {"y", 2}});
  std::vector<Params> params;
  for (std::uint64_t r = 0; r < 25; ++r) params.push_back(fixtures::random_params(s, 4, 3, 800 + r));
  const std::vector<LogTables> tables(params.begin(), params.end());
  const auto support = build_support_household(make_household("t", {1}, {{0, 1}, {2, 0}, {1, 1}}), s);
  const auto w = importance_weights(support, tables);
  double worst_sum = 0.0;
  bool exact = true;
  for (const auto& row : w) worst_sum = std::max(worst_sum, std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1));
  for (double x : w[0]) exact &= x == 1.0 / 25.0;

  // (c) two candidates, one class, size held fixed
  const Schema t = make_schema(2, {}, {{"x", 2}});
  Dataset d;
  d.schema = t;
  const int d1 = 3, n = 8;  // x = 1 (code 0) for the first d1 households; target is household 1
  for (int i = 0; i < n; ++i) d.households.push_back(make_household(std::to_string(i + 1), {}, {{i < d1 ? 0 : 1}}));
  std::vector<Dataset> Z;
  for (int z1 : {22, 27, 25}) {
    Dataset r;
    r.schema = t;
    for (int i = 0; i < 40; ++i) r.households.push_back(make_household(std::to_string(i + 1), {}, {{i < z1 ? 0 : 1}}));
    Z.push_back(std::move(r));
  }
  ChainConfig config;
  config.iterations = 21000;
  config.burn_in = 1000;
  config.thin = 10;
  config.seed = 808;
  std::vector<Params> draws;
  run_chain(d, uniform_prior(t, 1, 1), config, nullptr, [&](const Checkpoint& c) { draws.push_back(c.params); });
  const auto target = build_support_individual(d.households[0], 0, t, {"size"});
  const RiskResult result = importance_posterior(Z, target, draws);

  // grid oracle: rho(t) proportional to prod_l integral Pr(Z_l | p) post_t(p) dp, p = Pr(x = 1)
  const int G = 2001;
  std::vector<double> log_score(2, 0.0);
  for (int c = 0; c < 2; ++c) {
    const int ones = c == 0 ? d1 : d1 - 1;
    std::vector<double> logpost(G), grid(G);
    for (int i = 0; i < G; ++i) {
      grid[i] = (i + 0.5) / G;
      logpost[i] = ones * std::log(grid[i]) + (n - ones) * std::log1p(-grid[i]);
    }
    const double lz = log_sum_exp(logpost);
    for (const auto& r : Z) {
      int z1 = 0;
      for (const auto& h : r.households) z1 += h.members[0][0] == 0;
      std::vector<double> terms(G);
      for (int i = 0; i < G; ++i)
        terms[i] = logpost[i] - lz + z1 * std::log(grid[i]) + (40 - z1) * std::log1p(-grid[i]);
      log_score[c] += log_sum_exp(terms);
    }
  }
  const double rho_truth = 1.0 / (1.0 + std::exp(log_score[1] - log_score[0]));
  const bool ok = worst_sum <= 1e-12 && exact && std::abs(result.rho[0] - rho_truth) <= 0.02;
  return {ok, fmt("max |sum q_r - 1| %.2e; truth weights exactly 1/R: %s; rho(truth) %.4f vs grid %.4f", worst_sum,
                  exact ? "yes" : "no", result.rho[0], rho_truth)};
}

}  // namespace

int main() {
  const fs::path dir = scratch();
  const fs::path first = dir / "toy_a", second = dir / "toy_b";
  bool toy_ran = false;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"stick-breaking and simplex invariants", simplex_invariants},
      {"pair probability against generated households", pair_probability_check},
      {"Geweke test of the Gibbs sampler", geweke},
      {"rejection-count law", rejection_count_law},
      {"truncated sampler matches the truncated posterior", truncated_equivalence},
      {"combining rules fixture", combining_rules},
      {"toy utility: all same race, size 2",
       [&] {
         toy_ran = toy_pipeline(first);
         return toy_utility(first, toy_ran);
       }},
      {"risk machinery", risk_machinery},
      {"toy pipeline determinism", [&] { return toy_determinism(first, toy_ran, second); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("criterion %zu: %s  %s  [%s] (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  fs::remove_all(dir);
  return failures == 0 ? 0 : 1;
}
