#include "commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "ndpmpm/checkpoint.hpp"
#include "ndpmpm/dataset.hpp"
#include "ndpmpm/error.hpp"
#include "ndpmpm/inference.hpp"
#include "ndpmpm/rules.hpp"
#include "ndpmpm/simulate.hpp"
#include "ndpmpm/synthesis.hpp"
#include "ndpmpm/truncated.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ndpmpm::cli {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw InputError(what + " not found: " + path.string());
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw InputError("unknown key '" + key + "' in " + section);
}

std::uint64_t substream_seed(std::uint64_t seed, Stream stream) {
  return Rng::derive(seed, {tag(stream)}).next_u64();
}

fs::path synthetic_file(const RunConfig& c, std::size_t l) {
  return c.out_dir / ("synthetic_" + std::to_string(l + 1) + ".csv");
}

fs::path byproduct_file(const RunConfig& c, std::size_t iteration) {
  return c.out_dir / "byproducts" / ("iteration_" + std::to_string(iteration) + ".csv");
}

Dataset load_input(const RunConfig& c) {
  require_file(c.schema_file(), "schema file");
  require_file(c.data_file(), "data file");
  return load_dataset(c.data_file().string(), load_schema(c.schema_file().string()));
}

std::optional<RuleSet> load_rule_set(const RunConfig& c, const Schema& schema) {
  if (!c.rules_path) return std::nullopt;
  require_file(*c.rules_path, "rules file");
  return load_rules(c.rules_path->string(), schema);
}

SyntheticReplicates load_replicates(const RunConfig& c, const Schema& schema) {
  const fs::path manifest_path = c.out_dir / "manifest.json";
  require_file(manifest_path, "synthesis manifest (run `synthesize` first)");
  const json manifest = json::parse(read_file(manifest_path));
  SyntheticReplicates out;
  out.mode = manifest.at("mode").get<std::string>() == "untruncated" ? SynthesisMode::kUntruncated
                                                                       : SynthesisMode::kTruncatedByproduct;
  for (const auto& f : manifest.at("files")) {
    const fs::path path = c.out_dir / f.get<std::string>();
    require_file(path, "synthetic replicate");
    out.replicates.push_back(load_dataset(path.string(), schema));
  }
  out.source_iterations = manifest.at("source_iterations").get<std::vector<std::size_t>>();
  return out;
}

std::vector<Checkpoint> load_fit(const RunConfig& c) {
  const fs::path path = c.out_dir / "checkpoints.jsonl";
  require_file(path, "checkpoint file (run `fit` first)");
  return load_checkpoints(path.string());
}

}  // namespace

fs::path RunConfig::schema_file() const { return schema_path ? *schema_path : out_dir / "schema.json"; }
fs::path RunConfig::data_file() const { return data_path ? *data_path : out_dir / "sample.csv"; }

std::optional<fs::path> RunConfig::population_file() const {
  if (population_path) return population_path;
  if (fs::exists(out_dir / "population.csv")) return out_dir / "population.csv";
  return std::nullopt;
}

std::vector<std::size_t> RunConfig::capture_iterations() const {
  std::vector<std::size_t> out;
  for (std::size_t l = 1; l <= L; ++l) out.push_back(burn_in + l * (iterations - burn_in) / L);
  return out;
}

RunConfig parse_run_config(const std::string& json_text, const fs::path& config_dir, const fs::path& out_dir,
                           std::optional<std::uint64_t> seed_override, std::optional<int> threads_override) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  c.config_dir = config_dir;
  c.out_dir = out_dir;
  auto path = [&](const json& j) { return fs::path(config_dir) / j.get<std::string>(); };
  try {
    check_keys(doc, {"seed", "threads", "schema", "data", "rules", "population", "model", "chain", "synthesis",
                     "evaluate", "risk", "simulate"},
               "config");
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    else if (!seed_override) throw InputError("config must set 'seed' (or pass --seed)");
    if (seed_override) c.seed = *seed_override;
    c.threads = threads_override.value_or(doc.value("threads", 1));
    if (c.threads < 1) throw InputError("threads must be at least 1");
    if (doc.contains("schema")) c.schema_path = path(doc["schema"]);
    if (doc.contains("data")) c.data_path = path(doc["data"]);
    if (doc.contains("rules")) c.rules_path = path(doc["rules"]);
    if (doc.contains("population")) c.population_path = path(doc["population"]);

    if (doc.contains("model")) {
      const auto& m = doc["model"];
      check_keys(m, {"F", "S", "a_alpha", "b_alpha", "a_beta", "b_beta", "prior", "beta_mode"}, "model");
      c.F = m.value("F", c.F);
      c.S = m.value("S", c.S);
      c.a_alpha = m.value("a_alpha", c.a_alpha);
      c.b_alpha = m.value("b_alpha", c.b_alpha);
      c.a_beta = m.value("a_beta", c.a_beta);
      c.b_beta = m.value("b_beta", c.b_beta);
      c.prior = m.value("prior", c.prior);
      if (c.prior != "empirical" && c.prior != "uniform") throw InputError("model.prior must be empirical or uniform");
      const std::string mode = m.value("beta_mode", std::string("common"));
      if (mode == "common") c.beta_mode = BetaMode::kCommon;
      else if (mode == "per_class") c.beta_mode = BetaMode::kPerClass;
      else throw InputError("model.beta_mode must be common or per_class");
    }
    if (doc.contains("chain")) {
      const auto& m = doc["chain"];
      check_keys(m, {"iterations", "burn_in", "thin", "augment_cap_factor"}, "chain");
      c.iterations = m.value("iterations", c.iterations);
      c.burn_in = m.value("burn_in", c.burn_in);
      c.thin = m.value("thin", c.thin);
      c.augment_cap_factor = m.value("augment_cap_factor", c.augment_cap_factor);
    }
    if (doc.contains("synthesis")) {
      const auto& m = doc["synthesis"];
      check_keys(m, {"L", "gamma"}, "synthesis");
      c.L = m.value("L", c.L);
      c.gamma = m.value("gamma", c.gamma);
    }
    if (doc.contains("evaluate")) {
      const auto& m = doc["evaluate"];
      check_keys(m, {"max_order", "threshold", "builtin_queries", "queries"}, "evaluate");
      c.max_order = m.value("max_order", c.max_order);
      c.threshold = m.value("threshold", c.threshold);
      c.builtin_queries = m.value("builtin_queries", c.builtin_queries);
      if (m.contains("queries"))
        for (const auto& q : m["queries"]) c.query_documents.push_back(q.dump());
    }
    if (doc.contains("risk")) {
      const auto& m = doc["risk"];
      check_keys(m, {"R", "modes", "hold_fixed", "max_targets"}, "risk");
      c.R = m.value("R", c.R);
      if (m.contains("modes")) c.risk_modes = m["modes"].get<std::vector<std::string>>();
      for (const auto& mode : c.risk_modes)
        if (mode != "individual" && mode != "household") throw InputError("risk.modes entries must be individual or household");
      if (m.contains("hold_fixed")) c.hold_fixed = m["hold_fixed"].get<std::vector<std::string>>();
      c.max_targets = m.value("max_targets", c.max_targets);
    }
    if (doc.contains("simulate")) {
      const auto& m = doc["simulate"];
      check_keys(m, {"population", "sample_size"}, "simulate");
      c.simulate_document = m.at("population").dump();
      c.sample_size = m.at("sample_size").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (c.iterations == 0 || c.burn_in >= c.iterations) throw InputError("chain.burn_in must be below chain.iterations");
  if (c.L == 0) throw InputError("synthesis.L must be at least 1");
  return c;
}

RunConfig load_run_config(const fs::path& path, const fs::path& out_dir, std::optional<std::uint64_t> seed_override,
                          std::optional<int> threads_override) {
  require_file(path, "config file");
  return parse_run_config(read_file(path), path.parent_path(), out_dir, seed_override, threads_override);
}

void cmd_fit(const RunConfig& c) {
  const Dataset data = load_input(c);
  const auto rules = load_rule_set(c, data.schema);
  Hyperparams hyper = c.prior == "empirical" ? empirical_prior(data, c.F, c.S) : uniform_prior(data.schema, c.F, c.S);
  hyper.a_alpha = c.a_alpha;
  hyper.b_alpha = c.b_alpha;
  hyper.a_beta = c.a_beta;
  hyper.b_beta = c.b_beta;
  hyper.beta_mode = c.beta_mode;

  ChainConfig chain;
  chain.iterations = c.iterations;
  chain.burn_in = c.burn_in;
  chain.thin = c.thin;
  chain.seed = c.seed;
  chain.threads = c.threads;
  chain.augment_cap_factor = c.augment_cap_factor;
  const bool truncated = rules && !rules->rules().empty();
  if (truncated) chain.capture_iterations = c.capture_iterations();
  chain.save_latent = !truncated;

  auto checkpoints = open_output(c.out_dir / "checkpoints.jsonl");
  std::size_t written = 0;
  const Diagnostics diagnostics = run_chain(
      data, hyper, chain, rules ? &*rules : nullptr,
      [&](const Checkpoint& cp) {
        write_checkpoint(checkpoints, cp);
        ++written;
      },
      [&](std::size_t iteration, const AugmentedBatch& batch) {
        auto out = open_output(byproduct_file(c, iteration));
        write_dataset(out, byproduct_dataset(batch, data.schema));
      });
  auto diag = open_output(c.out_dir / "diagnostics.csv");
  write_diagnostics_csv(diag, diagnostics);
  for (const auto& w : diagnostics.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "fit: " << c.iterations << " iterations, " << written << " checkpoints"
            << (truncated ? " (truncated sampler)" : "") << '\n';
}

void cmd_synthesize(const RunConfig& c) {
  const Dataset data = load_input(c);
  const auto rules = load_rule_set(c, data.schema);
  SyntheticReplicates synthetic;
  if (rules && !rules->rules().empty()) {
    std::vector<CapturedByproducts> captures;
    for (const auto t : c.capture_iterations()) {
      const fs::path path = byproduct_file(c, t);
      require_file(path, "captured by-products (run `fit` first)");
      captures.push_back({t, load_dataset(path.string(), data.schema)});
    }
    synthetic = synthesize_truncated(captures, c.L);
  } else {
    const auto checkpoints = load_fit(c);
    if (checkpoints.size() < c.L)
      throw InputError("need " + std::to_string(c.L) + " checkpoints but only " +
                       std::to_string(checkpoints.size()) + " were saved");
    std::vector<Checkpoint> chosen;
    for (const auto i : evenly_spaced(checkpoints.size(), c.L)) chosen.push_back(checkpoints[i]);
    synthetic = synthesize_untruncated(data, chosen, substream_seed(c.seed, Stream::kSynthesis), c.threads);
  }
  json manifest;
  manifest["mode"] = synthetic.mode == SynthesisMode::kUntruncated ? "untruncated" : "truncated";
  manifest["source_iterations"] = synthetic.source_iterations;
  manifest["files"] = json::array();
  for (std::size_t l = 0; l < synthetic.replicates.size(); ++l) {
    auto out = open_output(synthetic_file(c, l));
    write_dataset(out, synthetic.replicates[l]);
    manifest["files"].push_back(synthetic_file(c, l).filename().string());
  }
  auto out = open_output(c.out_dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  std::cout << "synthesize: " << synthetic.replicates.size() << " replicates\n";
}

void cmd_evaluate(const RunConfig& c) {
  const Dataset data = load_input(c);
  const SyntheticReplicates synthetic = load_replicates(c, data.schema);
  std::optional<Dataset> population;
  if (const auto path = c.population_file()) {
    require_file(*path, "population file");
    population = load_dataset(path->string(), data.schema);
  }
  const Dataset* truth = population ? &*population : nullptr;
  const auto cells = cell_report(data, synthetic, c.max_order, c.threshold, c.gamma, truth);
  auto cells_out = open_output(c.out_dir / "cells.csv");
  write_report_csv(cells_out, cells);

  std::vector<HouseholdQuery> queries;
  if (c.builtin_queries) queries = builtin_household_queries(data.schema);
  for (const auto& doc : c.query_documents) queries.push_back(parse_household_query(doc, data.schema));
  // Drop queries whose size restriction has no households in the original.
  std::vector<HouseholdQuery> usable;
  const auto sizes = size_histogram(data);
  for (auto& q : queries)
    if (!q.size || sizes.count(*q.size)) usable.push_back(std::move(q));
  auto hh_out = open_output(c.out_dir / "households.csv");
  write_report_csv(hh_out, household_report(data, synthetic, usable, c.gamma, truth));
  std::cout << "evaluate: " << cells.size() << " cells, " << usable.size() << " household queries\n";
}

void cmd_risk(const RunConfig& c) {
  const Dataset data = load_input(c);
  const auto rules = load_rule_set(c, data.schema);
  const SyntheticReplicates synthetic = load_replicates(c, data.schema);
  const auto checkpoints = load_fit(c);
  if (c.R == 0 || checkpoints.size() < c.R)
    throw InputError("risk.R = " + std::to_string(c.R) + " but " + std::to_string(checkpoints.size()) +
                     " checkpoints were saved");
  std::vector<Params> draws;
  for (const auto i : evenly_spaced(checkpoints.size(), c.R)) draws.push_back(checkpoints[i].params);
  for (const auto& mode : c.risk_modes) {
    RiskConfig rc;
    rc.kind = mode == "individual" ? TargetKind::kIndividual : TargetKind::kHousehold;
    rc.hold_fixed = c.hold_fixed;
    rc.max_targets = c.max_targets;
    rc.threads = c.threads;
    const RiskSummary summary = risk_sweep(data, synthetic, draws, rc, rules ? &*rules : nullptr);
    auto out = open_output(c.out_dir / ("risk_" + mode + ".csv"));
    write_risk_summary_csv(out, summary);
    auto hist = open_output(c.out_dir / ("risk_" + mode + "_ranks.csv"));
    write_rank_histogram_csv(hist, summary);
    std::cout << "risk (" << mode << "): " << summary.rows.size() << " targets, " << summary.unique_targets
              << " unique after deduplication, " << summary.rank_at_most_3 << " ranked in the top 3, max rho "
              << summary.max_rho_truth << '\n';
  }
}

void cmd_simulate(const RunConfig& c) {
  if (!c.simulate_document) throw InputError("config has no 'simulate' section");
  const ToyPopulationConfig toy = parse_toy_config(*c.simulate_document);
  const Dataset population = simulate_toy_population(toy, substream_seed(c.seed, Stream::kSimulate));
  const Dataset sample = simple_random_sample(population, c.sample_size, substream_seed(c.seed, Stream::kSample));
  auto schema_out = open_output(c.out_dir / "schema.json");
  schema_out << schema_to_json(population.schema) << '\n';
  auto pop_out = open_output(c.out_dir / "population.csv");
  write_dataset(pop_out, population);
  auto sample_out = open_output(c.out_dir / "sample.csv");
  write_dataset(sample_out, sample);
  std::cout << "simulate: " << population.num_households() << " households, sample of " << sample.num_households()
            << '\n';
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Nested latent class model for household data: fit, synthesize, evaluate, assess risk"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::size_t> iterations, burn_in, L, R;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed (overrides the config)");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler and write checkpoints");
  common(fit);
  fit->add_option("--iterations", iterations, "Override chain.iterations");
  fit->add_option("--burn-in", burn_in, "Override chain.burn_in");
  auto* synth = app.add_subcommand("synthesize", "Write L synthetic replicates");
  common(synth);
  synth->add_option("--L", L, "Override synthesis.L");
  auto* eval = app.add_subcommand("evaluate", "Utility reports for the synthetic replicates");
  common(eval);
  auto* risk = app.add_subcommand("risk", "Disclosure-risk summaries");
  common(risk);
  risk->add_option("--R", R, "Override risk.R");
  auto* sim = app.add_subcommand("simulate", "Simulate a toy population and draw a sample");
  common(sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig config = load_run_config(config_path, out_dir, seed, threads);
    if (iterations) config.iterations = *iterations;
    if (burn_in) config.burn_in = *burn_in;
    if (L) config.L = *L;
    if (R) config.R = *R;
    if (config.burn_in >= config.iterations) throw InputError("burn-in must be below the number of iterations");
    if (config.L == 0) throw InputError("L must be at least 1");
    fs::create_directories(config.out_dir);
    if (*fit) cmd_fit(config);
    else if (*synth) cmd_synthesize(config);
    else if (*eval) cmd_evaluate(config);
    else if (*risk) cmd_risk(config);
    else cmd_simulate(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace ndpmpm::cli
