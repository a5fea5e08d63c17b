#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ndpmpm/gibbs.hpp"
#include "ndpmpm/model.hpp"
#include "ndpmpm/risk.hpp"

namespace ndpmpm::cli {

/// Everything a pipeline run needs. Paths in the document are resolved
/// against the directory holding it; missing schema/data/population paths
/// default to the files `simulate` writes under the output directory.
struct RunConfig {
  std::filesystem::path config_dir;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> schema_path;
  std::optional<std::filesystem::path> data_path;
  std::optional<std::filesystem::path> rules_path;
  std::optional<std::filesystem::path> population_path;
  std::uint64_t seed = 0;
  int threads = 1;

  int F = 10;
  int S = 10;
  double a_alpha = 0.25, b_alpha = 0.25, a_beta = 0.25, b_beta = 0.25;
  std::string prior = "empirical";
  BetaMode beta_mode = BetaMode::kCommon;

  std::size_t iterations = 1000;
  std::size_t burn_in = 500;
  std::size_t thin = 1;
  std::size_t augment_cap_factor = 1000;

  std::size_t L = 5;
  double gamma = 0.95;

  int max_order = 2;
  double threshold = 10.0;
  bool builtin_queries = true;
  std::vector<std::string> query_documents;  // JSON text of extra household queries

  std::size_t R = 50;
  std::vector<std::string> risk_modes{"individual"};
  std::vector<std::string> hold_fixed;
  std::size_t max_targets = 0;

  std::optional<std::string> simulate_document;  // toy population config
  std::size_t sample_size = 0;

  std::filesystem::path schema_file() const;
  std::filesystem::path data_file() const;
  std::optional<std::filesystem::path> population_file() const;
  std::vector<std::size_t> capture_iterations() const;
};

/// Parses the config document. `seed` is required either in the document or
/// as an override.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& config_dir,
                           const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed_override,
                           std::optional<int> threads_override);
RunConfig load_run_config(const std::filesystem::path& path, const std::filesystem::path& out_dir,
                          std::optional<std::uint64_t> seed_override, std::optional<int> threads_override);

void cmd_fit(const RunConfig& config);
void cmd_synthesize(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);
void cmd_risk(const RunConfig& config);
void cmd_simulate(const RunConfig& config);

/// Command-line entry point; returns the process exit status
/// (0 success, 1 usage error, 2 runtime error).
int run_cli(int argc, char** argv);

}  // namespace ndpmpm::cli
