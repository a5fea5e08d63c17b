#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ndpmpm/checkpoint.hpp"
#include "ndpmpm/model.hpp"

namespace ndpmpm {

class RuleSet;
struct AugmentedBatch;

struct ChainConfig {
  std::size_t iterations = 1000;
  std::size_t burn_in = 500;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Truncated sampler only: cap on generated households per iteration, as a
  /// multiple of the number of observed households.
  std::size_t augment_cap_factor = 1000;
  /// Truncated sampler only: iterations whose feasible by-products are handed
  /// to the capture callback.
  std::vector<std::size_t> capture_iterations;
  /// Store G and M in checkpoints (needed for untruncated synthesis).
  bool save_latent = true;

  void validate() const;
};

/// Identifies the random substreams of one sweep.
struct SweepContext {
  std::uint64_t seed = 0;
  std::size_t iteration = 0;
  int threads = 1;

  Rng stream(Stream stage, std::uint64_t index = 0) const {
    return Rng::derive(seed, {static_cast<std::uint64_t>(iteration), tag(stage), index});
  }
};

struct ChainState {
  Params params;
  LatentState latent;
  std::size_t iteration = 0;
};

/// Sufficient statistics of the latent assignments.
class ClassCounts {
 public:
  ClassCounts(const Params& shape);

  void add(const HouseholdRecord& record, int G, const std::vector<int>& M);

  int F() const { return F_; }
  int S() const { return S_; }
  double households(int g) const { return households_[g]; }
  double individuals(int g, int m) const { return individuals_[g * S_ + m]; }
  const std::vector<double>& lambda_counts(std::size_t k) const { return lambda_[k]; }
  const std::vector<double>& phi_counts(std::size_t k) const { return phi_[k]; }

 private:
  int F_, S_;
  std::vector<int> hh_card_, ind_card_;
  std::vector<double> households_, individuals_;
  std::vector<std::vector<double>> lambda_, phi_;
};

ClassCounts tally(const Dataset& data, const LatentState& latent, const Params& shape);

/// Random initial state: parameters from the prior, classes uniform.
ChainState initial_state(const Dataset& data, const Hyperparams& hyper, std::uint64_t seed);

// Full conditionals, in sweep order.
void sample_G(const Dataset& data, ChainState& state, const SweepContext& ctx);
void sample_M(const Dataset& data, ChainState& state, const SweepContext& ctx);
void sample_household_sticks(const ClassCounts& counts, Params& params, const SweepContext& ctx);
void sample_individual_sticks(const ClassCounts& counts, Params& params, const SweepContext& ctx);
void sample_lambda(const ClassCounts& counts, const Hyperparams& hyper, Params& params, const SweepContext& ctx);
void sample_phi(const ClassCounts& counts, const Hyperparams& hyper, Params& params, const SweepContext& ctx);
void sample_alpha(const Hyperparams& hyper, Params& params, const SweepContext& ctx);
void sample_beta(const Hyperparams& hyper, Params& params, const SweepContext& ctx);

/// Parameter updates given counts: sticks, kernels, concentrations.
void sample_parameters(const ClassCounts& counts, const Hyperparams& hyper, Params& params, const SweepContext& ctx);

/// One untruncated sweep: G, M, u/pi, v/omega, lambda, phi, alpha, beta.
void gibbs_sweep(const Dataset& data, const Hyperparams& hyper, ChainState& state, int threads, std::uint64_t seed);

struct IterationDiagnostics {
  std::size_t iteration = 0;
  int occupied_household = 0;
  /// Largest number of occupied individual classes within any household class.
  int occupied_individual = 0;
  double alpha = 0.0;
  std::vector<double> beta;
  std::vector<double> pi;
  std::map<int, std::size_t> augmented;  // n_0h per stratum (truncated sampler)
  bool cap_exceeded = false;
};

struct Diagnostics {
  std::vector<IterationDiagnostics> iterations;
  std::vector<std::string> warnings;
  std::size_t cap_exceeded_count = 0;
};

IterationDiagnostics occupancy(const Dataset& data, const ChainState& state);
void write_diagnostics_csv(std::ostream& out, const Diagnostics& diagnostics);

using CheckpointSink = std::function<void(const Checkpoint&)>;
using CaptureSink = std::function<void(std::size_t iteration, const AugmentedBatch&)>;

/// Runs the sampler. Uses the truncated sampler when `rules` is non-null and
/// non-empty. Post-burn-in draws at iterations burn_in + thin, burn_in + 2*thin,
/// ... are passed to `sink`.
Diagnostics run_chain(const Dataset& data, const Hyperparams& hyper, const ChainConfig& config, const RuleSet* rules,
                      const CheckpointSink& sink, const CaptureSink& capture = {});

/// Floor on 1 - stick for parameters that carry no recorded complement.
inline constexpr double kStickComplementFloor = 1e-300;

}  // namespace ndpmpm
