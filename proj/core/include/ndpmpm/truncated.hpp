#pragma once

#include <cstddef>
#include <vector>

#include "ndpmpm/error.hpp"
#include "ndpmpm/gibbs.hpp"
#include "ndpmpm/rules.hpp"

namespace ndpmpm {

/// Households generated for one size stratum during the rejection step.
struct AugmentedStratum {
  int h = 0;
  std::size_t n_observed = 0;                    // n_{*h}
  std::vector<GeneratedHousehold> infeasible;    // X^0 with G^0, M^0; size n_{0h}
  std::vector<GeneratedHousehold> feasible;      // the n_{*h} accepted draws
};

struct AugmentedBatch {
  std::vector<AugmentedStratum> strata;

  std::size_t total_infeasible() const;
  std::size_t total_generated() const;
};

/// Raised when rejection sampling exceeds its cap; signals pi_0h near 1.
class AugmentCapExceeded : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

/// For each stratum h, draws households of size h from the untruncated model
/// until n_{*h} feasible ones appear. Candidate c of stratum h always uses the
/// substream (seed, iteration, h, c), so the result does not depend on the
/// thread count. Throws AugmentCapExceeded when more than `cap` households in
/// total would be generated.
AugmentedBatch generate_augmented(const Params& params, const Schema& schema, const RuleSet& rules,
                                  const SizeHistogram& histogram, const SweepContext& ctx, std::size_t cap);

struct TruncatedSweepReport {
  bool cap_exceeded = false;
};

/// One data-augmentation sweep: regenerate X^0 (keeping `batch` if the cap is
/// hit), resample G and M for the observed households, then update all
/// parameters with counts over observed plus augmented households.
TruncatedSweepReport truncated_sweep(const Dataset& data, const Hyperparams& hyper, const RuleSet& rules,
                                     ChainState& state, AugmentedBatch& batch, int threads, std::uint64_t seed,
                                     std::size_t cap);

/// Feasible by-products of a batch as a dataset (strata in increasing size).
Dataset byproduct_dataset(const AugmentedBatch& batch, const Schema& schema);

}  // namespace ndpmpm
