#pragma once

#include <cstdint>
#include <vector>

#include "ndpmpm/checkpoint.hpp"
#include "ndpmpm/dataset.hpp"

namespace ndpmpm {

enum class SynthesisMode { kUntruncated, kTruncatedByproduct };

struct SyntheticReplicates {
  std::vector<Dataset> replicates;
  std::vector<std::size_t> source_iterations;
  SynthesisMode mode = SynthesisMode::kUntruncated;
};

/// One replicate per checkpoint. Household sizes and the drawn latent classes
/// are kept; every other value is resampled from the class kernels.
SyntheticReplicates synthesize_untruncated(const Dataset& data, const std::vector<Checkpoint>& checkpoints,
                                           std::uint64_t seed, int threads = 1);

/// Feasible households generated by the truncated sampler at one iteration.
struct CapturedByproducts {
  std::size_t iteration = 0;
  Dataset households;
};

/// Each replicate is the by-product set of one captured iteration.
/// Throws InputError when fewer than `L` captures are supplied.
SyntheticReplicates synthesize_truncated(const std::vector<CapturedByproducts>& captures, std::size_t L);

}  // namespace ndpmpm
