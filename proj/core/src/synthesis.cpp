#include "ndpmpm/synthesis.hpp"

#include "ndpmpm/error.hpp"
#include "ndpmpm/parallel.hpp"

namespace ndpmpm {

namespace {

Dataset synthesize_one(const Dataset& data, const Checkpoint& checkpoint, std::uint64_t seed, std::size_t l) {
  const Params& params = checkpoint.params;
  const LatentState& latent = *checkpoint.latent;
  const Schema& schema = data.schema;
  const int S = params.S;
  Dataset out;
  out.schema = schema;
  out.households.reserve(data.households.size());
  for (std::size_t i = 0; i < data.households.size(); ++i) {
    Rng rng = Rng::derive(seed, {tag(Stream::kSynthesis), l, i});
    const auto& source = data.households[i];
    const int g = latent.G[i];
    HouseholdRecord record;
    record.household_id = std::to_string(i + 1);
    record.household_values.resize(schema.q());
    for (std::size_t k = 0; k < schema.q(); ++k) {
      if (k == schema.size_var_index) {
        record.household_values[k] = source.household_values[k];
        continue;
      }
      const int d = params.household_cardinality(k);
      record.household_values[k] =
          static_cast<int>(rng.categorical(std::span<const double>(params.lambda[k]).subspan(g * d, d)));
    }
    record.members.resize(source.size());
    for (std::size_t j = 0; j < source.size(); ++j) {
      const int m = latent.M[i][j];
      auto& person = record.members[j];
      person.resize(schema.p());
      for (std::size_t k = 0; k < schema.p(); ++k) {
        const int d = params.individual_cardinality(k);
        person[k] = static_cast<int>(rng.categorical(std::span<const double>(params.phi[k]).subspan((g * S + m) * d, d)));
      }
    }
    out.households.push_back(std::move(record));
  }
  return out;
}

}  // namespace

SyntheticReplicates synthesize_untruncated(const Dataset& data, const std::vector<Checkpoint>& checkpoints,
                                           std::uint64_t seed, int threads) {
  for (const auto& c : checkpoints) {
    if (!c.latent) throw InputError("checkpoint at iteration " + std::to_string(c.iteration) + " is missing latent state");
    if (c.latent->G.size() != data.households.size())
      throw InputError("checkpoint at iteration " + std::to_string(c.iteration) + " does not match the dataset");
  }
  SyntheticReplicates out;
  out.mode = SynthesisMode::kUntruncated;
  out.replicates.resize(checkpoints.size());
  for (const auto& c : checkpoints) out.source_iterations.push_back(c.iteration);
  parallel_for(checkpoints.size(), threads,
               [&](std::size_t l) { out.replicates[l] = synthesize_one(data, checkpoints[l], seed, l); });
  return out;
}

SyntheticReplicates synthesize_truncated(const std::vector<CapturedByproducts>& captures, std::size_t L) {
  if (captures.size() < L)
    throw InputError("need " + std::to_string(L) + " captured iterations but only " + std::to_string(captures.size()) +
                     " are available");
  SyntheticReplicates out;
  out.mode = SynthesisMode::kTruncatedByproduct;
  for (const auto index : evenly_spaced(captures.size(), L)) {
    out.replicates.push_back(captures[index].households);
    out.source_iterations.push_back(captures[index].iteration);
  }
  return out;
}

}  // namespace ndpmpm
