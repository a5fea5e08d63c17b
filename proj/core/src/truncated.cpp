#include "ndpmpm/truncated.hpp"

#include <algorithm>

#include "ndpmpm/parallel.hpp"

namespace ndpmpm {

std::size_t AugmentedBatch::total_infeasible() const {
  std::size_t total = 0;
  for (const auto& s : strata) total += s.infeasible.size();
  return total;
}

std::size_t AugmentedBatch::total_generated() const {
  std::size_t total = 0;
  for (const auto& s : strata) total += s.infeasible.size() + s.feasible.size();
  return total;
}

AugmentedBatch generate_augmented(const Params& params, const Schema& schema, const RuleSet& rules,
                                  const SizeHistogram& histogram, const SweepContext& ctx, std::size_t cap) {
  AugmentedBatch batch;
  std::size_t generated = 0;
  for (const auto& [h, n_observed] : histogram) {
    if (!(size_probability(params, schema, h) > 0.0))
      throw AugmentCapExceeded("augmentation cap exceeded: current parameters give zero probability to size " +
                               std::to_string(h));
    AugmentedStratum stratum;
    stratum.h = h;
    stratum.n_observed = n_observed;
    stratum.feasible.reserve(n_observed);

    // Candidates are generated in fixed-index blocks and scanned in index order.
    std::size_t next = 0;
    std::vector<GeneratedHousehold> block;
    std::vector<char> ok;
    while (stratum.feasible.size() < n_observed) {
      const std::size_t needed = n_observed - stratum.feasible.size();
      const std::size_t block_size = std::max<std::size_t>(needed + needed / 2, 64);
      block.assign(block_size, {});
      ok.assign(block_size, 0);
      parallel_for(block_size, ctx.threads, [&](std::size_t b) {
        Rng rng = ctx.stream(Stream::kAugment, (static_cast<std::uint64_t>(h) << 40) + next + b);
        block[b] = generate_household(params, schema, h, rng);
        ok[b] = rules.feasible(block[b].record);
      });
      for (std::size_t b = 0; b < block_size && stratum.feasible.size() < n_observed; ++b) {
        if (++generated > cap)
          throw AugmentCapExceeded("augmentation cap exceeded: more than " + std::to_string(cap) +
                                   " households generated (size " + std::to_string(h) + " stratum)");
        (ok[b] ? stratum.feasible : stratum.infeasible).push_back(std::move(block[b]));
      }
      next += block_size;
    }
    batch.strata.push_back(std::move(stratum));
  }
  return batch;
}

TruncatedSweepReport truncated_sweep(const Dataset& data, const Hyperparams& hyper, const RuleSet& rules,
                                     ChainState& state, AugmentedBatch& batch, int threads, std::uint64_t seed,
                                     std::size_t cap) {
  ++state.iteration;
  const SweepContext ctx{seed, state.iteration, threads};
  TruncatedSweepReport report;
  try {
    batch = generate_augmented(state.params, data.schema, rules, size_histogram(data), ctx, cap);
  } catch (const AugmentCapExceeded&) {
    report.cap_exceeded = true;
  }

  sample_G(data, state, ctx);
  sample_M(data, state, ctx);

  ClassCounts counts = tally(data, state.latent, state.params);
  for (const auto& stratum : batch.strata)
    for (const auto& x : stratum.infeasible) counts.add(x.record, x.G, x.M);
  sample_parameters(counts, hyper, state.params, ctx);
  return report;
}

Dataset byproduct_dataset(const AugmentedBatch& batch, const Schema& schema) {
  Dataset out;
  out.schema = schema;
  std::size_t id = 0;
  for (const auto& stratum : batch.strata) {
    for (const auto& x : stratum.feasible) {
      HouseholdRecord record = x.record;
      record.household_id = std::to_string(++id);
      out.households.push_back(std::move(record));
    }
  }
  return out;
}

}  // namespace ndpmpm
