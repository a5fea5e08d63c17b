#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ndpmpm/dataset.hpp"
#include "ndpmpm/model.hpp"
#include "ndpmpm/rules.hpp"
#include "ndpmpm/synthesis.hpp"

namespace ndpmpm {

enum class TargetKind { kIndividual, kHousehold };

/// Candidate guesses for one target. Candidates are stored as households; an
/// individual target is a one-member record carrying its household's values.
/// candidates[0] is the truth.
struct TargetSupport {
  TargetKind kind = TargetKind::kIndividual;
  std::vector<HouseholdRecord> candidates;
  std::vector<double> prior;  // sums to 1

  const HouseholdRecord& truth() const { return candidates.front(); }
};

/// Truth plus every record differing from it in exactly one variable. Variables
/// named in `hold_fixed` are never perturbed.
TargetSupport build_support_individual(const HouseholdRecord& household, std::size_t member, const Schema& schema,
                                       const std::vector<std::string>& hold_fixed = {});

/// Truth plus every record differing in one non-size household variable or in
/// one individual variable of one member. With rules, infeasible candidates are
/// dropped.
TargetSupport build_support_household(const HouseholdRecord& household, const Schema& schema,
                                      const RuleSet* rules = nullptr,
                                      const std::vector<std::string>& hold_fixed = {});

/// log P(Z | params): sum of household log-likelihoods.
double replicate_log_likelihood(const Dataset& Z, const Params& params);
double replicate_log_likelihood(const Dataset& Z, const LogTables& tables);

/// Self-normalized importance weights, weights[c][r] for candidate c and draw r.
/// Each row sums to 1. Throws ComputeError naming the candidate when all of its
/// likelihood ratios underflow.
std::vector<std::vector<double>> importance_weights(const TargetSupport& support,
                                                    const std::vector<LogTables>& draws);

struct RiskResult {
  std::vector<double> rho;         // posterior probability per candidate
  std::vector<double> log_score;   // unnormalized log scores
  std::size_t rank_of_truth = 1;   // 1 = highest; ties go to the earlier candidate
  double top_probability = 0.0;
};

/// Posterior over candidates given replicate log-likelihoods log_p[l][r] and
/// parameter draws. Scores sum_r p_r q_r(t) are formed per replicate, combined
/// across replicates in log space and multiplied by the prior.
RiskResult importance_posterior(const std::vector<std::vector<double>>& log_p, const TargetSupport& support,
                                const std::vector<LogTables>& draws);

/// Convenience overload computing log_p from the replicates.
RiskResult importance_posterior(const std::vector<Dataset>& Z, const TargetSupport& support,
                                const std::vector<Params>& draws);

/// Rank of candidate 0 under `rho`.
std::size_t rank_of_first(const std::vector<double>& rho);

struct RiskConfig {
  TargetKind kind = TargetKind::kIndividual;
  std::vector<std::string> hold_fixed;
  std::size_t max_targets = 0;  // 0 = every unique target
  int threads = 1;
};

struct TargetRow {
  std::string target_id;
  std::size_t n_candidates = 0;
  std::size_t rank_of_truth = 0;
  double rho_truth = 0.0;
  double rho_max = 0.0;
};

struct RiskSummary {
  std::vector<TargetRow> rows;                 // one per original unit evaluated
  std::map<std::size_t, std::size_t> rank_histogram;
  std::size_t unique_targets = 0;
  std::size_t rank_at_most_3 = 0;
  double max_rho_truth = 0.0;
};

/// Risk for every target unit. Identical targets are computed once and the
/// result is reused.
RiskSummary risk_sweep(const Dataset& data, const SyntheticReplicates& Z, const std::vector<Params>& draws,
                       const RiskConfig& config, const RuleSet* rules = nullptr);

void write_risk_summary_csv(std::ostream& out, const RiskSummary& summary);
void write_rank_histogram_csv(std::ostream& out, const RiskSummary& summary);

}  // namespace ndpmpm
