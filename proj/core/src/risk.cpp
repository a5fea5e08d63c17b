#include "ndpmpm/risk.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "ndpmpm/error.hpp"
#include "ndpmpm/parallel.hpp"

namespace ndpmpm {

namespace {

std::vector<bool> fixed_mask(const std::vector<VariableSpec>& vars, const Schema& schema,
                             const std::vector<std::string>& hold_fixed, Level level) {
  std::vector<bool> mask(vars.size(), false);
  for (const auto& name : hold_fixed) {
    const auto ref = schema.find(name);
    if (!ref) throw InputError("hold_fixed refers to unknown variable '" + name + "'");
    if (ref->level == level) mask[ref->index] = true;
  }
  return mask;
}

void uniform(TargetSupport& s) { s.prior.assign(s.candidates.size(), 1.0 / static_cast<double>(s.candidates.size())); }

std::string candidate_name(std::size_t c) {
  return c == 0 ? std::string("truth") : "candidate " + std::to_string(c);
}

}  // namespace

TargetSupport build_support_individual(const HouseholdRecord& household, std::size_t member, const Schema& schema,
                                       const std::vector<std::string>& hold_fixed) {
  if (member >= household.size()) throw InputError("member index out of range");
  const auto hh_fixed = fixed_mask(schema.household_vars, schema, hold_fixed, Level::kHousehold);
  const auto ind_fixed = fixed_mask(schema.individual_vars, schema, hold_fixed, Level::kIndividual);
  TargetSupport s;
  s.kind = TargetKind::kIndividual;
  HouseholdRecord truth;
  truth.household_id = household.household_id;
  truth.household_values = household.household_values;
  truth.members = {household.members[member]};
  s.candidates.push_back(truth);
  for (std::size_t k = 0; k < schema.q(); ++k) {
    if (hh_fixed[k]) continue;
    for (int c = 0; c < schema.household_vars[k].cardinality; ++c) {
      if (c == truth.household_values[k]) continue;
      auto t = truth;
      t.household_values[k] = c;
      s.candidates.push_back(std::move(t));
    }
  }
  for (std::size_t k = 0; k < schema.p(); ++k) {
    if (ind_fixed[k]) continue;
    for (int c = 0; c < schema.individual_vars[k].cardinality; ++c) {
      if (c == truth.members[0][k]) continue;
      auto t = truth;
      t.members[0][k] = c;
      s.candidates.push_back(std::move(t));
    }
  }
  uniform(s);
  return s;
}

TargetSupport build_support_household(const HouseholdRecord& household, const Schema& schema, const RuleSet* rules,
                                      const std::vector<std::string>& hold_fixed) {
  const auto hh_fixed = fixed_mask(schema.household_vars, schema, hold_fixed, Level::kHousehold);
  const auto ind_fixed = fixed_mask(schema.individual_vars, schema, hold_fixed, Level::kIndividual);
  TargetSupport s;
  s.kind = TargetKind::kHousehold;
  s.candidates.push_back(household);
  auto keep = [&](HouseholdRecord&& t) {
    if (rules && !rules->feasible(t)) return;
    s.candidates.push_back(std::move(t));
  };
  for (std::size_t k = 0; k < schema.q(); ++k) {
    if (k == schema.size_var_index || hh_fixed[k]) continue;
    for (int c = 0; c < schema.household_vars[k].cardinality; ++c) {
      if (c == household.household_values[k]) continue;
      auto t = household;
      t.household_values[k] = c;
      keep(std::move(t));
    }
  }
  for (std::size_t j = 0; j < household.size(); ++j) {
    for (std::size_t k = 0; k < schema.p(); ++k) {
      if (ind_fixed[k]) continue;
      for (int c = 0; c < schema.individual_vars[k].cardinality; ++c) {
        if (c == household.members[j][k]) continue;
        auto t = household;
        t.members[j][k] = c;
        keep(std::move(t));
      }
    }
  }
  uniform(s);
  return s;
}

double replicate_log_likelihood(const Dataset& Z, const LogTables& tables) {
  double total = 0.0;
  for (const auto& r : Z.households) total += tables.household_log_likelihood(r);
  return total;
}

double replicate_log_likelihood(const Dataset& Z, const Params& params) {
  return replicate_log_likelihood(Z, LogTables(params));
}

namespace {

// Candidate-to-truth log likelihood ratios, ratios[c][r].
std::vector<std::vector<double>> log_ratios(const TargetSupport& support, const std::vector<LogTables>& draws) {
  const std::size_t R = draws.size();
  if (R == 0) throw InputError("risk computation needs at least one parameter draw");
  std::vector<double> truth(R);
  for (std::size_t r = 0; r < R; ++r) truth[r] = draws[r].household_log_likelihood(support.truth());
  std::vector<std::vector<double>> out(support.candidates.size(), std::vector<double>(R, 0.0));
  for (std::size_t c = 1; c < support.candidates.size(); ++c) {
    for (std::size_t r = 0; r < R; ++r)
      out[c][r] = draws[r].household_log_likelihood(support.candidates[c]) - truth[r];
    if (!std::isfinite(*std::max_element(out[c].begin(), out[c].end())))
      throw ComputeError("importance weights are all zero for " + candidate_name(c));
  }
  return out;
}

// log q_r(t) = ratio_r - log sum_r' exp(ratio_r').
std::vector<std::vector<double>> log_importance_weights(const TargetSupport& support,
                                                        const std::vector<LogTables>& draws) {
  auto out = log_ratios(support, draws);
  for (auto& row : out) {
    const double total = log_sum_exp(row);
    for (auto& x : row) x -= total;
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> importance_weights(const TargetSupport& support,
                                                    const std::vector<LogTables>& draws) {
  auto w = log_ratios(support, draws);
  for (auto& row : w) {
    const double shift = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (auto& x : row) total += x = std::exp(x - shift);
    for (auto& x : row) x /= total;
  }
  return w;
}

std::size_t rank_of_first(const std::vector<double>& rho) {
  std::size_t rank = 1;
  for (std::size_t c = 1; c < rho.size(); ++c)
    if (rho[c] > rho[0]) ++rank;
  return rank;
}

RiskResult importance_posterior(const std::vector<std::vector<double>>& log_p, const TargetSupport& support,
                                const std::vector<LogTables>& draws) {
  if (log_p.empty()) throw InputError("risk computation needs at least one synthetic replicate");
  const auto log_q = log_importance_weights(support, draws);
  const std::size_t C = support.candidates.size();
  const std::size_t R = draws.size();
  RiskResult out;
  out.log_score.assign(C, 0.0);
  std::vector<double> terms(R);
  for (std::size_t c = 0; c < C; ++c) {
    double score = std::log(support.prior[c]);
    for (const auto& lp : log_p) {
      if (lp.size() != R) throw InputError("replicate log-likelihoods do not match the number of draws");
      for (std::size_t r = 0; r < R; ++r) terms[r] = lp[r] + log_q[c][r];
      score += log_sum_exp(terms);
    }
    out.log_score[c] = score;
  }
  // Shared max-shift across candidates before normalizing.
  const double shift = *std::max_element(out.log_score.begin(), out.log_score.end());
  if (!std::isfinite(shift)) throw ComputeError("every candidate has zero posterior score");
  out.rho.resize(C);
  double total = 0.0;
  for (std::size_t c = 0; c < C; ++c) total += out.rho[c] = std::exp(out.log_score[c] - shift);
  for (auto& x : out.rho) x /= total;
  out.rank_of_truth = rank_of_first(out.rho);
  out.top_probability = *std::max_element(out.rho.begin(), out.rho.end());
  return out;
}

RiskResult importance_posterior(const std::vector<Dataset>& Z, const TargetSupport& support,
                                const std::vector<Params>& draws) {
  std::vector<LogTables> tables;
  tables.reserve(draws.size());
  for (const auto& p : draws) tables.emplace_back(p);
  std::vector<std::vector<double>> log_p(Z.size(), std::vector<double>(draws.size()));
  for (std::size_t l = 0; l < Z.size(); ++l)
    for (std::size_t r = 0; r < draws.size(); ++r) log_p[l][r] = replicate_log_likelihood(Z[l], tables[r]);
  return importance_posterior(log_p, support, tables);
}

RiskSummary risk_sweep(const Dataset& data, const SyntheticReplicates& Z, const std::vector<Params>& draws,
                       const RiskConfig& config, const RuleSet* rules) {
  if (Z.replicates.empty()) throw InputError("risk computation needs at least one synthetic replicate");
  std::vector<LogTables> tables;
  tables.reserve(draws.size());
  for (const auto& p : draws) tables.emplace_back(p);
  const std::size_t L = Z.replicates.size();
  const std::size_t R = draws.size();
  std::vector<std::vector<double>> log_p(L, std::vector<double>(R));
  parallel_for(L * R, config.threads, [&](std::size_t i) {
    log_p[i / R][i % R] = replicate_log_likelihood(Z.replicates[i / R], tables[i % R]);
  });

  // Units in data order; identical targets share one computation.
  struct Unit {
    std::string id;
    std::size_t target;
  };
  std::vector<Unit> units;
  std::vector<std::pair<std::size_t, std::size_t>> targets;  // (household, member)
  std::map<std::vector<int>, std::size_t> seen;
  for (std::size_t i = 0; i < data.households.size(); ++i) {
    const auto& r = data.households[i];
    const std::size_t members = config.kind == TargetKind::kIndividual ? r.size() : 1;
    for (std::size_t j = 0; j < members; ++j) {
      std::vector<int> key = r.household_values;
      if (config.kind == TargetKind::kIndividual) {
        key.insert(key.end(), r.members[j].begin(), r.members[j].end());
      } else {
        auto sorted = r.members;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& m : sorted) key.insert(key.end(), m.begin(), m.end());
      }
      auto [it, inserted] = seen.emplace(std::move(key), targets.size());
      if (inserted) {
        if (config.max_targets && targets.size() == config.max_targets) {
          seen.erase(it);
          goto done;
        }
        targets.emplace_back(i, j);
      }
      units.push_back({config.kind == TargetKind::kIndividual ? r.household_id + ":" + std::to_string(j + 1)
                                                             : r.household_id,
                       it->second});
    }
  }
done:
  std::vector<TargetRow> results(targets.size());
  parallel_for(targets.size(), config.threads, [&](std::size_t t) {
    const auto& [i, j] = targets[t];
    const auto& r = data.households[i];
    const TargetSupport support = config.kind == TargetKind::kIndividual
                                      ? build_support_individual(r, j, data.schema, config.hold_fixed)
                                      : build_support_household(r, data.schema, rules, config.hold_fixed);
    const RiskResult res = importance_posterior(log_p, support, tables);
    results[t] = {"", support.candidates.size(), res.rank_of_truth, res.rho[0], res.top_probability};
  });

  RiskSummary summary;
  summary.unique_targets = targets.size();
  for (const auto& u : units) {
    TargetRow row = results[u.target];
    row.target_id = u.id;
    ++summary.rank_histogram[row.rank_of_truth];
    summary.rank_at_most_3 += row.rank_of_truth <= 3;
    summary.max_rho_truth = std::max(summary.max_rho_truth, row.rho_truth);
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

void write_risk_summary_csv(std::ostream& out, const RiskSummary& summary) {
  std::ostringstream s;
  s << std::setprecision(10);
  s << "target_id,n_candidates,rank_of_truth,rho_truth,rho_max\n";
  for (const auto& r : summary.rows)
    s << r.target_id << ',' << r.n_candidates << ',' << r.rank_of_truth << ',' << r.rho_truth << ',' << r.rho_max
      << '\n';
  out << s.str();
}

void write_rank_histogram_csv(std::ostream& out, const RiskSummary& summary) {
  std::ostringstream s;
  s << "rank,count\n";
  for (const auto& [rank, count] : summary.rank_histogram) s << rank << ',' << count << '\n';
  out << s.str();
}

}  // namespace ndpmpm
