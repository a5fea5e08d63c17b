#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ndpmpm/dataset.hpp"
#include "ndpmpm/model.hpp"
#include "ndpmpm/rng.hpp"

namespace fixtures {

using ndpmpm::Dataset;
using ndpmpm::HouseholdRecord;
using ndpmpm::Level;
using ndpmpm::Params;
using ndpmpm::Schema;
using ndpmpm::VariableSpec;

using VarList = std::vector<std::pair<std::string, int>>;

/// Schema whose first household variable is the size variable.
inline Schema make_schema(int max_size, const VarList& household, const VarList& individual,
                          const std::string& size_name = "size") {
  Schema s;
  s.household_vars.push_back({size_name, Level::kHousehold, max_size, {}});
  for (const auto& [name, d] : household) s.household_vars.push_back({name, Level::kHousehold, d, {}});
  for (const auto& [name, d] : individual) s.individual_vars.push_back({name, Level::kIndividual, d, {}});
  s.size_var_index = 0;
  s.validate();
  return s;
}

/// 0-based codes; the size value is filled in from the member count.
inline HouseholdRecord make_household(const std::string& id, std::vector<int> non_size_household,
                                      std::vector<std::vector<int>> members) {
  HouseholdRecord r;
  r.household_id = id;
  r.household_values.push_back(static_cast<int>(members.size()) - 1);
  for (int v : non_size_household) r.household_values.push_back(v);
  r.members = std::move(members);
  return r;
}

inline Params random_params(const Schema& schema, int F, int S, std::uint64_t seed) {
  ndpmpm::Rng rng(seed);
  return ndpmpm::prior_draw(ndpmpm::uniform_prior(schema, F, S), rng);
}

/// P(record | params) by summing over every (g, m_1, ..., m_n) assignment.
inline double brute_force_likelihood(const HouseholdRecord& r, const Params& p) {
  const std::size_t n = r.size();
  double total = 0.0;
  for (int g = 0; g < p.F; ++g) {
    double hh = p.pi[g];
    for (std::size_t k = 0; k < r.household_values.size(); ++k) hh *= p.lambda_at(k, g, r.household_values[k]);
    std::vector<int> m(n, 0);
    while (true) {
      double term = hh;
      for (std::size_t j = 0; j < n; ++j) {
        term *= p.omega_at(g, m[j]);
        for (std::size_t k = 0; k < r.members[j].size(); ++k) term *= p.phi_at(k, g, m[j], r.members[j][k]);
      }
      total += term;
      std::size_t j = 0;
      while (j < n && ++m[j] == p.S) m[j++] = 0;
      if (j == n) break;
    }
  }
  return total;
}

/// Sample mean and standard error from batch means.
struct BatchMeans {
  double mean = 0.0;
  double se = 0.0;
};

inline BatchMeans batch_means(const std::vector<double>& x, std::size_t batches = 50) {
  BatchMeans out;
  const std::size_t per = x.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < per; ++i) means[b] += x[b * per + i];
    means[b] /= static_cast<double>(per);
    out.mean += means[b];
  }
  out.mean /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - out.mean) * (m - out.mean);
  var /= static_cast<double>(batches - 1);
  out.se = std::sqrt(var / static_cast<double>(batches));
  return out;
}

}  // namespace fixtures
