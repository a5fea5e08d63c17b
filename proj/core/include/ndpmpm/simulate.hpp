#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ndpmpm/dataset.hpp"

namespace ndpmpm {

struct ToyVariable {
  std::string name;
  std::vector<double> probabilities;  // marginal distribution, one entry per category
};

/// Generator for toy household populations.
///
/// Household variables and individual variables are drawn independently from
/// their marginals. With probability `copy_probability` a household is a
/// "copy" household: every member takes the head's value of `copy_variable`.
/// Household size h has probability size_probabilities[h-1].
struct ToyPopulationConfig {
  std::size_t households = 0;
  std::vector<double> size_probabilities;
  std::string size_name = "size";
  std::vector<ToyVariable> household_vars;  // excluding the size variable
  std::vector<ToyVariable> individual_vars;
  std::string copy_variable;
  double copy_probability = 0.0;

  void validate() const;
};

ToyPopulationConfig parse_toy_config(const std::string& json_text);

/// Schema implied by the generator: size first, then household variables.
Schema toy_schema(const ToyPopulationConfig& config);

Dataset simulate_toy_population(const ToyPopulationConfig& config, std::uint64_t seed);

/// Pr(all members share the copy variable | size h) implied by the generator.
double toy_all_same_probability(const ToyPopulationConfig& config, int h);

/// Simple random sample of n households without replacement; keeps population order.
Dataset simple_random_sample(const Dataset& population, std::size_t n, std::uint64_t seed);

}  // namespace ndpmpm
