#include "ndpmpm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ndpmpm/error.hpp"
#include "ndpmpm/rng.hpp"

namespace ndpmpm {

namespace {

void check_probabilities(const std::vector<double>& probs, const std::string& what) {
  if (probs.size() < 2) throw InputError("toy config: '" + what + "' needs at least two categories");
  double total = 0.0;
  for (double x : probs) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InputError("toy config: invalid probability in '" + what + "'");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("toy config: probabilities of '" + what + "' do not sum to 1");
}

int copy_index(const ToyPopulationConfig& config) {
  if (config.copy_variable.empty()) return -1;
  for (std::size_t k = 0; k < config.individual_vars.size(); ++k)
    if (config.individual_vars[k].name == config.copy_variable) return static_cast<int>(k);
  throw InputError("toy config: copy variable '" + config.copy_variable + "' is not an individual variable");
}

}  // namespace

void ToyPopulationConfig::validate() const {
  check_probabilities(size_probabilities, size_name);
  for (const auto& v : household_vars) check_probabilities(v.probabilities, v.name);
  if (individual_vars.empty()) throw InputError("toy config: at least one individual variable is required");
  for (const auto& v : individual_vars) check_probabilities(v.probabilities, v.name);
  if (!(copy_probability >= 0.0 && copy_probability <= 1.0))
    throw InputError("toy config: copy_probability must lie in [0, 1]");
  copy_index(*this);
}

ToyPopulationConfig parse_toy_config(const std::string& json_text) {
  using nlohmann::json;
  ToyPopulationConfig config;
  try {
    const json doc = json::parse(json_text);
    config.households = doc.at("households").get<std::size_t>();
    config.size_probabilities = doc.at("size_probabilities").get<std::vector<double>>();
    config.size_name = doc.value("size_name", std::string("size"));
    auto vars = [](const json& list) {
      std::vector<ToyVariable> out;
      for (const auto& item : list)
        out.push_back({item.at("name").get<std::string>(), item.at("probabilities").get<std::vector<double>>()});
      return out;
    };
    if (doc.contains("household_variables")) config.household_vars = vars(doc.at("household_variables"));
    config.individual_vars = vars(doc.at("individual_variables"));
    config.copy_variable = doc.value("copy_variable", std::string());
    config.copy_probability = doc.value("copy_probability", 0.0);
  } catch (const json::exception& e) {
    throw InputError(std::string("toy config: ") + e.what());
  }
  config.validate();
  return config;
}

Schema toy_schema(const ToyPopulationConfig& config) {
  Schema schema;
  schema.household_vars.push_back(
      {config.size_name, Level::kHousehold, static_cast<int>(config.size_probabilities.size()), {}});
  for (const auto& v : config.household_vars)
    schema.household_vars.push_back({v.name, Level::kHousehold, static_cast<int>(v.probabilities.size()), {}});
  for (const auto& v : config.individual_vars)
    schema.individual_vars.push_back({v.name, Level::kIndividual, static_cast<int>(v.probabilities.size()), {}});
  schema.size_var_index = 0;
  schema.validate();
  return schema;
}

Dataset simulate_toy_population(const ToyPopulationConfig& config, std::uint64_t seed) {
  config.validate();
  const int copy_k = copy_index(config);
  Dataset data;
  data.schema = toy_schema(config);
  data.households.reserve(config.households);
  for (std::size_t i = 0; i < config.households; ++i) {
    Rng rng = Rng::derive(seed, {tag(Stream::kSimulate), i});
    HouseholdRecord record;
    record.household_id = std::to_string(i + 1);
    const auto size = static_cast<int>(rng.categorical(config.size_probabilities)) + 1;
    record.household_values.push_back(size - 1);
    for (const auto& v : config.household_vars)
      record.household_values.push_back(static_cast<int>(rng.categorical(v.probabilities)));
    const bool copies = copy_k >= 0 && rng.uniform() < config.copy_probability;
    for (int j = 0; j < size; ++j) {
      std::vector<int> person;
      for (const auto& v : config.individual_vars) person.push_back(static_cast<int>(rng.categorical(v.probabilities)));
      if (copies && j > 0) person[copy_k] = record.members.front()[copy_k];
      record.members.push_back(std::move(person));
    }
    data.households.push_back(std::move(record));
  }
  return data;
}

double toy_all_same_probability(const ToyPopulationConfig& config, int h) {
  const int copy_k = copy_index(config);
  if (copy_k < 0) throw InputError("toy config: no copy variable");
  double independent = 0.0;
  for (double p : config.individual_vars[copy_k].probabilities) independent += std::pow(p, h);
  if (h == 1) return 1.0;
  return config.copy_probability + (1.0 - config.copy_probability) * independent;
}

Dataset simple_random_sample(const Dataset& population, std::size_t n, std::uint64_t seed) {
  if (n > population.num_households())
    throw InputError("sample size " + std::to_string(n) + " exceeds population of " +
                     std::to_string(population.num_households()) + " households");
  std::vector<std::size_t> index(population.num_households());
  std::iota(index.begin(), index.end(), 0);
  Rng rng = Rng::derive(seed, {tag(Stream::kSample)});
  for (std::size_t i = 0; i < n; ++i) std::swap(index[i], index[i + rng.below(index.size() - i)]);
  index.resize(n);
  std::sort(index.begin(), index.end());
  Dataset sample;
  sample.schema = population.schema;
  sample.households.reserve(n);
  for (std::size_t i : index) sample.households.push_back(population.households[i]);
  return sample;
}

}  // namespace ndpmpm
