#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ndpmpm/schema.hpp"

namespace ndpmpm {

/// One household. All codes are 0-based internally; files use 1-based codes.
struct HouseholdRecord {
  std::string household_id;
  std::vector<int> household_values;         // length q
  std::vector<std::vector<int>> members;     // n_i vectors of length p

  std::size_t size() const { return members.size(); }
};

struct Dataset {
  Schema schema;
  std::vector<HouseholdRecord> households;

  std::size_t num_households() const { return households.size(); }
  std::size_t num_individuals() const;

  /// Throws InputError when a record breaks the schema (codes, size variable,
  /// duplicate ids).
  void validate() const;
};

/// Checks one record against the schema; returns an empty string when valid.
std::string record_problem(const Schema& schema, const HouseholdRecord& record);

/// Household-size histogram h -> number of households of size h.
using SizeHistogram = std::map<int, std::size_t>;
SizeHistogram size_histogram(const Dataset& data);

Dataset read_dataset(std::istream& in, const Schema& schema, const std::string& source = "<stream>");
Dataset load_dataset(const std::string& path, const Schema& schema);
void write_dataset(std::ostream& out, const Dataset& data);
void save_dataset(const std::string& path, const Dataset& data);

}  // namespace ndpmpm
