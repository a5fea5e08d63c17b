#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ndpmpm {

enum class Level { kHousehold, kIndividual };

struct VariableSpec {
  std::string name;
  Level level = Level::kIndividual;
  int cardinality = 2;
  /// Optional labels, one per category; used by the rule grammar and reports.
  std::vector<std::string> labels;

  /// 0-based code for a label, or nullopt.
  std::optional<int> code_of(std::string_view label) const;
};

/// Variable layout of a grouped categorical dataset.
///
/// Household-level variables come first in files, individual-level second.
/// Exactly one household variable is the household size; its code equals the
/// number of members.
struct Schema {
  std::vector<VariableSpec> household_vars;
  std::vector<VariableSpec> individual_vars;
  std::size_t size_var_index = 0;

  std::size_t p() const { return individual_vars.size(); }
  std::size_t q() const { return household_vars.size(); }
  /// Largest representable household size.
  int max_size() const { return household_vars.at(size_var_index).cardinality; }

  /// Throws InputError when an invariant fails.
  void validate() const;

  struct VarRef {
    Level level;
    std::size_t index;
  };
  std::optional<VarRef> find(std::string_view name) const;
  const VariableSpec& var(VarRef ref) const;
};

/// Parses the JSON schema document:
///
///     {
///       "household_variables": [{"name": "size", "cardinality": 4}, ...],
///       "individual_variables": [{"name": "race", "cardinality": 4,
///                                 "labels": ["white", ...]}, ...],
///       "size_variable": "size"
///     }
Schema parse_schema(std::string_view text);
Schema load_schema(const std::string& path);
std::string schema_to_json(const Schema& schema);

}  // namespace ndpmpm
