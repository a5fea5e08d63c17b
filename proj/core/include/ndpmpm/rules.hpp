#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ndpmpm/dataset.hpp"

namespace ndpmpm {

/// Exactly one member has `role_var == role_code`.
struct ExactlyOneOfRole {
  std::size_t role_var;
  int role_code;
};

/// Every member with `role_var == role_code` has `target_var >= threshold`.
struct MinValueForRole {
  std::size_t target_var;
  int threshold;
  std::size_t role_var;
  int role_code;
};

/// For every ordered pair of distinct members (a, b) with role(a) in
/// `lower_roles` and role(b) in `upper_roles`: target(a) + min_gap <= target(b).
struct PairwiseOrderByRole {
  std::size_t target_var;
  std::size_t role_var;
  std::vector<int> lower_roles;
  std::vector<int> upper_roles;
  int min_gap = 1;
};

/// A conjunction of (variable == code) conditions that must not occur.
/// Household-level conditions apply to the household; individual-level ones
/// must all hold for a single member. A household matching every condition is
/// infeasible.
struct ForbiddenCombination {
  struct Condition {
    Schema::VarRef var;
    int code;
  };
  std::vector<Condition> conditions;
};

using Rule = std::variant<ExactlyOneOfRole, MinValueForRole, PairwiseOrderByRole, ForbiddenCombination>;

/// Compiled structural-zero constraints. Immutable once built.
class RuleSet {
 public:
  RuleSet() = default;
  RuleSet(Schema schema, std::vector<Rule> rules);

  const Schema& schema() const { return schema_; }
  const std::vector<Rule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }

  /// True iff every rule is satisfied.
  bool feasible(const HouseholdRecord& record) const;

 private:
  Schema schema_;
  std::vector<Rule> rules_;
};

/// Parses the line-oriented rule document. Grammar (whitespace-insensitive,
/// `#` starts a comment, codes are 1-based integers, `code(N)`, or labels):
///
///     exactly_one <var> = <code>
///     min_value <var> >= <code> when <var> = <code>
///     order <var> : <codes> < <codes> by <var> [gap <n>]
///     forbid <var> = <code> [, <var> = <code>]...
///
/// where <codes> is a single code or `{c1, c2, ...}`.
RuleSet compile_rules(std::string_view text, const Schema& schema);
RuleSet load_rules(const std::string& path, const Schema& schema);

bool check_household(const HouseholdRecord& record, const RuleSet& rules);

/// Number of cells in C_h: product over non-size household variables times
/// (product over individual variables)^h. Saturates at UINT64_MAX.
std::uint64_t cell_count(const Schema& schema, int h);

/// Visits every household composition of size h (size variable fixed to h,
/// members ordered) and reports its feasibility. Throws InputError when the
/// cell count exceeds `cap`.
void for_each_cell(const Schema& schema, const RuleSet& rules, int h, std::uint64_t cap,
                   const std::function<void(const HouseholdRecord&, bool feasible)>& visit);

struct FeasibleEnumeration {
  std::uint64_t total = 0;
  std::uint64_t feasible = 0;
};

/// Exact count of C_h - S_h; `visit`, if set, receives each feasible cell once.
FeasibleEnumeration enumerate_feasible(const Schema& schema, const RuleSet& rules, int h,
                                       std::uint64_t cap = 10'000'000,
                                       const std::function<void(const HouseholdRecord&)>& visit = {});

}  // namespace ndpmpm
