#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ndpmpm/dataset.hpp"
#include "ndpmpm/synthesis.hpp"

namespace ndpmpm {

/// Point estimate and its variance from one dataset.
struct Estimate {
  double q = 0.0;
  double u = 0.0;
};

/// Partial-synthesis combining rules across L replicates.
struct CombinedEstimate {
  double q_bar = 0.0;
  double u_bar = 0.0;
  double b_L = 0.0;
  double T_L = 0.0;
  double nu_df = 0.0;  // +inf when b_L == 0
  double lo = 0.0;
  double hi = 0.0;
};

/// q_bar = mean q; u_bar = mean u; b_L = sample variance of q; T_L = u_bar + b_L / L;
/// nu = (L - 1)(1 + L u_bar / b_L)^2; interval q_bar +/- t_{nu,(1+gamma)/2} sqrt(T_L).
/// When b_L = 0 the normal quantile is used. Throws InputError for L < 2 or T_L = 0.
CombinedEstimate combine(std::span<const Estimate> estimates, double gamma = 0.95);

/// Normal-theory interval for a single dataset.
std::pair<double, double> normal_interval(const Estimate& e, double gamma = 0.95);

/// A cell of a marginal, bivariate or trivariate table.
struct CellQuery {
  std::vector<Schema::VarRef> vars;
  std::vector<int> codes;  // 0-based

  std::string label(const Schema& schema) const;
};

/// Sample proportion with binomial variance q(1-q)/n. The denominator is the
/// number of individuals if any variable is individual-level, else households.
Estimate estimate_proportion(const Dataset& data, const CellQuery& query);

using HouseholdPredicate = std::function<bool(const HouseholdRecord&)>;

struct HouseholdQuery {
  std::string name;
  HouseholdPredicate predicate;
  std::optional<int> size;  // restrict the denominator to households of this size
};

/// Proportion of (size-restricted) households satisfying the predicate.
Estimate estimate_proportion(const Dataset& data, const HouseholdQuery& query);

// Predicate vocabulary. Member conditions are conjunctions of var-in-codes tests.
struct MemberCondition {
  std::size_t var;
  std::vector<int> codes;  // 0-based
};
HouseholdPredicate all_equal(std::size_t individual_var);
HouseholdPredicate all_members(std::vector<MemberCondition> conditions);
HouseholdPredicate exists_member(std::vector<MemberCondition> conditions);
HouseholdPredicate count_members(std::vector<MemberCondition> conditions, std::string op, int n);
HouseholdPredicate household_in(std::size_t household_var, std::vector<int> codes);
/// Distinct members a, b meeting their conditions; optionally with equal
/// (`same`) or unequal (`different`) values of `compare_var`.
enum class PairRelation { kAny, kSame, kDifferent };
HouseholdPredicate member_pair(std::vector<MemberCondition> a, std::vector<MemberCondition> b,
                               PairRelation relation = PairRelation::kAny, std::size_t compare_var = 0);
HouseholdPredicate all_of(std::vector<HouseholdPredicate> parts);
HouseholdPredicate any_of(std::vector<HouseholdPredicate> parts);
HouseholdPredicate negate(HouseholdPredicate part);

/// Builds a query from its JSON form, e.g.
///   {"name": "all_same_race_2", "size": 2, "where": {"all_equal": "race"}}
/// Codes in JSON are 1-based integers or category labels.
HouseholdQuery parse_household_query(const std::string& json_text, const Schema& schema);

/// Named within-household queries (same-race, couples, children, ...) that
/// the schema can express. Queries whose variables are absent are skipped.
std::vector<HouseholdQuery> builtin_household_queries(const Schema& schema);
std::vector<std::string> builtin_query_names();
std::optional<HouseholdQuery> builtin_household_query(const std::string& name, const Schema& schema);

struct ReportRow {
  std::string query;
  std::optional<double> truth;
  Estimate original;
  double lo_orig = 0.0;
  double hi_orig = 0.0;
  CombinedEstimate synthetic;
};

/// Every cell of order 1..max_order whose expected count in the original
/// (q * denominator) is at least `threshold`.
std::vector<ReportRow> cell_report(const Dataset& original, const SyntheticReplicates& synthetic, int max_order,
                                   double threshold, double gamma = 0.95, const Dataset* population = nullptr);

std::vector<ReportRow> household_report(const Dataset& original, const SyntheticReplicates& synthetic,
                                        const std::vector<HouseholdQuery>& queries, double gamma = 0.95,
                                        const Dataset* population = nullptr);

/// CSV: query,Q_truth,q_orig,lo_orig,hi_orig,q_syn,lo_syn,hi_syn
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace ndpmpm
