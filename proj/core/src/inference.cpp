#include "ndpmpm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "ndpmpm/error.hpp"

namespace ndpmpm {

namespace {

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

double t_quantile(double nu, double p) {
  if (!std::isfinite(nu)) return normal_quantile(p);
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("interval level must lie in (0, 1)");
}

bool member_matches(const std::vector<int>& person, const std::vector<MemberCondition>& conditions) {
  for (const auto& c : conditions)
    if (std::find(c.codes.begin(), c.codes.end(), person[c.var]) == c.codes.end()) return false;
  return true;
}

Estimate binomial(std::size_t hits, std::size_t n, const std::string& what) {
  if (n == 0) throw InputError("empty denominator for " + what);
  const double q = static_cast<double>(hits) / static_cast<double>(n);
  return {q, q * (1.0 - q) / static_cast<double>(n)};
}

CombinedEstimate combine_or_point(std::span<const Estimate> estimates, double gamma) {
  try {
    return combine(estimates, gamma);
  } catch (const InputError&) {
    // All replicates agree and carry zero variance: a point interval.
    CombinedEstimate c;
    c.q_bar = estimates.empty() ? 0.0 : estimates[0].q;
    c.nu_df = std::numeric_limits<double>::infinity();
    c.lo = c.hi = c.q_bar;
    return c;
  }
}

}  // namespace

CombinedEstimate combine(std::span<const Estimate> estimates, double gamma) {
  check_gamma(gamma);
  const std::size_t L = estimates.size();
  if (L < 2) throw InputError("combining rules need at least 2 replicates, got " + std::to_string(L));
  CombinedEstimate c;
  // Means as offsets from the first replicate, so identical replicates return their value exactly.
  double dq = 0.0, du = 0.0;
  for (const auto& e : estimates) {
    if (!(e.u >= 0.0)) throw InputError("negative within-replicate variance");
    dq += e.q - estimates[0].q;
    du += e.u - estimates[0].u;
  }
  c.q_bar = estimates[0].q + dq / static_cast<double>(L);
  c.u_bar = estimates[0].u + du / static_cast<double>(L);
  for (const auto& e : estimates) c.b_L += (e.q - c.q_bar) * (e.q - c.q_bar);
  c.b_L /= static_cast<double>(L - 1);
  c.T_L = c.u_bar + c.b_L / static_cast<double>(L);
  if (!(c.T_L > 0.0)) throw InputError("total variance T_L is zero");
  if (c.b_L > 0.0) {
    const double r = 1.0 + static_cast<double>(L) * c.u_bar / c.b_L;
    c.nu_df = static_cast<double>(L - 1) * r * r;
  } else {
    c.nu_df = std::numeric_limits<double>::infinity();
  }
  const double half = t_quantile(c.nu_df, 0.5 * (1.0 + gamma)) * std::sqrt(c.T_L);
  c.lo = c.q_bar - half;
  c.hi = c.q_bar + half;
  return c;
}

std::pair<double, double> normal_interval(const Estimate& e, double gamma) {
  check_gamma(gamma);
  const double half = normal_quantile(0.5 * (1.0 + gamma)) * std::sqrt(e.u);
  return {e.q - half, e.q + half};
}

std::string CellQuery::label(const Schema& schema) const {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ';';
    const auto& spec = schema.var(vars[i]);
    out += spec.name + '=' + std::to_string(codes[i] + 1);
  }
  return out;
}

Estimate estimate_proportion(const Dataset& data, const CellQuery& query) {
  if (query.vars.empty() || query.vars.size() != query.codes.size()) throw InputError("malformed cell query");
  const bool individual =
      std::any_of(query.vars.begin(), query.vars.end(), [](const auto& v) { return v.level == Level::kIndividual; });
  std::size_t hits = 0;
  std::size_t n = 0;
  auto value = [&](const HouseholdRecord& r, const std::vector<int>* person, std::size_t i) {
    const auto& v = query.vars[i];
    return v.level == Level::kHousehold ? r.household_values[v.index] : (*person)[v.index];
  };
  for (const auto& r : data.households) {
    if (individual) {
      for (const auto& person : r.members) {
        ++n;
        bool match = true;
        for (std::size_t i = 0; i < query.vars.size() && match; ++i) match = value(r, &person, i) == query.codes[i];
        hits += match;
      }
    } else {
      ++n;
      bool match = true;
      for (std::size_t i = 0; i < query.vars.size() && match; ++i) match = value(r, nullptr, i) == query.codes[i];
      hits += match;
    }
  }
  return binomial(hits, n, query.label(data.schema));
}

Estimate estimate_proportion(const Dataset& data, const HouseholdQuery& query) {
  std::size_t hits = 0;
  std::size_t n = 0;
  for (const auto& r : data.households) {
    if (query.size && static_cast<int>(r.size()) != *query.size) continue;
    ++n;
    hits += query.predicate(r);
  }
  return binomial(hits, n, query.name);
}

HouseholdPredicate all_equal(std::size_t var) {
  return [var](const HouseholdRecord& r) {
    for (const auto& person : r.members)
      if (person[var] != r.members.front()[var]) return false;
    return true;
  };
}

HouseholdPredicate all_members(std::vector<MemberCondition> conditions) {
  return [conditions = std::move(conditions)](const HouseholdRecord& r) {
    return std::all_of(r.members.begin(), r.members.end(),
                       [&](const auto& person) { return member_matches(person, conditions); });
  };
}

HouseholdPredicate exists_member(std::vector<MemberCondition> conditions) {
  return [conditions = std::move(conditions)](const HouseholdRecord& r) {
    return std::any_of(r.members.begin(), r.members.end(),
                       [&](const auto& person) { return member_matches(person, conditions); });
  };
}

HouseholdPredicate count_members(std::vector<MemberCondition> conditions, std::string op, int n) {
  static const std::vector<std::string> ops{"==", "!=", "<", "<=", ">", ">="};
  if (std::find(ops.begin(), ops.end(), op) == ops.end()) throw InputError("unknown count operator '" + op + "'");
  return [conditions = std::move(conditions), op = std::move(op), n](const HouseholdRecord& r) {
    const int c = static_cast<int>(std::count_if(r.members.begin(), r.members.end(),
                                                 [&](const auto& person) { return member_matches(person, conditions); }));
    if (op == "==") return c == n;
    if (op == "!=") return c != n;
    if (op == "<") return c < n;
    if (op == "<=") return c <= n;
    if (op == ">") return c > n;
    return c >= n;
  };
}

HouseholdPredicate household_in(std::size_t var, std::vector<int> codes) {
  return [var, codes = std::move(codes)](const HouseholdRecord& r) {
    return std::find(codes.begin(), codes.end(), r.household_values[var]) != codes.end();
  };
}

HouseholdPredicate member_pair(std::vector<MemberCondition> a, std::vector<MemberCondition> b, PairRelation relation,
                               std::size_t compare_var) {
  return [a = std::move(a), b = std::move(b), relation, compare_var](const HouseholdRecord& r) {
    for (std::size_t i = 0; i < r.members.size(); ++i) {
      if (!member_matches(r.members[i], a)) continue;
      for (std::size_t j = 0; j < r.members.size(); ++j) {
        if (i == j || !member_matches(r.members[j], b)) continue;
        const bool same = r.members[i][compare_var] == r.members[j][compare_var];
        if (relation == PairRelation::kAny || (relation == PairRelation::kSame) == same) return true;
      }
    }
    return false;
  };
}

HouseholdPredicate all_of(std::vector<HouseholdPredicate> parts) {
  return [parts = std::move(parts)](const HouseholdRecord& r) {
    return std::all_of(parts.begin(), parts.end(), [&](const auto& p) { return p(r); });
  };
}

HouseholdPredicate any_of(std::vector<HouseholdPredicate> parts) {
  return [parts = std::move(parts)](const HouseholdRecord& r) {
    return std::any_of(parts.begin(), parts.end(), [&](const auto& p) { return p(r); });
  };
}

HouseholdPredicate negate(HouseholdPredicate part) {
  return [part = std::move(part)](const HouseholdRecord& r) { return !part(r); };
}

namespace {

using nlohmann::json;

Schema::VarRef lookup(const Schema& schema, const std::string& name, std::optional<Level> required) {
  const auto ref = schema.find(name);
  if (!ref) throw InputError("query refers to unknown variable '" + name + "'");
  if (required && ref->level != *required)
    throw InputError("variable '" + name + "' must be " +
                     (*required == Level::kIndividual ? "individual-level" : "household-level") + " here");
  return *ref;
}

int parse_code(const VariableSpec& spec, const json& j) {
  int code = -1;
  if (j.is_number_integer()) {
    code = j.get<int>() - 1;
  } else if (j.is_string()) {
    const auto c = spec.code_of(j.get<std::string>());
    if (!c) throw InputError("unknown category '" + j.get<std::string>() + "' for variable '" + spec.name + "'");
    code = *c;
  } else {
    throw InputError("codes must be integers or labels");
  }
  if (code < 0 || code >= spec.cardinality)
    throw InputError("code out of range for variable '" + spec.name + "'");
  return code;
}

std::vector<int> parse_codes(const VariableSpec& spec, const json& j) {
  std::vector<int> out;
  if (j.is_array()) {
    for (const auto& c : j) out.push_back(parse_code(spec, c));
  } else {
    out.push_back(parse_code(spec, j));
  }
  return out;
}

std::vector<MemberCondition> parse_conditions(const Schema& schema, const json& j) {
  std::vector<MemberCondition> out;
  const json list = j.is_array() ? j : json::array({j});
  for (const auto& c : list) {
    const auto ref = lookup(schema, c.at("var").get<std::string>(), Level::kIndividual);
    out.push_back({ref.index, parse_codes(schema.var(ref), c.at("codes"))});
  }
  return out;
}

HouseholdPredicate parse_predicate(const Schema& schema, const json& j) {
  if (!j.is_object() || j.size() != 1) throw InputError("each predicate must be an object with one key");
  const std::string key = j.begin().key();
  const json& body = j.begin().value();
  if (key == "all_equal") return all_equal(lookup(schema, body.get<std::string>(), Level::kIndividual).index);
  if (key == "all") return all_members(parse_conditions(schema, body));
  if (key == "exists") return exists_member(parse_conditions(schema, body));
  if (key == "count")
    return count_members(parse_conditions(schema, body.at("where")), body.value("op", std::string(">=")),
                         body.at("n").get<int>());
  if (key == "household") {
    const auto ref = lookup(schema, body.at("var").get<std::string>(), Level::kHousehold);
    return household_in(ref.index, parse_codes(schema.var(ref), body.at("codes")));
  }
  if (key == "pair") {
    PairRelation relation = PairRelation::kAny;
    std::size_t compare = 0;
    if (body.contains("same")) {
      relation = PairRelation::kSame;
      compare = lookup(schema, body["same"].get<std::string>(), Level::kIndividual).index;
    } else if (body.contains("different")) {
      relation = PairRelation::kDifferent;
      compare = lookup(schema, body["different"].get<std::string>(), Level::kIndividual).index;
    }
    return member_pair(parse_conditions(schema, body.at("a")), parse_conditions(schema, body.at("b")), relation,
                       compare);
  }
  if (key == "and" || key == "or") {
    std::vector<HouseholdPredicate> parts;
    for (const auto& p : body) parts.push_back(parse_predicate(schema, p));
    return key == "and" ? all_of(std::move(parts)) : any_of(std::move(parts));
  }
  if (key == "not") return negate(parse_predicate(schema, body));
  throw InputError("unknown predicate '" + key + "'");
}

HouseholdQuery query_from_json(const json& j, const Schema& schema) {
  HouseholdQuery q;
  q.name = j.at("name").get<std::string>();
  if (j.contains("size")) q.size = j["size"].get<int>();
  q.predicate = parse_predicate(schema, j.at("where"));
  return q;
}

// Built-in roster. Codes are 1-based and follow the household-survey coding
// used by the bundled configs: race 1 = white; ownership 1 = owned, 2 = rented;
// insurance 2 = insured; marital 1 = married; employment 1 = employed;
// education 4-5 = college degree; english 2 = speaks English;
// relationship 1 = head, 2 = spouse, 3 = child, 5 = parent, 6 = parent-in-law,
// 7 = sibling, 9 = grandchild; gender 2 = female.
const std::vector<std::string>& roster() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (int h = 2; h <= 4; ++h) out.push_back("all_same_race_" + std::to_string(h));
    for (const char* n : {"all_white_rent", "all_white_insured", "all_married_working", "all_college",
                          "all_insured", "all_speak_english", "two_workers", "spouse_present",
                          "spouse_white_head", "spouse_black_head", "white_couple", "white_couple_own",
                          "same_race_couple", "white_nonwhite_couple", "nonwhite_couple_own", "only_mother",
                          "only_one_parent", "children_present", "parents_present", "siblings_present",
                          "grandchild_present", "three_generations"})
      out.emplace_back(n);
    return out;
  }();
  return names;
}

std::string builtin_definition(const std::string& name) {
  static const std::map<std::string, std::string> defs = [] {
    std::map<std::string, std::string> m;
    const std::string head = R"({"var":"relationship","codes":[1]})";
    const std::string spouse = R"({"var":"relationship","codes":[2]})";
    const std::string child = R"({"var":"relationship","codes":[3]})";
    const std::string white = R"({"var":"race","codes":[1]})";
    const std::string nonwhite = R"({"var":"race","codes":"NONWHITE"})";
    const std::string black = R"({"var":"race","codes":[2]})";
    const std::string own = R"({"household":{"var":"ownership","codes":[1]}})";
    for (int h = 2; h <= 4; ++h)
      m["all_same_race_" + std::to_string(h)] = R"({"size":)" + std::to_string(h) + R"(,"where":{"all_equal":"race"}})";
    m["all_white_rent"] = R"({"where":{"and":[{"all":)" + white + R"(},{"household":{"var":"ownership","codes":[2]}}]}})";
    m["all_white_insured"] =
        R"({"where":{"all":[)" + white + R"(,{"var":"health_insurance","codes":[2]}]}})";
    m["all_married_working"] =
        R"({"where":{"all":[{"var":"marital","codes":[1]},{"var":"employment","codes":[1]}]}})";
    m["all_college"] = R"({"where":{"all":{"var":"education","codes":[4,5]}}})";
    m["all_insured"] = R"({"where":{"all":{"var":"health_insurance","codes":[2]}}})";
    m["all_speak_english"] = R"({"where":{"all":{"var":"english","codes":[2]}}})";
    m["two_workers"] = R"({"where":{"count":{"where":{"var":"employment","codes":[1]},"op":"==","n":2}}})";
    m["spouse_present"] = R"({"where":{"exists":)" + spouse + "}}";
    m["spouse_white_head"] = R"({"where":{"and":[{"exists":)" + spouse + R"(},{"exists":[)" + head + "," + white + "]}]}}";
    m["spouse_black_head"] = R"({"where":{"and":[{"exists":)" + spouse + R"(},{"exists":[)" + head + "," + black + "]}]}}";
    m["white_couple"] = R"({"where":{"pair":{"a":[)" + head + "," + white + R"(],"b":[)" + spouse + "," + white + "]}}}";
    m["white_couple_own"] = R"({"where":{"and":[{"pair":{"a":[)" + head + "," + white + R"(],"b":[)" + spouse + "," +
                            white + "]}}," + own + "]}}";
    m["same_race_couple"] = R"({"where":{"pair":{"a":)" + head + R"(,"b":)" + spouse + R"(,"same":"race"}}})";
    m["white_nonwhite_couple"] = R"({"where":{"or":[{"pair":{"a":[)" + head + "," + white + R"(],"b":[)" + spouse +
                                 "," + nonwhite + R"(]}},{"pair":{"a":[)" + head + "," + nonwhite + R"(],"b":[)" +
                                 spouse + "," + white + "]}}]}}";
    m["nonwhite_couple_own"] = R"({"where":{"and":[{"pair":{"a":[)" + head + "," + nonwhite + R"(],"b":[)" + spouse +
                               "," + nonwhite + "]}}," + own + "]}}";
    m["only_mother"] = R"({"where":{"and":[{"exists":)" + child + R"(},{"not":{"exists":)" + spouse +
                       R"(}},{"exists":[)" + head + R"(,{"var":"gender","codes":[2]}]}]}})";
    m["only_one_parent"] = R"({"where":{"and":[{"exists":)" + child + R"(},{"not":{"exists":)" + spouse + "}}]}}";
    m["children_present"] = R"({"where":{"exists":)" + child + "}}";
    m["parents_present"] = R"({"where":{"exists":{"var":"relationship","codes":[5]}}})";
    m["siblings_present"] = R"({"where":{"exists":{"var":"relationship","codes":[7]}}})";
    m["grandchild_present"] = R"({"where":{"exists":{"var":"relationship","codes":[9]}}})";
    m["three_generations"] = R"({"where":{"or":[{"exists":{"var":"relationship","codes":[9]}},{"and":[{"exists":)" +
                             child + R"(},{"exists":{"var":"relationship","codes":[5,6]}}]}]}})";
    return m;
  }();
  return defs.at(name);
}

}  // namespace

HouseholdQuery parse_household_query(const std::string& json_text, const Schema& schema) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed household query: ") + e.what());
  }
  try {
    return query_from_json(j, schema);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed household query: ") + e.what());
  }
}

std::vector<std::string> builtin_query_names() { return roster(); }

std::optional<HouseholdQuery> builtin_household_query(const std::string& name, const Schema& schema) {
  const auto& names = roster();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw InputError("unknown built-in query '" + name + "'");
  std::string text = builtin_definition(name);
  if (const auto race = schema.find("race"); race && race->level == Level::kIndividual) {
    std::string codes = "[";
    for (int c = 2; c <= schema.var(*race).cardinality; ++c) codes += (c > 2 ? "," : "") + std::to_string(c);
    codes += "]";
    for (auto pos = text.find("\"NONWHITE\""); pos != std::string::npos; pos = text.find("\"NONWHITE\""))
      text.replace(pos, 10, codes);
  }
  json j = json::parse(text);
  j["name"] = name;
  try {
    return query_from_json(j, schema);
  } catch (const InputError&) {
    return std::nullopt;  // schema lacks a variable or category the query needs
  }
}

std::vector<HouseholdQuery> builtin_household_queries(const Schema& schema) {
  std::vector<HouseholdQuery> out;
  for (const auto& name : roster())
    if (auto q = builtin_household_query(name, schema)) out.push_back(std::move(*q));
  return out;
}

namespace {

// Counts for every cell of one variable combination in a single pass.
std::vector<std::size_t> combination_counts(const Dataset& data, const std::vector<Schema::VarRef>& vars,
                                            bool individual, std::size_t& n) {
  std::size_t cells = 1;
  for (const auto& v : vars) cells *= static_cast<std::size_t>(data.schema.var(v).cardinality);
  std::vector<std::size_t> counts(cells, 0);
  n = 0;
  auto index = [&](const HouseholdRecord& r, const std::vector<int>* person) {
    std::size_t idx = 0;
    for (const auto& v : vars) {
      const int value = v.level == Level::kHousehold ? r.household_values[v.index] : (*person)[v.index];
      idx = idx * static_cast<std::size_t>(data.schema.var(v).cardinality) + static_cast<std::size_t>(value);
    }
    return idx;
  };
  for (const auto& r : data.households) {
    if (individual) {
      for (const auto& person : r.members) {
        ++counts[index(r, &person)];
        ++n;
      }
    } else {
      ++counts[index(r, nullptr)];
      ++n;
    }
  }
  return counts;
}

void check_shared_schema(const Dataset& original, const SyntheticReplicates& synthetic) {
  if (synthetic.replicates.size() < 2) throw InputError("utility reports need at least 2 synthetic replicates");
  const std::string reference = schema_to_json(original.schema);
  for (const auto& z : synthetic.replicates)
    if (schema_to_json(z.schema) != reference) throw InputError("synthetic replicate schema differs from the original");
}

}  // namespace

std::vector<ReportRow> cell_report(const Dataset& original, const SyntheticReplicates& synthetic, int max_order,
                                   double threshold, double gamma, const Dataset* population) {
  if (max_order < 1 || max_order > 3) throw InputError("max_order must be 1, 2 or 3");
  check_gamma(gamma);
  check_shared_schema(original, synthetic);
  const Schema& schema = original.schema;
  std::vector<Schema::VarRef> all;
  for (std::size_t k = 0; k < schema.q(); ++k) all.push_back({Level::kHousehold, k});
  for (std::size_t k = 0; k < schema.p(); ++k) all.push_back({Level::kIndividual, k});

  std::vector<ReportRow> rows;
  std::vector<std::size_t> pick;
  auto emit = [&] {
    std::vector<Schema::VarRef> vars;
    for (auto i : pick) vars.push_back(all[i]);
    const bool individual =
        std::any_of(vars.begin(), vars.end(), [](const auto& v) { return v.level == Level::kIndividual; });
    std::size_t n_orig = 0;
    const auto orig = combination_counts(original, vars, individual, n_orig);
    if (n_orig == 0) throw InputError("original dataset is empty");
    std::vector<std::vector<std::size_t>> syn;
    std::vector<std::size_t> n_syn(synthetic.replicates.size());
    for (std::size_t l = 0; l < synthetic.replicates.size(); ++l)
      syn.push_back(combination_counts(synthetic.replicates[l], vars, individual, n_syn[l]));
    std::vector<std::size_t> truth;
    std::size_t n_truth = 0;
    if (population) truth = combination_counts(*population, vars, individual, n_truth);

    CellQuery cell{vars, std::vector<int>(vars.size(), 0)};
    for (std::size_t idx = 0; idx < orig.size(); ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = vars.size(); i-- > 0;) {
        const auto d = static_cast<std::size_t>(schema.var(vars[i]).cardinality);
        cell.codes[i] = static_cast<int>(rest % d);
        rest /= d;
      }
      if (static_cast<double>(orig[idx]) < threshold) continue;  // q * n is the count itself
      ReportRow row;
      row.query = cell.label(schema);
      row.original = binomial(orig[idx], n_orig, row.query);
      std::tie(row.lo_orig, row.hi_orig) = normal_interval(row.original, gamma);
      std::vector<Estimate> per;
      for (std::size_t l = 0; l < syn.size(); ++l) per.push_back(binomial(syn[l][idx], n_syn[l], row.query));
      row.synthetic = combine_or_point(per, gamma);
      if (population && n_truth > 0) row.truth = static_cast<double>(truth[idx]) / static_cast<double>(n_truth);
      rows.push_back(std::move(row));
    }
  };
  for (int order = 1; order <= max_order; ++order) {
    if (static_cast<std::size_t>(order) > all.size()) break;
    pick.resize(static_cast<std::size_t>(order));
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    while (true) {
      emit();
      // next combination in lexicographic order
      std::size_t i = pick.size();
      while (i-- > 0 && pick[i] == all.size() - pick.size() + i) {
      }
      if (i == static_cast<std::size_t>(-1)) break;
      ++pick[i];
      for (std::size_t j = i + 1; j < pick.size(); ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return rows;
}

std::vector<ReportRow> household_report(const Dataset& original, const SyntheticReplicates& synthetic,
                                        const std::vector<HouseholdQuery>& queries, double gamma,
                                        const Dataset* population) {
  check_gamma(gamma);
  check_shared_schema(original, synthetic);
  std::vector<ReportRow> rows;
  for (const auto& query : queries) {
    ReportRow row;
    row.query = query.name;
    row.original = estimate_proportion(original, query);
    std::tie(row.lo_orig, row.hi_orig) = normal_interval(row.original, gamma);
    std::vector<Estimate> per;
    for (const auto& z : synthetic.replicates) per.push_back(estimate_proportion(z, query));
    row.synthetic = combine_or_point(per, gamma);
    if (population) row.truth = estimate_proportion(*population, query).q;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  std::ostringstream s;
  s << std::setprecision(10);
  s << "query,Q_truth,q_orig,lo_orig,hi_orig,q_syn,lo_syn,hi_syn\n";
  for (const auto& r : rows) {
    s << r.query << ',';
    if (r.truth) s << *r.truth;
    s << ',' << r.original.q << ',' << r.lo_orig << ',' << r.hi_orig << ',' << r.synthetic.q_bar << ','
      << r.synthetic.lo << ',' << r.synthetic.hi << '\n';
  }
  out << s.str();
}

}  // namespace ndpmpm
