#include "ndpmpm/rules.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include "ndpmpm/error.hpp"

namespace ndpmpm {

RuleSet::RuleSet(Schema schema, std::vector<Rule> rules) : schema_(std::move(schema)), rules_(std::move(rules)) {}

namespace {

bool contains(const std::vector<int>& codes, int code) {
  return std::find(codes.begin(), codes.end(), code) != codes.end();
}

struct RuleChecker {
  const HouseholdRecord& record;

  bool operator()(const ExactlyOneOfRole& r) const {
    std::size_t count = 0;
    for (const auto& m : record.members) count += m[r.role_var] == r.role_code;
    return count == 1;
  }
  bool operator()(const MinValueForRole& r) const {
    for (const auto& m : record.members)
      if (m[r.role_var] == r.role_code && m[r.target_var] < r.threshold) return false;
    return true;
  }
  bool operator()(const PairwiseOrderByRole& r) const {
    const auto& ms = record.members;
    for (std::size_t a = 0; a < ms.size(); ++a) {
      if (!contains(r.lower_roles, ms[a][r.role_var])) continue;
      for (std::size_t b = 0; b < ms.size(); ++b) {
        if (a == b || !contains(r.upper_roles, ms[b][r.role_var])) continue;
        if (ms[a][r.target_var] + r.min_gap > ms[b][r.target_var]) return false;
      }
    }
    return true;
  }
  bool operator()(const ForbiddenCombination& r) const {
    bool has_individual = false;
    for (const auto& c : r.conditions) {
      if (c.var.level == Level::kHousehold) {
        if (record.household_values[c.var.index] != c.code) return true;
      } else {
        has_individual = true;
      }
    }
    if (!has_individual) return false;
    for (const auto& m : record.members) {
      bool match = true;
      for (const auto& c : r.conditions)
        if (c.var.level == Level::kIndividual && m[c.var.index] != c.code) match = false;
      if (match) return false;
    }
    return true;
  }
};

// ---- rule document parser ----

class Lexer {
 public:
  Lexer(std::string_view line, std::size_t line_no) : line_no_(line_no) {
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '>' && i + 1 < line.size() && line[i + 1] == '=') {
        tokens_.emplace_back(">=");
        i += 2;
      } else if (std::string_view("=<>:{},()").find(c) != std::string_view::npos) {
        tokens_.emplace_back(1, c);
        ++i;
      } else {
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
               std::string_view("=<>:{},()").find(line[j]) == std::string_view::npos)
          ++j;
        tokens_.emplace_back(line.substr(i, j - i));
        i = j;
      }
    }
  }

  bool done() const { return pos_ >= tokens_.size(); }
  const std::string& peek() const {
    static const std::string kEnd;
    return done() ? kEnd : tokens_[pos_];
  }
  std::string next() {
    if (done()) fail("unexpected end of rule");
    return tokens_[pos_++];
  }
  void expect(std::string_view token) {
    const auto got = next();
    if (got != token) fail("expected '" + std::string(token) + "' but found '" + got + "'");
  }
  bool accept(std::string_view token) {
    if (!done() && tokens_[pos_] == token) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& message) const {
    throw InputError("rules line " + std::to_string(line_no_) + ": " + message);
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
};

class RuleParser {
 public:
  RuleParser(const Schema& schema, Lexer& lex) : schema_(schema), lex_(lex) {}

  Rule parse() {
    const auto kind = lex_.next();
    Rule rule;
    if (kind == "exactly_one") {
      const auto role = individual_var();
      lex_.expect("=");
      rule = ExactlyOneOfRole{role, code(schema_.individual_vars[role])};
    } else if (kind == "min_value") {
      const auto target = individual_var();
      lex_.expect(">=");
      const int threshold = code(schema_.individual_vars[target]);
      lex_.expect("when");
      const auto role = individual_var();
      lex_.expect("=");
      rule = MinValueForRole{target, threshold, role, code(schema_.individual_vars[role])};
    } else if (kind == "order") {
      const auto target = individual_var();
      lex_.expect(":");
      auto lower = code_words();
      lex_.expect("<");
      auto upper = code_words();
      lex_.expect("by");
      const auto role = individual_var();
      PairwiseOrderByRole r{target, role, resolve(lower, role), resolve(upper, role), 1};
      if (lex_.accept("gap")) {
        const auto word = lex_.next();
        const bool digits = !word.empty() && std::all_of(word.begin(), word.end(), [](char ch) {
          return std::isdigit(static_cast<unsigned char>(ch));
        });
        if (!digits || word.size() > 6 || std::stoi(word) < 1) lex_.fail("malformed gap '" + word + "'");
        r.min_gap = std::stoi(word);
      }
      rule = std::move(r);
    } else if (kind == "forbid") {
      ForbiddenCombination r;
      do {
        const auto name = lex_.next();
        const auto ref = schema_.find(name);
        if (!ref) lex_.fail("unknown variable '" + name + "'");
        lex_.expect("=");
        r.conditions.push_back({*ref, code(schema_.var(*ref))});
      } while (lex_.accept(","));
      rule = std::move(r);
    } else {
      lex_.fail("unknown rule kind '" + kind + "'");
    }
    if (!lex_.done()) lex_.fail("trailing input '" + lex_.peek() + "'");
    return rule;
  }

 private:
  std::size_t individual_var() {
    const auto name = lex_.next();
    const auto ref = schema_.find(name);
    if (!ref) lex_.fail("unknown variable '" + name + "'");
    if (ref->level != Level::kIndividual) lex_.fail("variable '" + name + "' must be individual-level");
    return ref->index;
  }

  // Reads one code token (possibly `code(N)`) without resolving it.
  std::string code_word() {
    auto word = lex_.next();
    if (word == "code" && lex_.accept("(")) {
      word = lex_.next();
      lex_.expect(")");
    }
    return word;
  }

  std::vector<std::string> code_words() {
    std::vector<std::string> words;
    if (lex_.accept("{")) {
      do words.push_back(code_word());
      while (lex_.accept(","));
      lex_.expect("}");
    } else {
      words.push_back(code_word());
    }
    return words;
  }

  int resolve_word(const std::string& word, const VariableSpec& var) const {
    const bool digits = !word.empty() && std::all_of(word.begin(), word.end(), [](char ch) {
      return std::isdigit(static_cast<unsigned char>(ch));
    });
    if (digits) {
      if (word.size() > 9 || std::stoi(word) < 1 || std::stoi(word) > var.cardinality)
        lex_.fail("unknown code " + word + " for '" + var.name + "'");
      return std::stoi(word) - 1;
    }
    if (auto c = var.code_of(word)) return *c;
    lex_.fail("unknown code '" + word + "' for '" + var.name + "'");
  }

  std::vector<int> resolve(const std::vector<std::string>& words, std::size_t var) const {
    std::vector<int> out;
    for (const auto& w : words) out.push_back(resolve_word(w, schema_.individual_vars[var]));
    return out;
  }

  int code(const VariableSpec& var) { return resolve_word(code_word(), var); }

  const Schema& schema_;
  Lexer& lex_;
};

}  // namespace

bool RuleSet::feasible(const HouseholdRecord& record) const {
  const RuleChecker checker{record};
  for (const auto& rule : rules_)
    if (!std::visit(checker, rule)) return false;
  return true;
}

bool check_household(const HouseholdRecord& record, const RuleSet& rules) { return rules.feasible(record); }

RuleSet compile_rules(std::string_view text, const Schema& schema) {
  std::vector<Rule> rules;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    Lexer lex(line, line_no);
    if (lex.done()) continue;
    rules.push_back(RuleParser(schema, lex).parse());
  }
  return RuleSet(schema, std::move(rules));
}

RuleSet load_rules(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open rules file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return compile_rules(buffer.str(), schema);
}

std::uint64_t cell_count(const Schema& schema, int h) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  auto multiply = [&](std::uint64_t factor) {
    total = (factor != 0 && total > kMax / factor) ? kMax : total * factor;
  };
  for (std::size_t k = 0; k < schema.q(); ++k)
    if (k != schema.size_var_index) multiply(static_cast<std::uint64_t>(schema.household_vars[k].cardinality));
  for (int j = 0; j < h; ++j)
    for (const auto& v : schema.individual_vars) multiply(static_cast<std::uint64_t>(v.cardinality));
  return total;
}

void for_each_cell(const Schema& schema, const RuleSet& rules, int h, std::uint64_t cap,
                   const std::function<void(const HouseholdRecord&, bool)>& visit) {
  if (h < 1 || h > schema.max_size()) throw InputError("household size " + std::to_string(h) + " not representable");
  const auto total = cell_count(schema, h);
  if (total > cap)
    throw InputError("enumeration cap exceeded: " + std::to_string(total) + " cells for size " + std::to_string(h));

  HouseholdRecord record;
  record.household_values.assign(schema.q(), 0);
  record.household_values[schema.size_var_index] = h - 1;
  record.members.assign(static_cast<std::size_t>(h), std::vector<int>(schema.p(), 0));

  // Odometer over every free coordinate: non-size household variables, then members.
  struct Digit {
    int* value;
    int cardinality;
  };
  std::vector<Digit> digits;
  for (std::size_t k = 0; k < schema.q(); ++k)
    if (k != schema.size_var_index) digits.push_back({&record.household_values[k], schema.household_vars[k].cardinality});
  for (auto& member : record.members)
    for (std::size_t k = 0; k < schema.p(); ++k) digits.push_back({&member[k], schema.individual_vars[k].cardinality});

  for (;;) {
    visit(record, rules.feasible(record));
    std::size_t d = 0;
    while (d < digits.size()) {
      if (++*digits[d].value < digits[d].cardinality) break;
      *digits[d].value = 0;
      ++d;
    }
    if (d == digits.size()) return;
  }
}

FeasibleEnumeration enumerate_feasible(const Schema& schema, const RuleSet& rules, int h, std::uint64_t cap,
                                       const std::function<void(const HouseholdRecord&)>& visit) {
  FeasibleEnumeration result;
  for_each_cell(schema, rules, h, cap, [&](const HouseholdRecord& record, bool feasible) {
    ++result.total;
    if (feasible) {
      ++result.feasible;
      if (visit) visit(record);
    }
  });
  return result;
}

}  // namespace ndpmpm
