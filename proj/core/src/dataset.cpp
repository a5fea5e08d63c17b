#include "ndpmpm/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "ndpmpm/error.hpp"

namespace ndpmpm {

std::size_t Dataset::num_individuals() const {
  std::size_t total = 0;
  for (const auto& h : households) total += h.size();
  return total;
}

std::string record_problem(const Schema& schema, const HouseholdRecord& record) {
  if (record.household_values.size() != schema.q()) return "wrong number of household values";
  if (record.members.empty()) return "household has no members";
  for (std::size_t k = 0; k < schema.q(); ++k) {
    const int code = record.household_values[k];
    if (code < 0 || code >= schema.household_vars[k].cardinality)
      return "out-of-range code for '" + schema.household_vars[k].name + "'";
  }
  const int size_code = record.household_values[schema.size_var_index] + 1;
  if (static_cast<std::size_t>(size_code) != record.members.size())
    return "size mismatch: size variable codes " + std::to_string(size_code) + " but household has " +
           std::to_string(record.members.size()) + " members";
  for (const auto& member : record.members) {
    if (member.size() != schema.p()) return "wrong number of individual values";
    for (std::size_t k = 0; k < schema.p(); ++k)
      if (member[k] < 0 || member[k] >= schema.individual_vars[k].cardinality)
        return "out-of-range code for '" + schema.individual_vars[k].name + "'";
  }
  return {};
}

void Dataset::validate() const {
  std::unordered_set<std::string> ids;
  for (const auto& h : households) {
    if (!ids.insert(h.household_id).second) throw InputError("duplicate household_id '" + h.household_id + "'");
    if (auto problem = record_problem(schema, h); !problem.empty())
      throw InputError("household '" + h.household_id + "': " + problem);
  }
}

SizeHistogram size_histogram(const Dataset& data) {
  SizeHistogram hist;
  for (const auto& h : data.households) ++hist[static_cast<int>(h.size())];
  return hist;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Dataset read_dataset(std::istream& in, const Schema& schema, const std::string& source) {
  schema.validate();
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file (missing header)");
  const auto header = split(line);

  // Column positions for id, person index and each variable.
  const std::size_t q = schema.q();
  const std::size_t p = schema.p();
  std::ptrdiff_t id_col = -1;
  std::ptrdiff_t person_col = -1;
  std::vector<std::ptrdiff_t> hh_col(q, -1);
  std::vector<std::ptrdiff_t> ind_col(p, -1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = header[c];
    if (name == "household_id") {
      id_col = static_cast<std::ptrdiff_t>(c);
      continue;
    }
    if (name == "person_index") {
      person_col = static_cast<std::ptrdiff_t>(c);
      continue;
    }
    const auto ref = schema.find(name);
    if (!ref) throw InputError(source + ": unknown column '" + std::string(name) + "'");
    (ref->level == Level::kHousehold ? hh_col : ind_col)[ref->index] = static_cast<std::ptrdiff_t>(c);
  }
  if (id_col < 0) throw InputError(source + ": missing household_id column");
  if (person_col < 0) throw InputError(source + ": missing person_index column");
  for (std::size_t k = 0; k < q; ++k)
    if (hh_col[k] < 0) throw InputError(source + ": missing column '" + schema.household_vars[k].name + "'");
  for (std::size_t k = 0; k < p; ++k)
    if (ind_col[k] < 0) throw InputError(source + ": missing column '" + schema.individual_vars[k].name + "'");

  Dataset data;
  data.schema = schema;
  std::unordered_map<std::string, std::size_t> index_of;
  std::size_t line_no = 1;

  auto parse_code = [&](std::string_view field, const VariableSpec& var) {
    if (field.empty()) throw InputError(source + ":" + std::to_string(line_no) + ": missing value for '" + var.name + "'");
    int value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
      throw InputError(source + ":" + std::to_string(line_no) + ": non-integer code '" + std::string(field) +
                       "' for '" + var.name + "'");
    if (value < 1 || value > var.cardinality)
      throw InputError(source + ":" + std::to_string(line_no) + ": out-of-range code " + std::to_string(value) +
                       " for '" + var.name + "'");
    return value - 1;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw InputError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    const std::string id(fields[id_col]);
    if (id.empty()) throw InputError(source + ":" + std::to_string(line_no) + ": missing household_id");

    std::vector<int> hh(q);
    for (std::size_t k = 0; k < q; ++k) hh[k] = parse_code(fields[hh_col[k]], schema.household_vars[k]);
    std::vector<int> person(p);
    for (std::size_t k = 0; k < p; ++k) person[k] = parse_code(fields[ind_col[k]], schema.individual_vars[k]);

    auto [it, inserted] = index_of.try_emplace(id, data.households.size());
    if (inserted) {
      data.households.push_back(HouseholdRecord{id, std::move(hh), {}});
    } else if (data.households[it->second].household_values != hh) {
      throw InputError(source + ":" + std::to_string(line_no) + ": inconsistent household variable within household '" +
                       id + "'");
    }
    data.households[it->second].members.push_back(std::move(person));
  }

  for (const auto& h : data.households) {
    const int size_code = h.household_values[schema.size_var_index] + 1;
    if (static_cast<std::size_t>(size_code) != h.size())
      throw InputError(source + ": size mismatch in household '" + h.household_id + "': size variable codes " +
                       std::to_string(size_code) + " but household has " + std::to_string(h.size()) + " rows");
  }
  return data;
}

Dataset load_dataset(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  return read_dataset(in, schema, path);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  const auto& schema = data.schema;
  out << "household_id,person_index";
  for (const auto& v : schema.household_vars) out << ',' << v.name;
  for (const auto& v : schema.individual_vars) out << ',' << v.name;
  out << '\n';
  for (const auto& h : data.households) {
    for (std::size_t j = 0; j < h.size(); ++j) {
      out << h.household_id << ',' << (j + 1);
      for (int code : h.household_values) out << ',' << (code + 1);
      for (int code : h.members[j]) out << ',' << (code + 1);
      out << '\n';
    }
  }
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_dataset(out, data);
  if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace ndpmpm
