#include "ndpmpm/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ndpmpm/error.hpp"

namespace ndpmpm {

using nlohmann::json;

std::optional<int> VariableSpec::code_of(std::string_view label) const {
  for (std::size_t c = 0; c < labels.size(); ++c)
    if (labels[c] == label) return static_cast<int>(c);
  return std::nullopt;
}

void Schema::validate() const {
  if (household_vars.empty()) throw InputError("schema: at least one household variable is required");
  if (individual_vars.empty()) throw InputError("schema: at least one individual variable is required");
  if (size_var_index >= household_vars.size()) throw InputError("schema: missing size variable");
  std::set<std::string> names;
  auto check = [&](const VariableSpec& v) {
    if (v.name.empty()) throw InputError("schema: variable with empty name");
    if (!names.insert(v.name).second) throw InputError("schema: duplicate variable name '" + v.name + "'");
    if (v.cardinality < 2)
      throw InputError("schema: variable '" + v.name + "' has cardinality < 2");
    if (!v.labels.empty() && v.labels.size() != static_cast<std::size_t>(v.cardinality))
      throw InputError("schema: variable '" + v.name + "' has " + std::to_string(v.labels.size()) +
                       " labels for cardinality " + std::to_string(v.cardinality));
  };
  for (const auto& v : household_vars) check(v);
  for (const auto& v : individual_vars) check(v);
}

std::optional<Schema::VarRef> Schema::find(std::string_view name) const {
  for (std::size_t k = 0; k < household_vars.size(); ++k)
    if (household_vars[k].name == name) return VarRef{Level::kHousehold, k};
  for (std::size_t k = 0; k < individual_vars.size(); ++k)
    if (individual_vars[k].name == name) return VarRef{Level::kIndividual, k};
  return std::nullopt;
}

const VariableSpec& Schema::var(VarRef ref) const {
  return ref.level == Level::kHousehold ? household_vars.at(ref.index) : individual_vars.at(ref.index);
}

namespace {

std::vector<VariableSpec> parse_vars(const json& list, Level level, const char* key) {
  if (!list.is_array()) throw InputError(std::string("schema: '") + key + "' must be a list");
  std::vector<VariableSpec> out;
  for (const auto& item : list) {
    VariableSpec v;
    v.level = level;
    v.name = item.at("name").get<std::string>();
    v.cardinality = item.at("cardinality").get<int>();
    if (item.contains("labels")) v.labels = item.at("labels").get<std::vector<std::string>>();
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

Schema parse_schema(std::string_view text) {
  Schema schema;
  try {
    const json doc = json::parse(text);
    schema.household_vars = parse_vars(doc.at("household_variables"), Level::kHousehold, "household_variables");
    schema.individual_vars = parse_vars(doc.at("individual_variables"), Level::kIndividual, "individual_variables");
    if (!doc.contains("size_variable")) throw InputError("schema: missing size variable");
    const auto size_name = doc.at("size_variable").get<std::string>();
    schema.size_var_index = schema.household_vars.size();
    for (std::size_t k = 0; k < schema.household_vars.size(); ++k)
      if (schema.household_vars[k].name == size_name) schema.size_var_index = k;
    if (schema.size_var_index == schema.household_vars.size())
      throw InputError("schema: missing size variable '" + size_name + "' among household variables");
  } catch (const json::exception& e) {
    throw InputError(std::string("schema: ") + e.what());
  }
  schema.validate();
  return schema;
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_schema(buffer.str());
}

std::string schema_to_json(const Schema& schema) {
  auto vars = [](const std::vector<VariableSpec>& list) {
    json out = json::array();
    for (const auto& v : list) {
      json item = {{"name", v.name}, {"cardinality", v.cardinality}};
      if (!v.labels.empty()) item["labels"] = v.labels;
      out.push_back(std::move(item));
    }
    return out;
  };
  json doc = {{"household_variables", vars(schema.household_vars)},
              {"individual_variables", vars(schema.individual_vars)},
              {"size_variable", schema.household_vars.at(schema.size_var_index).name}};
  return doc.dump(2);
}

}  // namespace ndpmpm
