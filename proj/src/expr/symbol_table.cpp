#include "liesym/expr/symbol_table.hpp"

#include <algorithm>

#include "liesym/error.hpp"

namespace liesym::expr {

namespace {
const char* const reserved[] = {"exp", "ln", "sqrt"};
}

SymbolTable::SymbolTable(std::initializer_list<std::string> variables) {
  for (const auto& v : variables) add_variable(v);
}

void SymbolTable::check_fresh(const std::string& name) const {
  if (name.empty()) throw Error("empty name");
  for (const char* r : reserved) {
    if (name == r) throw Error("'" + name + "' is a reserved function name");
  }
  if (has_symbol(name) || has_function(name)) throw Error("name '" + name + "' registered twice");
}

SymbolTable& SymbolTable::add_variable(const std::string& name) {
  check_fresh(name);
  variables_.push_back(name);
  return *this;
}

SymbolTable& SymbolTable::add_constant(const std::string& name, std::optional<Number> value) {
  check_fresh(name);
  constants_.emplace(name, value);
  return *this;
}

SymbolTable& SymbolTable::add_function(const std::string& name, std::vector<std::string> args) {
  check_fresh(name);
  for (const auto& a : args) {
    if (!is_variable(a)) throw UnknownNameError(a);
  }
  functions_.emplace(name, std::move(args));
  return *this;
}

bool SymbolTable::has_symbol(const std::string& name) const {
  return is_variable(name) || is_constant(name);
}

bool SymbolTable::is_variable(const std::string& name) const {
  return std::find(variables_.begin(), variables_.end(), name) != variables_.end();
}

bool SymbolTable::is_constant(const std::string& name) const { return constants_.contains(name); }

bool SymbolTable::has_function(const std::string& name) const { return functions_.contains(name); }

const std::vector<std::string>& SymbolTable::function_args(const std::string& name) const {
  auto it = functions_.find(name);
  if (it == functions_.end()) throw UnknownNameError(name);
  return it->second;
}

std::optional<Number> SymbolTable::constant_value(const std::string& name) const {
  auto it = constants_.find(name);
  if (it == constants_.end()) throw UnknownNameError(name);
  return it->second;
}

std::vector<std::string> SymbolTable::constants() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : constants_) out.push_back(k);
  return out;
}

std::vector<std::string> SymbolTable::functions() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : functions_) out.push_back(k);
  return out;
}

}  // namespace liesym::expr
