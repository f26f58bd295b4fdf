#pragma once

#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "liesym/expr/number.hpp"

namespace liesym::expr {

/// Registry of the names an expression may mention.
///
/// Independent variables are ordered; constants may carry a numeric value
/// used for evaluation; unknown functions carry their argument list.
class SymbolTable {
 public:
  SymbolTable() = default;
  SymbolTable(std::initializer_list<std::string> variables);

  SymbolTable& add_variable(const std::string& name);
  SymbolTable& add_constant(const std::string& name, std::optional<Number> value = std::nullopt);
  SymbolTable& add_function(const std::string& name, std::vector<std::string> args);

  bool has_symbol(const std::string& name) const;
  bool is_variable(const std::string& name) const;
  bool is_constant(const std::string& name) const;
  bool has_function(const std::string& name) const;

  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<std::string>& function_args(const std::string& name) const;
  std::optional<Number> constant_value(const std::string& name) const;
  std::vector<std::string> constants() const;
  std::vector<std::string> functions() const;

 private:
  void check_fresh(const std::string& name) const;

  std::vector<std::string> variables_;
  std::map<std::string, std::optional<Number>> constants_;
  std::map<std::string, std::vector<std::string>> functions_;
};

}  // namespace liesym::expr
