#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "liesym/expr/expr.hpp"

namespace liesym::expr {

using Values = std::map<std::string, double>;

/// Callback giving a numeric value for an unknown-function (or derivative)
/// node at the current point.
using FunctionValue = std::function<double(const Expr& node, const Values& values)>;

/// Floating evaluation. Throws UnknownNameError for an unbound symbol and
/// Error for an unknown function when no callback is given.
double evaluate(const Expr& e, const Values& values, const FunctionValue& functions = {});

/// An expression flattened to a postfix program over a fixed variable order.
/// Symbols not in the variable list must be bound in `constants`.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, std::vector<std::string> variables, const Values& constants = {});

  double operator()(std::span<const double> point) const;
  double operator()(std::initializer_list<double> point) const {
    return (*this)(std::span<const double>(point.begin(), point.size()));
  }

  const std::vector<std::string>& variables() const { return variables_; }

 private:
  enum class Op : std::uint8_t { constant, variable, add, mul, pow, exp, log };
  struct Instr {
    Op op;
    double value = 0;
    std::size_t index = 0;
  };
  void emit(const Expr& e, const Values& constants);

  std::vector<std::string> variables_;
  std::vector<Instr> code_;
  std::size_t depth_ = 0;
};

}  // namespace liesym::expr
