#pragma once

#include <string_view>

#include "liesym/expr/expr.hpp"
#include "liesym/expr/symbol_table.hpp"

namespace liesym::expr {

/// Parses the expression grammar
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          (right associative)
///   primary := number | name | name '(' args ')' | '(' expr ')'
///
/// Integers and p/q quotients of integers stay exact; literals with a
/// decimal point or exponent are floating. `exp`, `ln` and `sqrt` are
/// builtin. Unknown functions must be applied to registered variables; the
/// form `f_xy(t,x,y)` denotes the partial derivative of f in x then y.
///
/// Throws ParseError (with byte offset) or UnknownNameError.
Expr parse(std::string_view text, const SymbolTable& table);

}  // namespace liesym::expr
