#pragma once

#include <map>
#include <string>
#include <vector>

#include "liesym/expr/expr.hpp"

namespace liesym::expr {

/// Canonical form: literal folding, 0/1 identities, flattened and sorted
/// add/mul, like-term and like-base collection with exact coefficients,
/// full distribution of products over sums, exp/ln cancellation on
/// matching arguments. The result is a fixed point.
///
/// Integer powers of sums up to degree 16 are expanded; other powers of
/// sums are kept with their leading coefficient pulled out so that equal
/// bases compare equal.
Expr simplify_basic(const Expr& e);

/// Exact partial derivative in `s`, simplified. Unknown-function
/// applications become derivative nodes.
Expr differentiate(const Expr& e, const std::string& s, int order = 1);

struct FunctionBinding {
  std::vector<std::string> params;
  Expr body;
};

struct Bindings {
  std::map<std::string, Expr> symbols;
  std::map<std::string, FunctionBinding> functions;
};

/// Simultaneous substitution, simplified afterwards.
///
/// A bound unknown function f(params) := body replaces every application
/// f(args) by body with params renamed to args; derivative nodes of f are
/// expanded by differentiating that body. Symbol bindings also apply to the
/// arguments of the expanded body. Throws ArityError when a binding's
/// parameter count differs from an application's.
Expr substitute(const Expr& e, const Bindings& bindings);

/// Convenience for symbol-only substitution.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& symbols);

/// Coefficients of `e` as a polynomial in `s`, keyed by degree; zero
/// coefficients are omitted. Throws NotPolynomialError naming the first
/// offending subterm.
std::map<int, Expr> collect_polynomial(const Expr& e, const std::string& s);

}  // namespace liesym::expr
