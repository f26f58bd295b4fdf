#pragma once

#include <string>
#include <vector>

#include "liesym/determining/problem.hpp"
#include "liesym/expr/expr.hpp"
#include "liesym/expr/symbol_table.hpp"

namespace liesym::determining {

struct Residual {
  std::string label;
  expr::Expr expr;  ///< required to vanish identically
};

struct DeterminingSystem {
  std::vector<Residual> residuals;
  std::vector<std::string> side_constraints;
  std::vector<std::string> indeterminates;
  expr::SymbolTable table;
  bool fbsde = false;
};

/// Single residual of the BSDE determining equation, with tau = h_t/2 and
/// the time integral of 2 tau written as h.
expr::Expr bsde_determining(const BsdeProblem& p);

DeterminingSystem bsde_system(const BsdeProblem& p);

/// Drift, diffusion and generator residuals of the uncoupled FBSDE.
DeterminingSystem fbsde_determining(const FbsdeProblem& p);

/// One coefficient of a split residual.
struct SplitTerm {
  std::string source;        ///< residual label
  std::vector<int> degrees;  ///< degree per indeterminate
  expr::Expr coefficient;
};

/// Coefficients of `e` as a polynomial in the indeterminates (nested, in
/// order, by descending degree). Zero coefficients are dropped.
std::vector<expr::Expr> split_identity(const expr::Expr& e,
                                       const std::vector<std::string>& indeterminates);
std::vector<expr::Expr> split_identity(const DeterminingSystem& sys);
std::vector<SplitTerm> split_terms(const DeterminingSystem& sys);

}  // namespace liesym::determining
