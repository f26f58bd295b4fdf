#pragma once

#include <optional>
#include <string>
#include <vector>

#include "liesym/determining/determining.hpp"
#include "liesym/expr/expr.hpp"

namespace liesym::solver {

/// Infinitesimals as concrete expressions in (t,y) or (t,x,y); tau = h_t/2.
struct SymmetryCandidate {
  expr::Expr gamma;
  expr::Expr h;
  std::optional<expr::Expr> xi;
};

/// Reads `gamma = "..."`, `h = "..."` and optionally `xi = "..."`.
SymmetryCandidate parse_candidate(const std::string& text, const expr::SymbolTable& table,
                                  const std::string& file = "<candidate>");
SymmetryCandidate load_candidate(const std::string& path, const expr::SymbolTable& table);

struct ResidualCheck {
  std::string label;
  expr::Expr residual;                    ///< simplified, candidate substituted
  std::vector<expr::Expr> coefficients;   ///< split coefficients after substitution
  bool split = false;                     ///< false if the residual was not polynomial
  bool exact_zero = false;
  double max_sampled = 0;                 ///< max |residual| over the sample points
};

struct CandidateReport {
  std::vector<ResidualCheck> residuals;
  expr::Expr h_at_zero;
  bool initial_condition = false;  ///< h(0,.) simplifies to 0
  bool numeric_agrees = false;     ///< sampled verdict matches the exact one
  bool pass = false;               ///< all residuals exactly 0 and h(0,.) = 0
};

/// Substitutes the candidate into every residual. Sampling uses `points`
/// random points, symbolic constants without a value get 1.3.
CandidateReport verify_candidate(const determining::DeterminingSystem& sys,
                                 const SymmetryCandidate& c, std::uint64_t seed = 1,
                                 int points = 100);

struct SymmetrySolution {
  std::vector<SymmetryCandidate> basis;
  std::vector<std::string> free_components;
  std::string note;
  /// Basis per constrained unknown, e.g. gamma -> {1, exp(-2*y)}.
  std::vector<std::pair<std::string, std::vector<expr::Expr>>> unknown_bases;
};

/// Solves split coefficients, each a constant-coefficient linear ODE in a
/// single variable for a single unknown. `unknowns` lists the unknown
/// functions with their argument lists; unknowns that never appear are free.
/// Throws OutOfClassError outside that class.
SymmetrySolution solve_constant_coeff(
    const std::vector<expr::Expr>& split,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& unknowns);

SymmetrySolution solve_constant_coeff(const determining::DeterminingSystem& sys);

struct TerminalCheck {
  expr::Expr residual;  ///< gamma(t,x,H(x)) - H_x(x) xi(t,x,H(x))
  bool pass = false;
};

TerminalCheck terminal_compatibility(const determining::FbsdeProblem& p,
                                     const SymmetryCandidate& c);

}  // namespace liesym::solver
