#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "liesym/expr/eval.hpp"
#include "liesym/expr/expr.hpp"
#include "liesym/expr/symbol_table.hpp"

namespace liesym::determining {

/// A named constant declared by a problem file (`const C = 3`). Without a
/// value it stays symbolic and is treated as generic nonzero.
struct Constant {
  std::string name;
  std::optional<expr::Number> value;
};

/// dY = -g(t,Y,Z) dt + Z dB on [0,T], Y_T = H(B_T).
struct BsdeProblem {
  expr::Expr g;
  expr::Expr H;  ///< in the symbol `x`
  double T = 1.0;
  std::vector<Constant> constants;
};

/// dX = b dt + sigma dB, X_0 = x0; dY = -g(t,X,Y,Z) dt + Z dB, Y_T = H(X_T).
struct FbsdeProblem {
  expr::Expr b;
  expr::Expr sigma;
  expr::Expr g;
  expr::Expr H;  ///< in the symbol `x`
  double T = 1.0;
  double x0 = 0.0;
  std::vector<Constant> constants;
};

using Problem = std::variant<BsdeProblem, FbsdeProblem>;

/// Names for the unknown infinitesimals.
inline constexpr const char* gamma_name = "gamma";
inline constexpr const char* h_name = "h";
inline constexpr const char* xi_name = "xi";
inline constexpr const char* terminal_var = "x";

/// Tables used for parsing. The BSDE table has variables t,y,z and the
/// unknowns gamma(t,y), h(t,y); the FBSDE table adds x and xi(t,x,y).
expr::SymbolTable bsde_table(const std::vector<Constant>& constants);
expr::SymbolTable fbsde_table(const std::vector<Constant>& constants);
expr::SymbolTable terminal_table(const std::vector<Constant>& constants);

/// Numeric values of the constants that have one.
expr::Values constant_values(const std::vector<Constant>& constants);

/// Exact bindings for valued constants, for substitution.
std::map<std::string, expr::Expr> constant_bindings(const std::vector<Constant>& constants);

/// Checks the type invariants (allowed symbols, T > 0, sigma not
/// identically zero). Throws Error on violation.
void validate(const BsdeProblem& p);
void validate(const FbsdeProblem& p);

/// One `key = value` line of a structured text file.
struct Entry {
  std::string key;
  std::string value;
  bool quoted = false;
  std::size_t line = 0;
};

/// Reads `key = value` lines; `#` starts a comment, values may be
/// double-quoted, `const NAME = value` lines are returned with key
/// "const NAME". Throws ConfigError on malformed lines or repeated keys.
std::vector<Entry> read_entries(const std::string& text, const std::string& file);

/// Reads a file from disk (ConfigError when unreadable).
std::string read_file(const std::string& path);

Problem parse_problem(const std::string& text, const std::string& file = "<problem>");
Problem load_problem(const std::string& path);

}  // namespace liesym::determining
