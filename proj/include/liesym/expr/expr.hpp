#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "liesym/expr/number.hpp"

namespace liesym::expr {

/// Node kinds. Negation is mul(-1, e), division is mul(a, pow(b, -1)) and
/// sqrt(e) is pow(e, 1/2); the parser maps the surface syntax onto these.
enum class Kind : std::uint8_t { number, symbol, function, pow, exp, log, mul, add };

struct Node;

/// Immutable symbolic expression. Copies share the underlying tree.
///
/// A `function` node is an application of an unknown function to argument
/// symbols. When any entry of orders() is nonzero it is the corresponding
/// partial derivative of that application (order per argument position).
class Expr {
 public:
  /// The exact constant 0.
  Expr();

  Kind kind() const;
  const Number& number() const;
  const std::string& name() const;
  const std::vector<std::string>& args() const;
  const std::vector<int>& orders() const;
  std::span<const Expr> children() const;
  std::size_t hash() const;

  bool is_number() const { return kind() == Kind::number; }
  bool is_symbol() const { return kind() == Kind::symbol; }
  bool is_function() const { return kind() == Kind::function; }
  bool is_derivative() const;
  bool is_zero() const;
  bool is_one() const;
  bool is_exact_zero() const;

  /// True when simplify_basic has already produced this node.
  bool is_canonical() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend Expr make_node(Node&&);
  std::shared_ptr<const Node> node_;
};

struct Node {
  Kind kind = Kind::number;
  Number number;
  std::string name;
  std::vector<std::string> args;
  std::vector<int> orders;
  std::vector<Expr> children;
  std::size_t hash = 0;
  bool canonical = false;
};

Expr make_node(Node&& n);

// Raw constructors: build exactly the node asked for.
Expr number(Number n);
Expr number(std::int64_t n);
Expr rational(std::int64_t p, std::int64_t q);
Expr floating(double v);
Expr symbol(std::string name);
Expr function(std::string name, std::vector<std::string> args, std::vector<int> orders = {});
Expr raw_add(std::vector<Expr> terms);
Expr raw_mul(std::vector<Expr> factors);
Expr raw_pow(Expr base, Expr exponent);
Expr raw_exp(Expr arg);
Expr raw_log(Expr arg);

// Building operators: flatten nested add/mul and fold literal arithmetic,
// nothing else. Use simplify_basic for canonical forms.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr exp(const Expr& arg);
Expr ln(const Expr& arg);
Expr sqrt(const Expr& arg);

/// Total order on expressions: kind, then payload, then children.
int compare(const Expr& a, const Expr& b);

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

/// Printed form accepted back by parse() (derivatives as name_yy(t,y)).
std::string to_string(const Expr& e);
std::ostream& operator<<(std::ostream& os, const Expr& e);

/// Does symbol `s` occur anywhere, including as an unknown-function argument?
bool depends_on(const Expr& e, const std::string& s);

/// Does e contain any unknown-function node (optionally a specific one)?
bool contains_function(const Expr& e, const std::string& name = {});

/// Names of all free symbols (excluding function arguments), sorted.
std::vector<std::string> free_symbols(const Expr& e);

}  // namespace liesym::expr

template <>
struct std::hash<liesym::expr::Expr> {
  std::size_t operator()(const liesym::expr::Expr& e) const noexcept { return e.hash(); }
};
