#include "liesym/expr/expr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <set>

#include "liesym/error.hpp"

namespace liesym::expr {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

const Expr& zero_expr() {
  static const Expr z = number(0);
  return z;
}

}  // namespace

Expr make_node(Node&& n) {
  std::size_t h = std::hash<int>{}(static_cast<int>(n.kind));
  switch (n.kind) {
    case Kind::number:
      h = mix(h, std::hash<std::string>{}(n.number.to_string()));
      h = mix(h, n.number.is_exact() ? 1 : 2);
      break;
    case Kind::symbol:
      h = mix(h, std::hash<std::string>{}(n.name));
      break;
    case Kind::function:
      h = mix(h, std::hash<std::string>{}(n.name));
      for (const auto& a : n.args) h = mix(h, std::hash<std::string>{}(a));
      for (int o : n.orders) h = mix(h, std::hash<int>{}(o));
      break;
    default:
      break;
  }
  for (const auto& c : n.children) h = mix(h, c.hash());
  n.hash = h;
  return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr::Expr() : Expr(zero_expr()) {}

Kind Expr::kind() const { return node_->kind; }
const Number& Expr::number() const { return node_->number; }
const std::string& Expr::name() const { return node_->name; }
const std::vector<std::string>& Expr::args() const { return node_->args; }
const std::vector<int>& Expr::orders() const { return node_->orders; }
std::span<const Expr> Expr::children() const { return node_->children; }
std::size_t Expr::hash() const { return node_->hash; }
bool Expr::is_canonical() const { return node_->canonical; }

bool Expr::is_derivative() const {
  if (kind() != Kind::function) return false;
  return std::any_of(orders().begin(), orders().end(), [](int o) { return o != 0; });
}

bool Expr::is_zero() const { return is_number() && number().is_zero(); }
bool Expr::is_one() const { return is_number() && number().is_one(); }
bool Expr::is_exact_zero() const { return is_number() && number().is_exact() && number().is_zero(); }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

Expr number(Number n) {
  Node node;
  node.kind = Kind::number;
  node.number = n;
  node.canonical = true;
  return make_node(std::move(node));
}

Expr number(std::int64_t n) { return number(Number(n)); }
Expr rational(std::int64_t p, std::int64_t q) { return number(Number(Rational(p, q))); }
Expr floating(double v) { return number(Number::floating(v)); }

Expr symbol(std::string name) {
  Node node;
  node.kind = Kind::symbol;
  node.name = std::move(name);
  node.canonical = true;
  return make_node(std::move(node));
}

Expr function(std::string name, std::vector<std::string> args, std::vector<int> orders) {
  if (orders.empty()) orders.assign(args.size(), 0);
  if (orders.size() != args.size()) throw ArityError("derivative orders do not match arguments");
  Node node;
  node.kind = Kind::function;
  node.name = std::move(name);
  node.args = std::move(args);
  node.orders = std::move(orders);
  node.canonical = true;
  return make_node(std::move(node));
}

namespace {

Expr make_compound(Kind k, std::vector<Expr> children) {
  Node node;
  node.kind = k;
  node.children = std::move(children);
  return make_node(std::move(node));
}

}  // namespace

Expr raw_add(std::vector<Expr> terms) { return make_compound(Kind::add, std::move(terms)); }
Expr raw_mul(std::vector<Expr> factors) { return make_compound(Kind::mul, std::move(factors)); }
Expr raw_pow(Expr base, Expr exponent) {
  return make_compound(Kind::pow, {std::move(base), std::move(exponent)});
}
Expr raw_exp(Expr arg) { return make_compound(Kind::exp, {std::move(arg)}); }
Expr raw_log(Expr arg) { return make_compound(Kind::log, {std::move(arg)}); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_number() && b.is_number()) return number(a.number() + b.number());
  std::vector<Expr> terms;
  for (const Expr* e : {&a, &b}) {
    if (e->kind() == Kind::add) {
      terms.insert(terms.end(), e->children().begin(), e->children().end());
    } else {
      terms.push_back(*e);
    }
  }
  return raw_add(std::move(terms));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_number() && b.is_number()) return number(a.number() * b.number());
  std::vector<Expr> factors;
  for (const Expr* e : {&a, &b}) {
    if (e->kind() == Kind::mul) {
      factors.insert(factors.end(), e->children().begin(), e->children().end());
    } else {
      factors.push_back(*e);
    }
  }
  return raw_mul(std::move(factors));
}

Expr operator-(const Expr& a) {
  if (a.is_number()) return number(-a.number());
  if (a.kind() == Kind::mul && !a.children().empty() && a.children().front().is_number()) {
    std::vector<Expr> f(a.children().begin(), a.children().end());
    f.front() = number(-f.front().number());
    return raw_mul(std::move(f));
  }
  std::vector<Expr> f{number(-1)};
  if (a.kind() == Kind::mul) {
    f.insert(f.end(), a.children().begin(), a.children().end());
  } else {
    f.push_back(a);
  }
  return raw_mul(std::move(f));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_number() && b.number().is_zero()) throw DomainError("division by zero literal");
  if (a.is_number() && b.is_number()) return number(a.number() / b.number());
  return a * pow(b, number(-1));
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (base.is_function() && !(exponent.is_number() && exponent.number().is_integer() &&
                              !exponent.number().is_negative())) {
    throw Error("unknown function '" + base.name() +
                "' may only be raised to nonnegative integer powers");
  }
  if (base.is_number() && exponent.is_number()) {
    const Number& b = base.number();
    const Number& k = exponent.number();
    if (b.is_exact() && k.is_integer()) {
      if (b.is_zero() && k.is_negative()) throw DomainError("zero to a negative power");
      return number(Number(Rational::pow(b.rational(), k.rational().num())));
    }
    if (!b.is_exact() || !k.is_exact()) {
      double v = std::pow(b.to_double(), k.to_double());
      if (std::isfinite(v)) return floating(v);
    }
  }
  return raw_pow(base, exponent);
}

Expr exp(const Expr& arg) { return raw_exp(arg); }
Expr ln(const Expr& arg) { return raw_log(arg); }
Expr sqrt(const Expr& arg) { return pow(arg, rational(1, 2)); }

int compare(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
  switch (a.kind()) {
    case Kind::number:
      return compare(a.number(), b.number());
    case Kind::symbol:
      return a.name().compare(b.name()) < 0 ? -1 : (a.name() == b.name() ? 0 : 1);
    case Kind::function: {
      if (int c = a.name().compare(b.name()); c != 0) return c < 0 ? -1 : 1;
      if (a.args() != b.args()) return a.args() < b.args() ? -1 : 1;
      if (a.orders() != b.orders()) return a.orders() < b.orders() ? -1 : 1;
      return 0;
    }
    default:
      break;
  }
  auto ca = a.children();
  auto cb = b.children();
  std::size_t n = std::min(ca.size(), cb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(ca[i], cb[i]); c != 0) return c;
  }
  if (ca.size() != cb.size()) return ca.size() < cb.size() ? -1 : 1;
  return 0;
}

namespace {

constexpr int prec_add = 1;
constexpr int prec_mul = 2;
constexpr int prec_pow = 3;
constexpr int prec_atom = 4;

int precedence(const Expr& e) {
  switch (e.kind()) {
    case Kind::add:
      return prec_add;
    case Kind::mul:
      return prec_mul;
    case Kind::pow:
      if (e.children()[1].is_number() && e.children()[1].number() == Number(Rational(1, 2))) {
        return prec_atom;
      }
      return prec_pow;
    case Kind::number: {
      const Number& n = e.number();
      if (n.is_negative()) return prec_add;
      if (n.is_exact() && !n.is_integer()) return prec_mul;
      return prec_atom;
    }
    default:
      return prec_atom;
  }
}

void print(std::string& out, const Expr& e);

void print_wrapped(std::string& out, const Expr& e, int min_prec) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(out, e);
    out += ')';
  } else {
    print(out, e);
  }
}

// Prints a product. When `drop_sign` the leading coefficient's sign is
// omitted (the caller already wrote " - ").
void print_mul(std::string& out, std::span<const Expr> f, bool drop_sign) {
  std::size_t i = 0;
  bool wrote = false;
  if (!f.empty() && f[0].is_number()) {
    Number c = f[0].number();
    if (drop_sign) c = -c;
    i = 1;
    if (c.is_minus_one() && f.size() > 1) {
      out += '-';
    } else if (!(c.is_one() && c.is_exact() && f.size() > 1)) {
      out += c.to_string();
      wrote = true;
    }
  }
  for (; i < f.size(); ++i) {
    if (wrote) out += '*';
    // A non-leading literal always gets parentheses when it is not a plain
    // natural number, so that "x*1/2" never appears.
    if (f[i].is_number() && precedence(f[i]) < prec_atom) {
      out += '(';
      print(out, f[i]);
      out += ')';
    } else {
      print_wrapped(out, f[i], prec_mul + 1);
    }
    wrote = true;
  }
}

bool negative_term(const Expr& t) {
  if (t.is_number()) return t.number().is_negative();
  return t.kind() == Kind::mul && !t.children().empty() && t.children()[0].is_number() &&
         t.children()[0].number().is_negative();
}

void print(std::string& out, const Expr& e) {
  switch (e.kind()) {
    case Kind::number:
      out += e.number().to_string();
      return;
    case Kind::symbol:
      out += e.name();
      return;
    case Kind::function: {
      out += e.name();
      if (e.is_derivative()) {
        out += '_';
        for (std::size_t i = 0; i < e.args().size(); ++i) {
          for (int k = 0; k < e.orders()[i]; ++k) out += e.args()[i];
        }
      }
      out += '(';
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (i) out += ',';
        out += e.args()[i];
      }
      out += ')';
      return;
    }
    case Kind::exp:
      out += "exp(";
      print(out, e.children()[0]);
      out += ')';
      return;
    case Kind::log:
      out += "ln(";
      print(out, e.children()[0]);
      out += ')';
      return;
    case Kind::pow: {
      const Expr& b = e.children()[0];
      const Expr& k = e.children()[1];
      if (k.is_number() && k.number() == Number(Rational(1, 2))) {
        out += "sqrt(";
        print(out, b);
        out += ')';
        return;
      }
      print_wrapped(out, b, prec_atom);
      out += '^';
      if (k.is_number() && k.number().is_integer() && !k.number().is_negative()) {
        print(out, k);
      } else {
        print_wrapped(out, k, prec_atom);
      }
      return;
    }
    case Kind::mul:
      print_mul(out, e.children(), false);
      return;
    case Kind::add: {
      auto terms = e.children();
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const Expr& t = terms[i];
        bool neg = negative_term(t);
        if (i == 0) {
          if (t.kind() == Kind::add) {
            out += '(';
            print(out, t);
            out += ')';
          } else {
            print(out, t);
          }
          continue;
        }
        out += neg ? " - " : " + ";
        if (t.is_number()) {
          out += neg ? (-t.number()).to_string() : t.number().to_string();
        } else if (t.kind() == Kind::mul) {
          print_mul(out, t.children(), neg);
        } else if (t.kind() == Kind::add) {
          out += '(';
          print(out, t);
          out += ')';
        } else {
          print(out, t);
        }
      }
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(out, e);
  return out;
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

bool depends_on(const Expr& e, const std::string& s) {
  switch (e.kind()) {
    case Kind::number:
      return false;
    case Kind::symbol:
      return e.name() == s;
    case Kind::function:
      return std::find(e.args().begin(), e.args().end(), s) != e.args().end();
    default:
      break;
  }
  for (const auto& c : e.children()) {
    if (depends_on(c, s)) return true;
  }
  return false;
}

bool contains_function(const Expr& e, const std::string& name) {
  if (e.is_function()) return name.empty() || e.name() == name;
  for (const auto& c : e.children()) {
    if (contains_function(c, name)) return true;
  }
  return false;
}

std::vector<std::string> free_symbols(const Expr& e) {
  std::set<std::string> out;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (x.is_symbol()) out.insert(x.name());
    for (const auto& c : x.children()) walk(c);
  };
  walk(e);
  return {out.begin(), out.end()};
}

}  // namespace liesym::expr
