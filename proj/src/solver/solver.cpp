#include "liesym/solver/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "liesym/error.hpp"
#include "liesym/expr/calculus.hpp"
#include "liesym/expr/eval.hpp"
#include "liesym/expr/parse.hpp"

namespace liesym::solver {

using expr::Expr;
using expr::Kind;
using expr::number;
using expr::simplify_basic;
using expr::symbol;

SymmetryCandidate parse_candidate(const std::string& text, const expr::SymbolTable& table,
                                  const std::string& file) {
  SymmetryCandidate c;
  bool have_gamma = false, have_h = false;
  for (const auto& e : determining::read_entries(text, file)) {
    if (e.key != "gamma" && e.key != "h" && e.key != "xi") {
      throw ConfigError(file, e.line, "unknown key '" + e.key + "'");
    }
    Expr v;
    try {
      v = simplify_basic(expr::parse(e.value, table));
    } catch (const Error& err) {
      throw ConfigError(file, e.line, "in '" + e.key + "': " + err.what());
    }
    if (expr::contains_function(v)) {
      throw ConfigError(file, e.line, "candidate components must be concrete expressions");
    }
    if (e.key == "gamma") {
      c.gamma = v;
      have_gamma = true;
    } else if (e.key == "h") {
      c.h = v;
      have_h = true;
    } else {
      c.xi = v;
    }
  }
  if (!have_gamma) throw ConfigError(file, 0, "missing key 'gamma'");
  if (!have_h) throw ConfigError(file, 0, "missing key 'h'");
  return c;
}

SymmetryCandidate load_candidate(const std::string& path, const expr::SymbolTable& table) {
  return parse_candidate(determining::read_file(path), table, path);
}

namespace {

std::vector<std::string> unknown_args(bool fbsde) {
  return fbsde ? std::vector<std::string>{"t", "x", "y"} : std::vector<std::string>{"t", "y"};
}

void check_arity(const Expr& e, const std::vector<std::string>& args,
                 const expr::SymbolTable& table, const std::string& what) {
  if (expr::contains_function(e)) throw ArityError(what + " must be a concrete expression");
  for (const auto& s : expr::free_symbols(e)) {
    if (std::find(args.begin(), args.end(), s) == args.end() && !table.is_constant(s)) {
      throw ArityError(what + " depends on '" + s + "', which is not one of its arguments");
    }
  }
}

}  // namespace

CandidateReport verify_candidate(const determining::DeterminingSystem& sys,
                                 const SymmetryCandidate& c, std::uint64_t seed, int points) {
  if (sys.fbsde != c.xi.has_value()) {
    throw ArityError(sys.fbsde ? "FBSDE candidate needs xi" : "BSDE candidate must not have xi");
  }
  const auto args = unknown_args(sys.fbsde);
  check_arity(c.gamma, args, sys.table, "gamma");
  check_arity(c.h, args, sys.table, "h");
  if (c.xi) check_arity(*c.xi, args, sys.table, "xi");

  expr::Bindings b;
  b.functions[determining::gamma_name] = {args, c.gamma};
  b.functions[determining::h_name] = {args, c.h};
  if (c.xi) b.functions[determining::xi_name] = {args, *c.xi};

  expr::Values constants;
  for (const auto& name : sys.table.constants()) {
    auto v = sys.table.constant_value(name);
    constants[name] = v ? v->to_double() : 1.3;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> time(0.1, 2.0), space(-2.0, 2.0);
  std::vector<expr::Values> sample(static_cast<std::size_t>(points));
  for (auto& v : sample) {
    v = constants;
    v["t"] = time(rng);
    v["x"] = space(rng);
    v["y"] = space(rng);
    v["z"] = space(rng);
  }

  CandidateReport report;
  bool all_exact = true, all_small = true;
  for (const auto& r : sys.residuals) {
    ResidualCheck check;
    check.label = r.label;
    check.residual = expr::substitute(r.expr, b);
    check.exact_zero = check.residual.is_exact_zero();
    try {
      determining::DeterminingSystem one;
      one.residuals = {r};
      one.indeterminates = sys.indeterminates;
      for (const auto& t : determining::split_terms(one)) {
        check.coefficients.push_back(expr::substitute(t.coefficient, b));
      }
      check.split = true;
    } catch (const NotPolynomialError&) {
      check.split = false;
    }
    for (const auto& v : sample) {
      double val = expr::evaluate(check.residual, v);
      if (std::isfinite(val)) check.max_sampled = std::max(check.max_sampled, std::abs(val));
    }
    all_exact = all_exact && check.exact_zero;
    all_small = all_small && check.max_sampled < 1e-9;
    report.residuals.push_back(std::move(check));
  }
  report.h_at_zero = expr::substitute(c.h, std::map<std::string, Expr>{{"t", number(0)}});
  report.initial_condition = report.h_at_zero.is_exact_zero();
  report.numeric_agrees = all_exact == all_small;
  report.pass = all_exact && report.initial_condition;
  return report;
}

namespace {

// Characteristic polynomial of one constant-coefficient ODE; var is empty
// when only the underived unknown occurs.
struct Ode {
  std::string unknown;
  std::vector<std::string> args;
  std::string var;
  std::map<int, Expr> coeffs;
};

using Roots = std::vector<std::pair<Expr, int>>;

Ode read_ode(const Expr& e, const std::set<std::string>& variables) {
  Ode ode;
  std::vector<Expr> terms;
  if (e.kind() == Kind::add) {
    terms.assign(e.children().begin(), e.children().end());
  } else {
    terms.push_back(e);
  }
  std::map<int, std::vector<Expr>> parts;
  for (const auto& t : terms) {
    std::vector<Expr> factors;
    if (t.kind() == Kind::mul) {
      factors.assign(t.children().begin(), t.children().end());
    } else {
      factors.push_back(t);
    }
    std::optional<Expr> fn;
    std::vector<Expr> coeff;
    for (const auto& f : factors) {
      if (f.is_function()) {
        if (fn) throw OutOfClassError("product of unknowns in " + to_string(e));
        fn = f;
        continue;
      }
      if (expr::contains_function(f)) throw OutOfClassError("nonlinear term in " + to_string(e));
      for (const auto& s : expr::free_symbols(f)) {
        if (variables.contains(s)) {
          throw OutOfClassError("non-constant coefficient '" + to_string(f) + "' in " +
                                to_string(e));
        }
      }
      coeff.push_back(f);
    }
    if (!fn) throw OutOfClassError("inhomogeneous term in " + to_string(e));
    if (ode.unknown.empty()) {
      ode.unknown = fn->name();
      ode.args = fn->args();
    } else if (ode.unknown != fn->name()) {
      throw OutOfClassError("condition couples " + ode.unknown + " and " + fn->name());
    }
    int order = 0;
    std::string var;
    for (std::size_t i = 0; i < fn->orders().size(); ++i) {
      if (fn->orders()[i] == 0) continue;
      if (!var.empty()) throw OutOfClassError("mixed partial derivative in " + to_string(e));
      var = fn->args()[i];
      order = fn->orders()[i];
    }
    if (!var.empty()) {
      if (!ode.var.empty() && ode.var != var) {
        throw OutOfClassError("condition couples the variables " + ode.var + " and " + var);
      }
      ode.var = var;
    }
    parts[order].push_back(coeff.empty() ? number(1) : expr::raw_mul(coeff));
  }
  for (auto& [k, p] : parts) {
    Expr c = simplify_basic(expr::raw_add(p));
    if (!c.is_zero()) ode.coeffs[k] = c;
  }
  return ode;
}

bool all_exact(const std::map<int, Expr>& p) {
  return std::all_of(p.begin(), p.end(), [](const auto& kv) {
    return kv.second.is_number() && kv.second.number().is_exact();
  });
}

using expr::Rational;

std::vector<std::int64_t> divisors(std::int64_t n) {
  n = n < 0 ? -n : n;
  std::vector<std::int64_t> out;
  for (std::int64_t d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d != n / d) out.push_back(n / d);
    }
  }
  return out;
}

// Evaluates and deflates a rational polynomial, coefficients low to high.
Rational horner(const std::vector<Rational>& p, const Rational& r) {
  Rational acc(0);
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * r + *it;
  return acc;
}

std::vector<Rational> deflate(const std::vector<Rational>& p, const Rational& r) {
  std::vector<Rational> q(p.size() - 1);
  Rational carry(0);
  for (std::size_t i = p.size() - 1; i >= 1; --i) {
    carry = carry * r + p[i];
    q[i - 1] = carry;
  }
  return q;
}

Roots quadratic(const Expr& a, const Expr& b, const Expr& c) {
  Expr disc = simplify_basic(b * b - expr::number(4) * a * c);
  Expr two_a = expr::number(2) * a;
  if (disc.is_zero()) return {{simplify_basic(-b / two_a), 2}};
  if (disc.is_number() && disc.number().is_negative()) {
    throw OutOfClassError("complex characteristic roots (trigonometric solutions not supported)");
  }
  Expr s = simplify_basic(expr::sqrt(disc));
  return {{simplify_basic((-b - s) / two_a), 1}, {simplify_basic((-b + s) / two_a), 1}};
}

Roots characteristic_roots(const std::map<int, Expr>& coeffs) {
  Roots roots;
  if (coeffs.empty()) return roots;
  const int low = coeffs.begin()->first;
  if (low > 0) roots.push_back({number(0), low});
  std::map<int, Expr> q;
  for (const auto& [k, c] : coeffs) q[k - low] = c;
  const int n = q.rbegin()->first;
  if (n == 0) return roots;

  if (all_exact(q)) {
    std::vector<Rational> p(static_cast<std::size_t>(n) + 1, Rational(0));
    for (const auto& [k, c] : q) p[static_cast<std::size_t>(k)] = c.number().rational();
    std::int64_t lcm = 1;
    for (const auto& r : p) lcm = std::lcm(lcm, r.den());
    for (auto& r : p) r = r * Rational(lcm);
    for (auto num : divisors(p.front().num())) {
      for (auto den : divisors(p.back().num())) {
        for (std::int64_t sign : {1, -1}) {
          Rational cand(sign * num, den);
          int mult = 0;
          while (p.size() > 1 && horner(p, cand).is_zero()) {
            p = deflate(p, cand);
            ++mult;
          }
          if (mult > 0) roots.push_back({number(expr::Number(cand)), mult});
        }
      }
    }
    const std::size_t m = p.size() - 1;
    if (m == 0) return roots;
    if (m == 2) {
      auto rest = quadratic(number(p[2]), number(p[1]), number(p[0]));
      roots.insert(roots.end(), rest.begin(), rest.end());
      return roots;
    }
    throw OutOfClassError("characteristic polynomial of degree " + std::to_string(m) +
                          " without rational roots");
  }

  auto at = [&](int k) { return q.contains(k) ? q.at(k) : number(0); };
  if (n == 1) {
    roots.push_back({simplify_basic(-at(0) / at(1)), 1});
  } else if (n == 2) {
    auto rest = quadratic(at(2), at(1), at(0));
    roots.insert(roots.end(), rest.begin(), rest.end());
  } else {
    throw OutOfClassError("symbolic characteristic polynomial of degree " + std::to_string(n));
  }
  return roots;
}

Roots intersect(const Roots& a, const Roots& b) {
  Roots out;
  for (const auto& [r, m] : a) {
    for (const auto& [s, k] : b) {
      if (r == s) out.push_back({r, std::min(m, k)});
    }
  }
  return out;
}

std::vector<Expr> exponential_basis(const Roots& roots, const std::string& var) {
  std::vector<Expr> out;
  Expr v = symbol(var);
  for (const auto& [r, m] : roots) {
    for (int j = 0; j < m; ++j) {
      out.push_back(simplify_basic(expr::pow(v, number(j)) * expr::exp(r * v)));
    }
  }
  return out;
}

// Keeps the span of basis elements b with b(0, .) = 0.
std::vector<Expr> vanish_at_zero(const std::vector<Expr>& basis) {
  std::vector<Expr> out;
  std::vector<std::pair<Expr, Expr>> seen;  // value at 0 -> first element
  for (const auto& b : basis) {
    Expr at0 = expr::substitute(b, std::map<std::string, Expr>{{"t", number(0)}});
    if (at0.is_zero()) {
      out.push_back(b);
      continue;
    }
    auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == at0; });
    if (it == seen.end()) {
      seen.push_back({at0, b});
    } else {
      out.push_back(simplify_basic(b - it->second));
    }
  }
  return out;
}

}  // namespace

SymmetrySolution solve_constant_coeff(
    const std::vector<Expr>& split,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& unknowns) {
  std::set<std::string> variables{"z"};
  for (const auto& [name, args] : unknowns) variables.insert(args.begin(), args.end());

  std::map<std::string, std::map<std::string, Roots>> by_var;
  std::set<std::string> forced_zero;
  std::set<std::string> seen;
  for (const auto& raw : split) {
    Expr e = simplify_basic(raw);
    if (e.is_zero()) continue;
    Ode ode = read_ode(e, variables);
    auto spec = std::find_if(unknowns.begin(), unknowns.end(),
                             [&](const auto& u) { return u.first == ode.unknown; });
    if (spec == unknowns.end()) throw OutOfClassError("unexpected unknown " + ode.unknown);
    seen.insert(ode.unknown);
    if (ode.var.empty()) {
      forced_zero.insert(ode.unknown);
      continue;
    }
    Roots roots = characteristic_roots(ode.coeffs);
    auto& slot = by_var[ode.unknown];
    auto it = slot.find(ode.var);
    if (it == slot.end()) {
      slot.emplace(ode.var, roots);
    } else {
      it->second = intersect(it->second, roots);
    }
  }

  SymmetrySolution sol;
  std::map<std::string, std::vector<Expr>> bases;
  for (const auto& [name, args] : unknowns) {
    if (!seen.contains(name)) {
      sol.free_components.push_back(name);
      continue;
    }
    std::vector<Expr> basis;
    if (!forced_zero.contains(name)) {
      basis = {number(1)};
      for (const auto& v : args) {
        auto it = by_var[name].find(v);
        if (it == by_var[name].end()) {
          throw OutOfClassError("no condition constrains " + name + " in " + v +
                                "; the solution space is not finite-dimensional");
        }
        std::vector<Expr> per = exponential_basis(it->second, v);
        std::vector<Expr> next;
        for (const auto& a : basis) {
          for (const auto& b : per) next.push_back(simplify_basic(a * b));
        }
        basis = std::move(next);
      }
      if (name == determining::h_name) basis = vanish_at_zero(basis);
    }
    bases[name] = basis;
    sol.unknown_bases.push_back({name, basis});
  }

  bool has_xi = std::any_of(unknowns.begin(), unknowns.end(),
                            [](const auto& u) { return u.first == determining::xi_name; });
  for (const auto& [name, basis] : sol.unknown_bases) {
    for (const auto& b : basis) {
      SymmetryCandidate c{number(0), number(0), std::nullopt};
      if (has_xi) c.xi = number(0);
      if (name == determining::gamma_name) c.gamma = b;
      if (name == determining::h_name) c.h = b;
      if (name == determining::xi_name) c.xi = b;
      sol.basis.push_back(c);
    }
  }
  if (std::find(sol.free_components.begin(), sol.free_components.end(), determining::h_name) !=
      sol.free_components.end()) {
    sol.note =
        "h is unconstrained: tau = h_t/2 is arbitrary subject to h(0,.) = 0; "
        "pin a concrete h (e.g. h = 2*t, tau = 1) before exponentiating";
  }
  return sol;
}

SymmetrySolution solve_constant_coeff(const determining::DeterminingSystem& sys) {
  std::vector<std::pair<std::string, std::vector<std::string>>> unknowns;
  for (const char* name : {determining::gamma_name, determining::h_name, determining::xi_name}) {
    if (sys.table.has_function(name)) unknowns.push_back({name, sys.table.function_args(name)});
  }
  return solve_constant_coeff(determining::split_identity(sys), unknowns);
}

TerminalCheck terminal_compatibility(const determining::FbsdeProblem& p,
                                     const SymmetryCandidate& c) {
  if (!c.xi) throw ArityError("terminal compatibility needs an FBSDE candidate with xi");
  std::map<std::string, Expr> on_graph{{"y", p.H}};
  Expr hx = expr::differentiate(p.H, determining::terminal_var);
  TerminalCheck out;
  out.residual = simplify_basic(expr::substitute(c.gamma, on_graph) -
                                hx * expr::substitute(*c.xi, on_graph));
  out.pass = out.residual.is_exact_zero();
  return out;
}

}  // namespace liesym::solver
