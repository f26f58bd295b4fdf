#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "liesym/error.hpp"
#include "liesym/expr/calculus.hpp"

namespace liesym::expr {

namespace {

constexpr std::int64_t max_expanded_power = 16;

Expr canonical(Kind k, std::vector<Expr> children) {
  Node n;
  n.kind = k;
  n.children = std::move(children);
  n.canonical = true;
  return make_node(std::move(n));
}

Expr canon_add(const std::vector<Expr>& terms);
Expr canon_mul(const std::vector<Expr>& factors);
Expr canon_pow(const Expr& base, const Expr& exponent);
Expr canon_exp(const Expr& arg);
Expr canon_log(const Expr& arg);

// Splits a canonical term into (coefficient, monomial). A bare number has
// an empty monomial, signalled by nullopt.
std::pair<Number, std::optional<Expr>> split_term(const Expr& t) {
  if (t.is_number()) return {t.number(), std::nullopt};
  if (t.kind() == Kind::mul && t.children().front().is_number()) {
    auto f = t.children();
    if (f.size() == 2) return {f[0].number(), f[1]};
    return {f[0].number(), canonical(Kind::mul, std::vector<Expr>(f.begin() + 1, f.end()))};
  }
  return {Number(1), t};
}

Expr scale(const Number& c, const Expr& mono) {
  if (c.is_one() && c.is_exact()) return mono;
  std::vector<Expr> f{number(c)};
  if (mono.kind() == Kind::mul) {
    f.insert(f.end(), mono.children().begin(), mono.children().end());
  } else {
    f.push_back(mono);
  }
  return canonical(Kind::mul, std::move(f));
}

Expr canon_add(const std::vector<Expr>& terms) {
  Number constant(0);
  bool have_constant = false;
  std::map<Expr, Number, ExprLess> monomials;
  auto absorb = [&](const Expr& t) {
    auto [c, mono] = split_term(t);
    if (!mono) {
      constant = constant + c;
      have_constant = true;
      return;
    }
    auto [it, inserted] = monomials.emplace(*mono, c);
    if (!inserted) it->second = it->second + c;
  };
  for (const auto& t : terms) {
    if (t.kind() == Kind::add) {
      for (const auto& c : t.children()) absorb(c);
    } else {
      absorb(t);
    }
  }
  std::vector<Expr> out;
  if (have_constant && !constant.is_zero()) out.push_back(number(constant));
  for (const auto& [mono, c] : monomials) {
    if (!c.is_zero()) out.push_back(scale(c, mono));
  }
  if (out.empty()) {
    // Keep a floating zero when every contribution was floating.
    if (have_constant && !constant.is_exact()) return number(constant);
    return number(0);
  }
  if (out.size() == 1) return out.front();
  return canonical(Kind::add, std::move(out));
}

// Expands a product whose factors include sums.
Expr distribute(const Number& coeff, const std::vector<Expr>& plain, const std::vector<Expr>& sums) {
  std::vector<Expr> seed{number(coeff)};
  seed.insert(seed.end(), plain.begin(), plain.end());
  std::vector<Expr> partial{canon_mul(seed)};
  for (const auto& s : sums) {
    std::vector<Expr> next;
    next.reserve(partial.size() * s.children().size());
    for (const auto& p : partial) {
      for (const auto& term : s.children()) next.push_back(canon_mul({p, term}));
    }
    partial = std::move(next);
  }
  return canon_add(partial);
}

Expr canon_mul(const std::vector<Expr>& input) {
  Number coeff(1);
  std::map<Expr, std::vector<Expr>, ExprLess> powers;
  std::vector<Expr> exp_args;

  auto absorb = [&](const Expr& f, auto& self) -> void {
    switch (f.kind()) {
      case Kind::number:
        coeff = coeff * f.number();
        return;
      case Kind::mul:
        for (const auto& c : f.children()) self(c, self);
        return;
      case Kind::pow:
        powers[f.children()[0]].push_back(f.children()[1]);
        return;
      case Kind::exp:
        exp_args.push_back(f.children()[0]);
        return;
      default:
        powers[f].push_back(number(1));
        return;
    }
  };
  for (const auto& f : input) absorb(f, absorb);
  if (coeff.is_zero()) return number(coeff);

  std::vector<Expr> factors;
  std::vector<Expr> respill;
  for (const auto& [base, ks] : powers) {
    Expr p = canon_pow(base, ks.size() == 1 ? ks.front() : canon_add(ks));
    switch (p.kind()) {
      case Kind::number:
        coeff = coeff * p.number();
        break;
      case Kind::mul:
      case Kind::exp:
        respill.push_back(p);
        break;
      default:
        factors.push_back(p);
        break;
    }
  }
  if (!exp_args.empty()) {
    Expr e = canon_exp(exp_args.size() == 1 ? exp_args.front() : canon_add(exp_args));
    if (e.kind() == Kind::exp) {
      factors.push_back(e);
    } else {
      respill.push_back(e);
    }
  }
  if (coeff.is_zero()) return number(coeff);
  if (!respill.empty()) {
    std::vector<Expr> again{number(coeff)};
    again.insert(again.end(), factors.begin(), factors.end());
    again.insert(again.end(), respill.begin(), respill.end());
    return canon_mul(again);
  }

  std::vector<Expr> plain;
  std::vector<Expr> sums;
  for (auto& f : factors) (f.kind() == Kind::add ? sums : plain).push_back(f);
  std::sort(plain.begin(), plain.end(), ExprLess{});
  if (!sums.empty()) return distribute(coeff, plain, sums);

  if (plain.empty()) return number(coeff);
  if (plain.size() == 1) return scale(coeff, plain.front());
  return scale(coeff, canonical(Kind::mul, std::move(plain)));
}

std::optional<std::int64_t> exact_root(std::int64_t v, std::int64_t q) {
  if (v < 0) return std::nullopt;
  auto r = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(v), 1.0 / q)));
  for (std::int64_t c = std::max<std::int64_t>(0, r - 1); c <= r + 1; ++c) {
    __int128 p = 1;
    for (std::int64_t i = 0; i < q && p <= static_cast<__int128>(v); ++i) p *= c;
    if (p == v) return c;
  }
  return std::nullopt;
}

std::pair<std::int64_t, std::int64_t> split_power(std::int64_t n, std::int64_t q) {
  std::int64_t outside = 1;
  for (std::int64_t d = 2; d <= 10000; ++d) {
    __int128 dq = 1;
    for (std::int64_t i = 0; i < q && dq <= n; ++i) dq *= d;
    if (dq > n) break;
    while (n % static_cast<std::int64_t>(dq) == 0) {
      n /= static_cast<std::int64_t>(dq);
      outside *= d;
    }
  }
  return {outside, n};
}

Expr pow_numbers(const Number& b, const Number& k) {
  if (b.is_exact() && k.is_integer()) {
    if (b.is_zero() && k.is_negative()) return canonical(Kind::pow, {number(b), number(k)});
    return number(Number(Rational::pow(b.rational(), k.rational().num())));
  }
  if (b.is_exact() && k.is_exact()) {
    const Rational& br = b.rational();
    const Rational& kr = k.rational();
    if (br.is_negative() || kr.den() > 64) return canonical(Kind::pow, {number(b), number(k)});
    auto rn = exact_root(br.num(), kr.den());
    auto rd = exact_root(br.den(), kr.den());
    if (rn && rd) return number(Number(Rational::pow(Rational(*rn, *rd), kr.num())));
    // b^(p/q) = b^n * b^(frac) with 0 < frac < 1.
    std::int64_t whole = kr.num() / kr.den();
    if (kr.num() < 0 && kr.num() % kr.den() != 0) --whole;
    Rational frac = kr - Rational(whole);
    // Pull perfect q-th powers out of the base: b = o^q * i.
    auto [on, in] = split_power(br.num(), frac.den());
    auto [od, id] = split_power(br.den(), frac.den());
    Rational outside = Rational::pow(br, whole) * Rational::pow(Rational(on, od), frac.num());
    Rational inside(in, id);
    if (inside.is_one()) return number(Number(outside));
    Expr atom = canonical(Kind::pow, {number(Number(inside)), number(Number(frac))});
    return scale(Number(outside), atom);
  }
  double v = std::pow(b.to_double(), k.to_double());
  if (std::isfinite(v)) return number(Number::floating(v));
  return canonical(Kind::pow, {number(b), number(k)});
}

// Leading coefficient of a canonical sum: the coefficient of its first term.
Number leading_coefficient(const Expr& sum) { return split_term(sum.children().front()).first; }

Expr divide_terms(const Expr& sum, const Number& c) {
  std::vector<Expr> terms;
  for (const auto& t : sum.children()) {
    auto [tc, mono] = split_term(t);
    Number q = tc / c;
    terms.push_back(mono ? scale(q, *mono) : number(q));
  }
  return canonical(Kind::add, std::move(terms));
}

Expr canon_pow(const Expr& base, const Expr& k) {
  if (k.is_number() && k.number().is_zero()) return number(1);
  if (k.is_number() && k.number().is_one() && k.number().is_exact()) return base;
  if (base.is_number() && base.number().is_one()) return base;
  if (base.is_number() && base.number().is_zero() && k.is_number() && !k.number().is_negative()) {
    return base;
  }
  if (base.is_number() && k.is_number()) return pow_numbers(base.number(), k.number());

  const bool integer_k = k.is_number() && k.number().is_integer();
  switch (base.kind()) {
    case Kind::pow:
      if (integer_k) return canon_pow(base.children()[0], canon_mul({base.children()[1], k}));
      break;
    case Kind::exp:
      return canon_exp(canon_mul({base.children()[0], k}));
    case Kind::mul: {
      if (integer_k) {
        std::vector<Expr> f;
        for (const auto& c : base.children()) f.push_back(canon_pow(c, k));
        return canon_mul(f);
      }
      const Expr& lead = base.children().front();
      if (lead.is_number() && !lead.number().is_negative()) {
        std::vector<Expr> rest(base.children().begin() + 1, base.children().end());
        Expr inner = rest.size() == 1 ? rest.front() : canonical(Kind::mul, rest);
        return canon_mul({canon_pow(lead, k), canonical(Kind::pow, {inner, k})});
      }
      break;
    }
    case Kind::add: {
      if (integer_k && k.number().rational().num() > 1 &&
          k.number().rational().num() <= max_expanded_power) {
        std::vector<Expr> copies(static_cast<std::size_t>(k.number().rational().num()), base);
        return distribute(Number(1), {}, copies);
      }
      Number c = leading_coefficient(base);
      bool extract = !(c.is_one() && c.is_exact()) && (integer_k || !c.is_negative());
      if (extract && !c.is_zero()) {
        return canon_mul({canon_pow(number(c), k), canonical(Kind::pow, {divide_terms(base, c), k})});
      }
      break;
    }
    default:
      break;
  }
  return canonical(Kind::pow, {base, k});
}

// Splits a canonical term c*ln(v) into (c, v).
std::optional<std::pair<Number, Expr>> as_scaled_log(const Expr& t) {
  if (t.kind() == Kind::log) return std::pair{Number(1), t.children()[0]};
  if (t.kind() == Kind::mul && t.children().size() == 2 && t.children()[0].is_number() &&
      t.children()[1].kind() == Kind::log) {
    return std::pair{t.children()[0].number(), t.children()[1].children()[0]};
  }
  return std::nullopt;
}

Expr canon_exp(const Expr& u) {
  if (u.is_number()) {
    if (u.number().is_zero()) return number(1);
    if (!u.number().is_exact()) return number(Number::floating(std::exp(u.number().to_double())));
    return canonical(Kind::exp, {u});
  }
  if (auto sl = as_scaled_log(u)) return canon_pow(sl->second, number(sl->first));
  if (u.kind() == Kind::add) {
    std::vector<Expr> pulled;
    std::vector<Expr> rest;
    for (const auto& t : u.children()) {
      if (auto sl = as_scaled_log(t)) {
        pulled.push_back(canon_pow(sl->second, number(sl->first)));
      } else {
        rest.push_back(t);
      }
    }
    if (!pulled.empty()) {
      pulled.push_back(canon_exp(canon_add(rest)));
      return canon_mul(pulled);
    }
  }
  return canonical(Kind::exp, {u});
}

Expr canon_log(const Expr& u) {
  if (u.is_number()) {
    if (u.number().is_one()) return number(0);
    if (!u.number().is_exact() && u.number().to_double() > 0) {
      return number(Number::floating(std::log(u.number().to_double())));
    }
    return canonical(Kind::log, {u});
  }
  if (u.kind() == Kind::exp) return u.children()[0];
  return canonical(Kind::log, {u});
}

}  // namespace

Expr simplify_basic(const Expr& e) {
  if (e.is_canonical()) return e;
  std::vector<Expr> c;
  c.reserve(e.children().size());
  for (const auto& child : e.children()) c.push_back(simplify_basic(child));
  switch (e.kind()) {
    case Kind::add:
      return canon_add(c);
    case Kind::mul:
      return canon_mul(c);
    case Kind::pow:
      return canon_pow(c[0], c[1]);
    case Kind::exp:
      return canon_exp(c[0]);
    case Kind::log:
      return canon_log(c[0]);
    default:
      return e;
  }
}

std::map<int, Expr> collect_polynomial(const Expr& e, const std::string& s) {
  Expr c = simplify_basic(e);
  std::vector<Expr> terms;
  if (c.kind() == Kind::add) {
    terms.assign(c.children().begin(), c.children().end());
  } else if (!c.is_zero()) {
    terms.push_back(c);
  }
  std::map<int, std::vector<Expr>> by_degree;
  for (const auto& t : terms) {
    std::vector<Expr> factors;
    if (t.kind() == Kind::mul) {
      factors.assign(t.children().begin(), t.children().end());
    } else {
      factors.push_back(t);
    }
    int degree = 0;
    std::vector<Expr> rest;
    for (const auto& f : factors) {
      if (f.is_symbol() && f.name() == s) {
        ++degree;
      } else if (f.kind() == Kind::pow && f.children()[0].is_symbol() &&
                 f.children()[0].name() == s && f.children()[1].is_number() &&
                 f.children()[1].number().is_integer() && !f.children()[1].number().is_negative()) {
        degree += static_cast<int>(f.children()[1].number().rational().num());
      } else if (depends_on(f, s)) {
        throw NotPolynomialError(s, to_string(f));
      } else {
        rest.push_back(f);
      }
    }
    by_degree[degree].push_back(rest.empty() ? number(1) : canon_mul(rest));
  }
  std::map<int, Expr> out;
  for (auto& [d, parts] : by_degree) {
    Expr coeff = canon_add(parts);
    if (!coeff.is_zero()) out.emplace(d, coeff);
  }
  return out;
}

}  // namespace liesym::expr
