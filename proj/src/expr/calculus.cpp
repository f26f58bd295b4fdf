#include "liesym/expr/calculus.hpp"

#include "liesym/error.hpp"

namespace liesym::expr {

namespace {

Expr rebuild(const Expr& e, std::vector<Expr> c) {
  switch (e.kind()) {
    case Kind::add:
      return raw_add(std::move(c));
    case Kind::mul:
      return raw_mul(std::move(c));
    case Kind::pow:
      return raw_pow(c[0], c[1]);
    case Kind::exp:
      return raw_exp(c[0]);
    case Kind::log:
      return raw_log(c[0]);
    default:
      return e;
  }
}

Expr derive(const Expr& e, const std::string& s) {
  if (!depends_on(e, s)) return number(0);
  switch (e.kind()) {
    case Kind::number:
      return number(0);
    case Kind::symbol:
      return number(e.name() == s ? 1 : 0);
    case Kind::function: {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < e.args().size(); ++i) {
        if (e.args()[i] != s) continue;
        std::vector<int> orders = e.orders();
        if (orders.empty()) orders.assign(e.args().size(), 0);
        ++orders[i];
        terms.push_back(function(e.name(), e.args(), std::move(orders)));
      }
      return raw_add(std::move(terms));
    }
    case Kind::add: {
      std::vector<Expr> terms;
      for (const auto& c : e.children()) terms.push_back(derive(c, s));
      return raw_add(std::move(terms));
    }
    case Kind::mul: {
      auto f = e.children();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (!depends_on(f[i], s)) continue;
        std::vector<Expr> product(f.begin(), f.end());
        product[i] = derive(f[i], s);
        terms.push_back(raw_mul(std::move(product)));
      }
      return raw_add(std::move(terms));
    }
    case Kind::pow: {
      const Expr& b = e.children()[0];
      const Expr& k = e.children()[1];
      if (!depends_on(k, s)) {
        return raw_mul({k, raw_pow(b, raw_add({k, number(-1)})), derive(b, s)});
      }
      return raw_mul({e, raw_add({raw_mul({derive(k, s), raw_log(b)}),
                                  raw_mul({k, derive(b, s), raw_pow(b, number(-1))})})});
    }
    case Kind::exp:
      return raw_mul({e, derive(e.children()[0], s)});
    case Kind::log:
      return raw_mul({derive(e.children()[0], s), raw_pow(e.children()[0], number(-1))});
  }
  return number(0);
}

// Simultaneous symbol renaming/replacement; unknown-function arguments may
// only be renamed to other symbols.
Expr replace_symbols(const Expr& e, const std::map<std::string, Expr>& symbols) {
  switch (e.kind()) {
    case Kind::number:
      return e;
    case Kind::symbol: {
      auto it = symbols.find(e.name());
      return it == symbols.end() ? e : it->second;
    }
    case Kind::function: {
      std::vector<std::string> args = e.args();
      bool changed = false;
      for (auto& a : args) {
        auto it = symbols.find(a);
        if (it == symbols.end()) continue;
        if (!it->second.is_symbol()) {
          throw Error("cannot substitute '" + to_string(it->second) + "' for argument '" + a +
                      "' of unknown function " + e.name());
        }
        a = it->second.name();
        changed = true;
      }
      return changed ? function(e.name(), std::move(args), e.orders()) : e;
    }
    default: {
      std::vector<Expr> c;
      bool changed = false;
      for (const auto& child : e.children()) {
        c.push_back(replace_symbols(child, symbols));
        changed = changed || !(c.back() == child);
      }
      return changed ? rebuild(e, std::move(c)) : e;
    }
  }
}

Expr expand_functions(const Expr& e, const Bindings& b) {
  switch (e.kind()) {
    case Kind::number:
      return e;
    case Kind::symbol: {
      auto it = b.symbols.find(e.name());
      return it == b.symbols.end() ? e : it->second;
    }
    case Kind::function: {
      auto it = b.functions.find(e.name());
      if (it == b.functions.end()) return replace_symbols(e, b.symbols);
      const FunctionBinding& fb = it->second;
      if (fb.params.size() != e.args().size()) {
        throw ArityError("binding for " + e.name() + " takes " + std::to_string(fb.params.size()) +
                         " arguments, application has " + std::to_string(e.args().size()));
      }
      Expr body = fb.body;
      for (std::size_t i = 0; i < e.orders().size(); ++i) {
        if (e.orders()[i] > 0) body = differentiate(body, fb.params[i], e.orders()[i]);
      }
      std::map<std::string, Expr> rename;
      for (std::size_t i = 0; i < fb.params.size(); ++i) rename[fb.params[i]] = symbol(e.args()[i]);
      body = replace_symbols(body, rename);
      return replace_symbols(body, b.symbols);
    }
    default: {
      std::vector<Expr> c;
      for (const auto& child : e.children()) c.push_back(expand_functions(child, b));
      return rebuild(e, std::move(c));
    }
  }
}

}  // namespace

Expr differentiate(const Expr& e, const std::string& s, int order) {
  if (order < 0) throw Error("negative derivative order");
  Expr out = simplify_basic(e);
  for (int i = 0; i < order; ++i) out = simplify_basic(derive(out, s));
  return out;
}

Expr substitute(const Expr& e, const Bindings& bindings) {
  return simplify_basic(expand_functions(e, bindings));
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& symbols) {
  return simplify_basic(replace_symbols(e, symbols));
}

}  // namespace liesym::expr
