#include "liesym/determining/determining.hpp"

#include "liesym/expr/calculus.hpp"

namespace liesym::determining {

using expr::Expr;
using expr::differentiate;
using expr::function;
using expr::number;
using expr::rational;
using expr::simplify_basic;
using expr::symbol;

namespace {

// Application of an unknown with derivative orders given per argument letter.
Expr unknown(const std::string& name, const std::vector<std::string>& args,
             const std::string& wrt = "") {
  std::vector<int> orders(args.size(), 0);
  for (char c : wrt) {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == std::string(1, c)) ++orders[i];
    }
  }
  return function(name, args, std::move(orders));
}

Expr sum(std::vector<Expr> terms) { return expr::raw_add(std::move(terms)); }
Expr prod(std::vector<Expr> factors) { return expr::raw_mul(std::move(factors)); }

}  // namespace

Expr bsde_determining(const BsdeProblem& p) {
  const std::vector<std::string> args{"t", "y"};
  const Expr& g = p.g;
  Expr z = symbol("z");
  Expr gamma = unknown(gamma_name, args);
  Expr h = unknown(h_name, args);
  Expr tau = prod({rational(1, 2), unknown(h_name, args, "t")});

  Expr lhs = sum({prod({g, unknown(gamma_name, args, "y")}), -unknown(gamma_name, args, "t"),
                  prod({rational(-1, 2), unknown(gamma_name, args, "yy"), z, z})});
  Expr rhs = sum({prod({number(2), g, tau}), prod({h, differentiate(g, "t")}),
                  prod({differentiate(g, "y"), gamma}),
                  prod({differentiate(g, "z"), sum({unknown(gamma_name, args, "y"), -tau}), z})});
  return simplify_basic(lhs - rhs);
}

DeterminingSystem bsde_system(const BsdeProblem& p) {
  DeterminingSystem sys;
  sys.residuals.push_back({"generator", bsde_determining(p)});
  sys.side_constraints.push_back("h(0,y) = 0");
  sys.indeterminates = {"z"};
  sys.table = bsde_table(p.constants);
  return sys;
}

DeterminingSystem fbsde_determining(const FbsdeProblem& p) {
  const std::vector<std::string> args{"t", "x", "y"};
  const Expr& b = p.b;
  const Expr& s = p.sigma;
  const Expr& g = p.g;
  Expr z = symbol("z");
  Expr h = unknown(h_name, args);
  Expr tau = prod({rational(1, 2), unknown(h_name, args, "t")});
  Expr xi = unknown(xi_name, args);
  auto X = [&](const std::string& d) { return unknown(xi_name, args, d); };
  auto G = [&](const std::string& d) { return unknown(gamma_name, args, d); };
  Expr half = rational(1, 2);

  Expr drift = sum({prod({number(2), b, tau}), prod({h, differentiate(b, "t")}),
                    prod({differentiate(b, "x"), xi}), -X("t"),
                    -sum({prod({b, X("x")}), -prod({g, X("y")}), prod({half, s, s, X("xx")}),
                          prod({half, z, z, X("yy")}), prod({s, z, X("xy")})})});

  Expr diffusion = sum({prod({s, tau}), prod({h, differentiate(s, "t")}),
                        prod({differentiate(s, "x"), xi}),
                        -sum({prod({s, X("x")}), prod({z, X("y")})})});

  Expr generator =
      sum({prod({h, differentiate(g, "t")}), prod({differentiate(g, "x"), xi}),
           prod({differentiate(g, "y"), G("")}),
           prod({differentiate(g, "z"), sum({prod({sum({G("y"), -tau}), z}), prod({s, G("x")})})}),
           prod({number(2), tau, g}),
           sum({prod({b, G("x")}), -prod({g, G("y")}), G("t"), prod({half, s, s, G("xx")}),
                prod({half, z, z, G("yy")}), prod({s, z, G("xy")})})});

  DeterminingSystem sys;
  sys.fbsde = true;
  sys.residuals.push_back({"drift", simplify_basic(drift)});
  sys.residuals.push_back({"diffusion", simplify_basic(diffusion)});
  sys.residuals.push_back({"generator", simplify_basic(generator)});
  sys.side_constraints.push_back("h(0,x,y) = 0");
  sys.side_constraints.push_back("gamma(t,x,H(x)) = H_x(x)*xi(t,x,H(x))");
  sys.indeterminates = {"z"};
  sys.table = fbsde_table(p.constants);
  return sys;
}

namespace {

void split_into(const Expr& e, const std::vector<std::string>& vars, std::size_t i,
                std::vector<int>& degrees, const std::string& source, std::vector<SplitTerm>& out) {
  if (i == vars.size()) {
    if (!e.is_zero()) out.push_back({source, degrees, e});
    return;
  }
  auto coeffs = expr::collect_polynomial(e, vars[i]);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    degrees.push_back(it->first);
    split_into(it->second, vars, i + 1, degrees, source, out);
    degrees.pop_back();
  }
}

}  // namespace

std::vector<Expr> split_identity(const Expr& e, const std::vector<std::string>& indeterminates) {
  std::vector<SplitTerm> terms;
  std::vector<int> degrees;
  split_into(simplify_basic(e), indeterminates, 0, degrees, "", terms);
  std::vector<Expr> out;
  for (auto& t : terms) out.push_back(t.coefficient);
  return out;
}

std::vector<SplitTerm> split_terms(const DeterminingSystem& sys) {
  std::vector<SplitTerm> terms;
  for (const auto& r : sys.residuals) {
    std::vector<int> degrees;
    split_into(r.expr, sys.indeterminates, 0, degrees, r.label, terms);
  }
  return terms;
}

std::vector<Expr> split_identity(const DeterminingSystem& sys) {
  std::vector<Expr> out;
  for (auto& t : split_terms(sys)) out.push_back(t.coefficient);
  return out;
}

}  // namespace liesym::determining
