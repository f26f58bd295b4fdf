#include "liesym/flow/flow.hpp"

#include <array>
#include <cmath>

#include "liesym/error.hpp"
#include "liesym/expr/calculus.hpp"

namespace liesym::flow {

using expr::Expr;
using expr::Kind;
using expr::number;
using expr::simplify_basic;
using expr::symbol;

namespace {

const std::vector<std::string> point_vars{"t", "x", "y"};

// k for h = k*t.
std::optional<Expr> linear_in(const Expr& e, const std::string& var) {
  if (e.is_symbol() && e.name() == var) return number(1);
  if (e.kind() == Kind::mul && e.children().size() == 2 && e.children()[0].is_number() &&
      e.children()[1].is_symbol() && e.children()[1].name() == var) {
    return e.children()[0];
  }
  return std::nullopt;
}

}  // namespace

std::optional<ClosedForm> recognize(const solver::SymmetryCandidate& c) {
  Expr a = symbol("a");
  Expr t = symbol("t");
  Expr y = symbol("y");
  Expr x = symbol("x");
  Expr h = simplify_basic(c.h);
  Expr gamma = simplify_basic(c.gamma);

  ClosedForm out;
  std::string hrule, grule, xrule;
  if (h.is_zero()) {
    out.Xi = t;
    hrule = "h=0";
  } else if (auto k = linear_in(h, "t")) {
    out.Xi = simplify_basic(expr::exp(*k * a) * t);
    hrule = "h=k*t";
  } else {
    return std::nullopt;
  }

  if (gamma.is_number()) {
    out.phi = simplify_basic(y + gamma * a);
    grule = gamma.is_zero() ? "gamma=0" : "gamma=c";
  } else {
    Expr coeff = number(1);
    Expr ex = gamma;
    if (gamma.kind() == Kind::mul && gamma.children().size() == 2 &&
        gamma.children()[0].is_number()) {
      coeff = gamma.children()[0];
      ex = gamma.children()[1];
    }
    if (ex.kind() != Kind::exp) return std::nullopt;
    auto m = linear_in(ex.children()[0], "y");
    if (!m) return std::nullopt;
    // d phi/da = c exp(m phi)  =>  exp(-m phi) = exp(-m y) - m c a.
    out.phi = simplify_basic(-(number(1) / *m) *
                             expr::ln(expr::exp(-*m * y) - *m * coeff * a));
    grule = "gamma=c*exp(m*y)";
  }

  if (!c.xi) {
    out.phix = x;
  } else {
    Expr xi = simplify_basic(*c.xi);
    if (!xi.is_number()) return std::nullopt;
    out.phix = simplify_basic(x + xi * a);
    xrule = xi.is_zero() ? ", xi=0" : ", xi=c";
  }
  out.rule = hrule + ", " + grule + xrule;
  return out;
}

GroupFlow::GroupFlow(const solver::SymmetryCandidate& c, double a, const expr::Values& constants,
                     FlowOptions options)
    : a_(a), numeric_(true), options_(options), has_xi_(c.xi.has_value()) {
  if (!std::isfinite(a)) throw Error("group parameter must be finite");
  std::map<std::string, Expr> bind;
  for (const auto& [k, v] : constants) bind[k] = expr::floating(v);
  solver::SymmetryCandidate bound{expr::substitute(c.gamma, bind), expr::substitute(c.h, bind),
                                  std::nullopt};
  if (c.xi) bound.xi = expr::substitute(*c.xi, bind);

  h_ = expr::CompiledExpr(bound.h, point_vars);
  gamma_ = expr::CompiledExpr(bound.gamma, point_vars);
  xi_ = expr::CompiledExpr(bound.xi ? *bound.xi : number(0), point_vars);
  // Partials of (h, gamma, xi) in the state order (time, y, x).
  const Expr fields[3] = {bound.h, bound.gamma, bound.xi ? *bound.xi : number(0)};
  const char* wrt[3] = {"t", "y", "x"};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      jac_[i][j] = expr::CompiledExpr(expr::differentiate(fields[i], wrt[j]), point_vars);
    }
  }

  if (options_.use_closed_form) {
    if (auto cf = recognize(bound)) {
      expr::Values av{{"a", a_}};
      closed_ = cf;
      cXi_ = expr::CompiledExpr(cf->Xi, point_vars, av);
      cphi_ = expr::CompiledExpr(cf->phi, point_vars, av);
      cphix_ = expr::CompiledExpr(cf->phix, point_vars, av);
      cXi_t_ = expr::CompiledExpr(expr::differentiate(cf->Xi, "t"), point_vars, av);
      cphi_y_ = expr::CompiledExpr(expr::differentiate(cf->phi, "y"), point_vars, av);
      cphi_x_ = expr::CompiledExpr(expr::differentiate(cf->phi, "x"), point_vars, av);
    }
  }

  // Calibrate the step count on a probe grid; points that blow up are the
  // caller's concern and are skipped here.
  steps_ = options_.min_steps;
  if (a_ == 0) return;
  for (double t : {0.1, 1.0, 2.0}) {
    for (double y : {-2.0, 0.0, 2.0}) {
      try {
        int s = steps_;
        for (;;) {
          State lo = rk4(t, y, 0, s);
          State hi = rk4(t, y, 0, 2 * s);
          double d = std::max({std::abs(lo.time - hi.time), std::abs(lo.y - hi.y),
                               std::abs(lo.x - hi.x)});
          if (d < options_.tolerance || 2 * s >= options_.max_steps) break;
          s *= 2;
        }
        steps_ = std::max(steps_, s);
      } catch (const FlowBlowUpError&) {
      }
    }
  }
}

GroupFlow GroupFlow::snapshot(const ClosedForm& maps, double a) {
  GroupFlow f;
  f.a_ = a;
  f.numeric_ = false;
  f.closed_ = maps;
  expr::Values av{{"a", a}};
  f.cXi_ = expr::CompiledExpr(maps.Xi, point_vars, av);
  f.cphi_ = expr::CompiledExpr(maps.phi, point_vars, av);
  f.cphix_ = expr::CompiledExpr(maps.phix, point_vars, av);
  f.cXi_t_ = expr::CompiledExpr(expr::differentiate(maps.Xi, "t"), point_vars, av);
  f.cphi_y_ = expr::CompiledExpr(expr::differentiate(maps.phi, "y"), point_vars, av);
  f.cphi_x_ = expr::CompiledExpr(expr::differentiate(maps.phi, "x"), point_vars, av);
  return f;
}

State GroupFlow::rk4(double t, double y, double x, int steps) const {
  const double da = a_ / steps;
  auto rhs = [&](const State& s) -> State {
    const double p[3] = {s.time, s.x, s.y};
    return {h_(p), gamma_(p), has_xi_ ? xi_(p) : 0.0};
  };
  auto axpy = [](const State& s, double k, const State& d) -> State {
    return {s.time + k * d.time, s.y + k * d.y, s.x + k * d.x};
  };
  State s{t, y, x};
  for (int i = 0; i < steps; ++i) {
    State k1 = rhs(s);
    State k2 = rhs(axpy(s, da / 2, k1));
    State k3 = rhs(axpy(s, da / 2, k2));
    State k4 = rhs(axpy(s, da, k3));
    s.time += da / 6 * (k1.time + 2 * k2.time + 2 * k3.time + k4.time);
    s.y += da / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    s.x += da / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    if (!std::isfinite(s.time) || !std::isfinite(s.y) || !std::isfinite(s.x)) {
      throw FlowBlowUpError("Lie equations produced a non-finite state", da * (i + 1));
    }
  }
  return s;
}

State GroupFlow::integrate(double t, double y, double x) const {
  if (!numeric_) throw Error("flow snapshot has no generator to integrate");
  if (a_ == 0) return {t, y, x};
  int s = std::max(1, steps_ / 2);
  State lo = rk4(t, y, x, s);
  for (;;) {
    State hi = rk4(t, y, x, 2 * s);
    double d =
        std::max({std::abs(lo.time - hi.time), std::abs(lo.y - hi.y), std::abs(lo.x - hi.x)});
    if (d < options_.tolerance || 2 * s >= options_.max_steps) return hi;
    lo = hi;
    s *= 2;
  }
}

State GroupFlow::closed(double t, double y, double x) const {
  const double p[3] = {t, x, y};
  State s{cXi_(p), cphi_(p), cphix_(p)};
  if (!std::isfinite(s.time) || !std::isfinite(s.y) || !std::isfinite(s.x)) {
    throw DomainError("flow evaluated outside its domain at (t,y)=(" + std::to_string(t) + "," +
                      std::to_string(y) + "), a=" + std::to_string(a_));
  }
  return s;
}

State GroupFlow::operator()(double t, double y, double x) const {
  if (closed_) return closed(t, y, x);
  return integrate(t, y, x);
}

GroupFlow::Tangent GroupFlow::rk4_tangent(double t, double y, double x, int steps) const {
  // State and Jacobian d(Xi, phi, phix)/d(t, y, x) together; the Jacobian
  // obeys dJ/da = DF(state) J.
  using Vec = std::array<double, 12>;
  const double da = a_ / steps;
  auto rhs = [&](const Vec& v) {
    const double p[3] = {v[0], v[2], v[1]};
    double F[3][3];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) F[i][j] = jac_[i][j](p);
    }
    if (!has_xi_) F[2][0] = F[2][1] = F[2][2] = 0;
    Vec d{};
    d[0] = h_(p);
    d[1] = gamma_(p);
    d[2] = has_xi_ ? xi_(p) : 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += F[i][k] * v[3 + 3 * k + j];
        d[3 + 3 * i + j] = s;
      }
    }
    return d;
  };
  auto axpy = [](const Vec& v, double k, const Vec& d) {
    Vec o;
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = v[i] + k * d[i];
    return o;
  };
  Vec v{t, y, x, 1, 0, 0, 0, 1, 0, 0, 0, 1};
  for (int i = 0; i < steps; ++i) {
    Vec k1 = rhs(v);
    Vec k2 = rhs(axpy(v, da / 2, k1));
    Vec k3 = rhs(axpy(v, da / 2, k2));
    Vec k4 = rhs(axpy(v, da, k3));
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] += da / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
      if (!std::isfinite(v[j])) {
        throw FlowBlowUpError("Lie equations produced a non-finite state", da * (i + 1));
      }
    }
  }
  Tangent out;
  out.state = {v[0], v[1], v[2]};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.jacobian[i][j] = v[3 + 3 * i + j];
  }
  return out;
}

GroupFlow::Tangent GroupFlow::tangent(double t, double y, double x) const {
  if (!numeric_) throw Error("flow snapshot has no generator to integrate");
  if (a_ == 0) return rk4_tangent(t, y, x, 1);
  int s = std::max(1, steps_ / 2);
  Tangent lo = rk4_tangent(t, y, x, s);
  for (;;) {
    Tangent hi = rk4_tangent(t, y, x, 2 * s);
    double d = 0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        d = std::max(d, std::abs(hi.jacobian[i][j] - lo.jacobian[i][j]));
      }
    }
    if (d < options_.tolerance || 2 * s >= options_.max_steps) return hi;
    lo = hi;
    s *= 2;
  }
}

double GroupFlow::Xi_t(double t, double y, double x) const {
  if (closed_) {
    const double p[3] = {t, x, y};
    return cXi_t_(p);
  }
  return tangent(t, y, x).jacobian[0][0];
}

double GroupFlow::phi_y(double t, double y, double x) const {
  if (closed_) {
    const double p[3] = {t, x, y};
    return cphi_y_(p);
  }
  return tangent(t, y, x).jacobian[1][1];
}

double GroupFlow::phi_x(double t, double y, double x) const {
  if (closed_) {
    const double p[3] = {t, x, y};
    return cphi_x_(p);
  }
  return tangent(t, y, x).jacobian[1][2];
}

GroupFlow exponentiate_flow(const solver::SymmetryCandidate& c, double a,
                            const expr::Values& constants, FlowOptions options) {
  return GroupFlow(c, a, constants, options);
}

double time_rate_eta(const GroupFlow& f, double t, double y, double x) {
  double r = f.Xi_t(t, y, x);
  if (!(r > 0)) {
    throw NonPositiveRateError("Xi_t = " + std::to_string(r) + " is not positive at (t,y)=(" +
                               std::to_string(t) + "," + std::to_string(y) + ")");
  }
  return std::sqrt(r);
}

double zeta_bsde(const GroupFlow& f, double t, double y, double z) {
  return f.phi_y(t, y) * z / time_rate_eta(f, t, y);
}

double zeta_fbsde(const GroupFlow& f, double sigma, double t, double x, double y, double z) {
  return (f.phi_y(t, y, x) * z + sigma * f.phi_x(t, y, x)) / time_rate_eta(f, t, y, x);
}

TerminalTransform transform_terminal(const GroupFlow& f, double T,
                                     const std::vector<double>& terminal,
                                     const std::vector<double>& horizons,
                                     const std::vector<double>& x) {
  if (!x.empty() && x.size() != terminal.size()) throw ArityError("x samples size mismatch");
  TerminalTransform out;
  out.values.reserve(terminal.size());
  for (std::size_t i = 0; i < terminal.size(); ++i) {
    out.values.push_back(f(T, terminal[i], x.empty() ? 0.0 : x[i]).y);
  }
  out.horizons = horizons;
  return out;
}

}  // namespace liesym::flow
