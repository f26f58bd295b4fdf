// Acceptance suite: one PASS/FAIL line per criterion, exit code 0 only when
// all criteria pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "liesym/cli/commands.hpp"
#include "liesym/determining/determining.hpp"
#include "liesym/expr/calculus.hpp"
#include "liesym/expr/parse.hpp"
#include "liesym/flow/flow.hpp"
#include "liesym/solver/solver.hpp"
#include "liesym/stochastic/stochastic.hpp"

using namespace liesym;
using expr::Expr;

namespace {

const std::string configs = LIESYM_CONFIG_DIR;

// Tolerances.
constexpr double flow_tol = 1e-8;
constexpr double zeta_tol = 1e-10;
constexpr double group_tol = 1e-8;
constexpr double y_oracle_tol = 0.05;
constexpr double z_oracle_tol = 0.1;
constexpr double identity_tol = 1e-12;
constexpr double rms_ratio_max = 3;

// Simulation sizes.
constexpr std::size_t paths = 10000;
constexpr std::size_t steps = 200;
constexpr double horizon = 1.0;
constexpr double a_sim = 0.5;
constexpr std::uint64_t seed = 42;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int n, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool in_time = s < limit_s;
  bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("criterion %d: %s [%s] %s; runtime %.2f s (limit %.0f s)%s\n", n, pass ? "PASS" : "FAIL",
              title.c_str(), o.detail.c_str(), s, limit_s, in_time ? "" : " EXCEEDED");
  std::fflush(stdout);
}

Expr bsde_expr(const std::string& s, const std::vector<determining::Constant>& c = {}) {
  return expr::simplify_basic(expr::parse(s, determining::bsde_table(c)));
}

// c = k e for a small nonzero rational k.
bool same_up_to_scale(const Expr& c, const Expr& e) {
  for (auto [p, q] : {std::pair{1, 1}, {-1, 1}, {2, 1}, {-2, 1}, {1, 2}, {-1, 2}}) {
    if (expr::simplify_basic(c - expr::rational(p, q) * e).is_zero()) return true;
  }
  return false;
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

const std::vector<Expr>& basis_of(const solver::SymmetrySolution& s, const std::string& name) {
  for (const auto& [n, b] : s.unknown_bases) {
    if (n == name) return b;
  }
  throw Error("no basis for " + name);
}

std::set<std::string> printed(const std::vector<Expr>& v) {
  std::set<std::string> out;
  for (const auto& e : v) out.insert(expr::to_string(e));
  return out;
}

solver::SymmetryCandidate quadratic_candidate() {
  return solver::load_candidate(configs + "/quadratic_bsde.candidate", determining::bsde_table({}));
}

const determining::BsdeProblem& quadratic_problem() {
  static determining::BsdeProblem p =
      std::get<determining::BsdeProblem>(determining::load_problem(configs + "/quadratic_bsde.problem"));
  return p;
}

// Shared simulation for criteria 5-7; built once, timed in criterion 5.
stochastic::PathEnsemble& solved_paths() {
  static stochastic::PathEnsemble pe = [] {
    auto e = stochastic::simulate_brownian(stochastic::TimeGrid::uniform(horizon, steps), paths, seed);
    stochastic::solve_bsde_regression(quadratic_problem(), e);
    return e;
  }();
  return pe;
}

}  // namespace

int main() {
  criterion(1, "determining equations for g = z^2", 1, [] {
    cli::RunConfig c;
    c.subcommand = "derive";
    c.problem = configs + "/quadratic_bsde.problem";
    std::ostringstream sink;
    cli::cmd_derive(c, sink);
    auto sys = determining::bsde_system(quadratic_problem());
    auto split = determining::split_identity(sys);
    std::vector<Expr> expected{bsde_expr("-1/2*gamma_yy(t,y) - gamma_y(t,y)"), bsde_expr("gamma_t(t,y)")};
    bool ok = split.size() == expected.size();
    for (const auto& e : expected) {
      bool found = false;
      for (const auto& s : split) found = found || same_up_to_scale(s, e);
      ok = ok && found;
    }
    std::string got;
    for (const auto& s : split) got += (got.empty() ? "" : ", ") + expr::to_string(s) + " = 0";
    return Outcome{ok, got};
  });

  criterion(2, "symmetry basis", 1, [] {
    auto sol = solver::solve_constant_coeff(determining::bsde_system(quadratic_problem()));
    bool quad = printed(basis_of(sol, "gamma")) == printed({expr::number(1), bsde_expr("exp(-2*y)")});
    bool h_free = false;
    for (const auto& f : sol.free_components) h_free = h_free || f == "h";
    auto scaled = std::get<determining::BsdeProblem>(
        determining::load_problem(configs + "/scaled_quadratic.problem"));
    auto ssol = solver::solve_constant_coeff(determining::bsde_system(scaled));
    std::vector<Expr> bound;
    for (const auto& b : basis_of(ssol, "gamma")) {
      bound.push_back(expr::substitute(b, determining::constant_bindings(scaled.constants)));
    }
    bool six = printed(bound) == printed({expr::number(1), bsde_expr("exp(-6*y)")});
    return Outcome{quad && h_free && six, std::string("g=z^2 basis ") + (quad ? "{1, exp(-2*y)}" : "wrong") +
                                              (h_free ? ", h free" : ", h constrained") +
                                              "; C=3 basis " + (six ? "{1, exp(-6*y)}" : "wrong")};
  });

  // Integrated flow only; the closed form below is written out by hand.
  flow::FlowOptions numeric;
  numeric.use_closed_form = false;
  const auto cand = quadratic_candidate();
  const double as[] = {0.25, 0.5, 1.0};
  auto grid_points = [](const std::function<void(double, double)>& f) {
    for (int i = 0; i <= 19; ++i) {
      for (int j = 0; j <= 20; ++j) f(0.1 + 0.1 * i, -2 + 0.2 * j);
    }
  };

  criterion(3, "flow vs closed form", 5, [&] {
    double eXi = 0, ephi = 0, eeta = 0, ezeta = 0;
    for (double a : as) {
      auto f = flow::exponentiate_flow(cand, a, {}, numeric);
      grid_points([&](double t, double y) {
        auto tg = f.tangent(t, y);
        const double eta = std::sqrt(tg.jacobian[0][0]);
        eXi = std::max(eXi, std::abs(tg.state.time - std::exp(2 * a) * t));
        ephi = std::max(ephi, std::abs(tg.state.y - 0.5 * std::log(2 * a + std::exp(2 * y))));
        eeta = std::max(eeta, std::abs(eta - std::exp(a)));
        for (double z : {-2.0, -0.5, 1.0, 2.0}) {
          const double zeta = tg.jacobian[1][1] * z / eta;
          const double ref = std::exp(-a) * std::exp(2 * y) / (2 * a + std::exp(2 * y)) * z;
          ezeta = std::max(ezeta, std::abs(zeta - ref));
        }
      });
    }
    bool ok = eXi < flow_tol && ephi < flow_tol && eeta < flow_tol && ezeta < zeta_tol;
    return Outcome{ok, "max|dXi| " + fmt(eXi) + ", max|dphi| " + fmt(ephi) + ", max|deta| " + fmt(eeta) +
                           ", max|dzeta| " + fmt(ezeta)};
  });

  criterion(4, "group law", 5, [&] {
    std::map<double, flow::GroupFlow> flows;
    auto get = [&](double a) -> const flow::GroupFlow& {
      auto it = flows.find(a);
      if (it == flows.end()) it = flows.emplace(a, flow::exponentiate_flow(cand, a, {}, numeric)).first;
      return it->second;
    };
    // Images of the grid under a single flow, one entry per parameter.
    std::map<double, std::vector<flow::State>> images;
    auto image = [&](double a) -> const std::vector<flow::State>& {
      auto it = images.find(a);
      if (it != images.end()) return it->second;
      std::vector<flow::State> out;
      grid_points([&](double t, double y) { out.push_back(get(a).integrate(t, y)); });
      return images.emplace(a, std::move(out)).first->second;
    };
    double worst = 0;
    for (double b : as) {
      for (double a : as) {
        const auto& mids = image(b);
        const auto& direct = image(a + b);
        for (std::size_t i = 0; i < mids.size(); ++i) {
          auto two = get(a).integrate(mids[i].time, mids[i].y);
          worst = std::max({worst, std::abs(two.time - direct[i].time), std::abs(two.y - direct[i].y)});
        }
      }
    }
    return Outcome{worst < group_tol, "max |f_a(f_b(p)) - f_(a+b)(p)| " + fmt(worst)};
  });

  criterion(5, "transformed Brownian motion", 60, [&] {
    auto pe = solved_paths();
    auto f = flow::exponentiate_flow(cand, a_sim);
    stochastic::transformed_brownian(pe, stochastic::rate_of(f));
    auto comp = stochastic::bm_statistics(pe, "Bbar_alpha");
    auto raw = stochastic::bm_statistics(pe, "Bbar");
    bool variance_fails = false;
    for (const auto& t : raw.tests) {
      if (t.name.rfind("variance", 0) == 0 && !t.pass) variance_fails = true;
    }
    return Outcome{comp.all_pass() && variance_fails,
                   "Bbar o alpha " + std::to_string(comp.tests.size() - comp.failures()) + "/" +
                       std::to_string(comp.tests.size()) + " pass; unscaled Bbar variance " +
                       (variance_fails ? "fails" : "passes")};
  });

  criterion(6, "BSDE solver vs oracle", 120, [&] {
    const auto& pe = solved_paths();
    const auto& B = pe.get("B");
    const auto& Y = pe.get("Y");
    const auto& Z = pe.get("Z");
    double ey = 0, ez = 0;
    for (std::size_t k : stochastic::checkpoints(steps)) {
      double sy = 0, sz = 0;
      for (std::size_t i = 0; i < paths; ++i) {
        sy += std::abs(Y.at(i, k) - (B.at(i, k) + horizon - pe.grid[k]));
        sz += std::abs(Z.at(i, k) - 1);
      }
      ey = std::max(ey, sy / paths);
      ez = std::max(ez, sz / paths);
    }
    return Outcome{ey < y_oracle_tol && ez < z_oracle_tol,
                   "max mean|Y - (B_t + T - t)| " + fmt(ey) + ", max mean|Z - 1| " + fmt(ez) +
                       " (regression timed in criterion 5)"};
  });

  criterion(7, "transformed solution", 120, [&] {
    auto pe = solved_paths();
    auto f = flow::exponentiate_flow(cand, a_sim);
    auto check = stochastic::verify_transformed_solution(quadratic_problem(), f, pe);
    const auto& Y = pe.get("Y");
    const auto& Ybar = pe.get("Ybar");
    double ident = 0;
    for (std::size_t i = 0; i < Y.values.size(); ++i) {
      const double lhs = std::exp(2 * Ybar.values[i]);
      const double rhs = 2 * a_sim + std::exp(2 * Y.values[i]);
      ident = std::max(ident, std::abs(lhs - rhs) / rhs);
    }
    std::size_t means = 0, mean_fail = 0, martingale_fail = 0;
    for (const auto& t : check.report.tests) {
      if (t.name.rfind("residual_mean", 0) == 0) {
        ++means;
        if (!t.pass) ++mean_fail;
      }
      if (t.name.rfind("martingale_mean", 0) == 0 && !t.pass) ++martingale_fail;
    }
    const double ratio = check.rms_transformed / check.rms_original;
    bool ok = ident < identity_tol && means == steps && mean_fail == 0 && ratio <= rms_ratio_max;
    return Outcome{ok, "identity error " + fmt(ident) + ", residual means " +
                           std::to_string(means - mean_fail) + "/" + std::to_string(means) +
                           " within 3 SE, rms ratio " + fmt(ratio) + " (info: martingale-mean failures " +
                           std::to_string(martingale_fail) + ")"};
  });

  criterion(8, "FBSDE consistency", 1, [] {
    auto p = std::get<determining::FbsdeProblem>(determining::load_problem(configs + "/fbsde_unit.problem"));
    auto table = determining::fbsde_table({});
    auto sys = determining::fbsde_determining(p);
    auto unit = solver::load_candidate(configs + "/fbsde_unit.candidate", table);
    auto rep = solver::verify_candidate(sys, unit);
    bool zero = rep.residuals.size() == 3;
    for (const auto& r : rep.residuals) zero = zero && r.exact_zero;

    // gamma(t,x,H(x)) - H_x xi(t,x,H(x)) with H(x) = x, by hand.
    auto tx = expr::simplify_basic(expr::parse("exp(-2*x)", determining::terminal_table({})));
    auto fail_case = solver::terminal_compatibility(p, unit);
    auto pass_case = solver::terminal_compatibility(
        p, solver::load_candidate(configs + "/fbsde_terminal_pass.candidate", table));
    bool terminal = !fail_case.pass && expr::simplify_basic(fail_case.residual - tx).is_zero() &&
                    pass_case.pass && pass_case.residual.is_zero();
    return Outcome{zero && terminal, std::string("residuals ") + (zero ? "all zero" : "nonzero") +
                                         "; terminal criterion " + (terminal ? "reproduced" : "wrong") +
                                         " (fail case residual " + expr::to_string(fail_case.residual) + ")"};
  });

  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
