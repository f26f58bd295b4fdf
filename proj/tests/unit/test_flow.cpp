#include <cmath>

#include "doctest.h"
#include "liesym/determining/problem.hpp"
#include "liesym/error.hpp"
#include "liesym/expr/calculus.hpp"
#include "liesym/expr/parse.hpp"
#include "liesym/flow/flow.hpp"

using namespace liesym;
using namespace liesym::flow;
using liesym::solver::SymmetryCandidate;

namespace {

expr::Expr e(const std::string& s) {
  static const auto table = determining::fbsde_table({});
  return expr::simplify_basic(expr::parse(s, table));
}

SymmetryCandidate cand(const std::string& gamma, const std::string& h) {
  return {e(gamma), e(h), std::nullopt};
}

// Oracle for v = exp(-2y) d/dy + 2t d/dt, solved by hand.
double xi_oracle(double t, double a) { return std::exp(2 * a) * t; }
double phi_oracle(double y, double a) { return 0.5 * std::log(2 * a + std::exp(2 * y)); }

FlowOptions numeric_only() {
  FlowOptions o;
  o.use_closed_form = false;
  return o;
}

}  // namespace

TEST_CASE("quadratic flow at a = 1") {
  auto f = exponentiate_flow(cand("exp(-2*y)", "2*t"), 1.0);
  REQUIRE(f.has_closed_form());
  auto s = f(1.0, 0.0);
  CHECK(s.time == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(s.y == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-14));
  auto n = f.integrate(1.0, 0.0);
  CHECK(std::abs(n.time - std::exp(2.0)) < 1e-8);
  CHECK(std::abs(n.y - 0.5 * std::log(3.0)) < 1e-8);
}

TEST_CASE("identity at a = 0 and pure translation") {
  for (const char* g : {"exp(-2*y)", "y^2 + t", "1"}) {
    auto f = exponentiate_flow(cand(g, "2*t + t*y"), 0.0, {}, numeric_only());
    auto s = f(0.4, -0.3);
    CHECK(s.time == 0.4);
    CHECK(s.y == -0.3);
    CHECK(time_rate_eta(f, 0.4, -0.3) == 1.0);
    CHECK(zeta_bsde(f, 0.4, -0.3, 1.7) == 1.7);
  }
  auto f = exponentiate_flow(cand("1", "0"), 0.7, {}, numeric_only());
  auto s = f(0.3, -1.0);
  CHECK(s.time == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(s.y == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("time rate") {
  auto f = exponentiate_flow(cand("exp(-2*y)", "2*t"), 0.3);
  CHECK(time_rate_eta(f, 0.5, 1.0) == doctest::Approx(std::exp(0.3)).epsilon(1e-14));
  auto g = exponentiate_flow(cand("0", "2*t"), std::log(2.0), {}, numeric_only());
  CHECK(time_rate_eta(g, 0.7, 0.1) == doctest::Approx(2.0).epsilon(1e-8));
  auto shrink = exponentiate_flow(cand("0", "t^2"), 1.0);
  CHECK_FALSE(shrink.has_closed_form());
  CHECK_THROWS_AS(exponentiate_flow(cand("0", "-t"), -1e9).integrate(1, 0), Error);
  // Rotation (h = y, gamma = -t): Xi = t cos a + y sin a, so Xi_t < 0 past a = pi/2.
  auto neg = exponentiate_flow(cand("-t", "y"), 2.0, {}, numeric_only());
  CHECK(neg.Xi_t(0.5, 0.2) == doctest::Approx(std::cos(2.0)).epsilon(1e-7));
  CHECK_THROWS_AS(time_rate_eta(neg, 0.5, 0.2), NonPositiveRateError);
}

TEST_CASE("zeta for the quadratic flow") {
  for (double a : {0.25, 0.5, 1.0}) {
    auto f = exponentiate_flow(cand("exp(-2*y)", "2*t"), a);
    for (double y : {-2.0, 0.0, 1.5}) {
      double z = 0.8;
      double oracle = std::exp(-a) * std::exp(2 * y) / (2 * a + std::exp(2 * y)) * z;
      CHECK(std::abs(zeta_bsde(f, 1.0, y, z) - oracle) < 1e-12);
      CHECK(zeta_bsde(f, 1.0, y, 0.0) == 0.0);
      CHECK(zeta_bsde(f, 1.0, y, 3 * z) == doctest::Approx(3 * zeta_bsde(f, 1.0, y, z)));
    }
  }
}

TEST_CASE("zeta for FBSDE flows") {
  ClosedForm snap{e("t"), e("x + y"), e("x"), "snapshot"};
  auto f = GroupFlow::snapshot(snap, 0.5);
  CHECK(zeta_fbsde(f, 2.0, 0.3, 0.1, 0.2, 3.0) == doctest::Approx(5.0));

  SymmetryCandidate c{e("exp(-2*y)"), e("2*t"), e("0")};
  auto g = exponentiate_flow(c, 0.5);
  auto b = exponentiate_flow(cand("exp(-2*y)", "2*t"), 0.5);
  CHECK(zeta_fbsde(g, 1.3, 0.4, 0.7, 0.2, 1.1) == doctest::Approx(zeta_bsde(b, 0.4, 0.2, 1.1)));
  auto id = exponentiate_flow(c, 0.0);
  CHECK(zeta_fbsde(id, 1.3, 0.4, 0.7, 0.2, 1.1) == doctest::Approx(1.1));
}

TEST_CASE("transform_terminal") {
  auto f = exponentiate_flow(cand("exp(-2*y)", "2*t"), 1.0);
  auto out = transform_terminal(f, 1.0, {-1.0, 0.0, 2.0}, {2.0, 3.0, 4.0});
  for (std::size_t i = 0; i < 3; ++i) {
    double y = std::vector<double>{-1.0, 0.0, 2.0}[i];
    CHECK(out.values[i] == doctest::Approx(phi_oracle(y, 1.0)).epsilon(1e-14));
  }
  CHECK(out.horizons.size() == 3);
  CHECK(std::abs(f(1.0, 20.0).y - 20.0) < 1e-8);
  auto id = exponentiate_flow(cand("exp(-2*y)", "2*t"), 0.0);
  CHECK(transform_terminal(id, 1.0, {0.3}).values[0] == doctest::Approx(0.3));
}

TEST_CASE("closed form versus integration on the quadratic example") {
  auto c = cand("exp(-2*y)", "2*t");
  for (double a = 0; a <= 1.0 + 1e-12; a += 0.125) {
    auto f = exponentiate_flow(c, a);
    for (double t : {0.1, 0.7, 2.0}) {
      for (double y : {-2.0, -0.5, 0.0, 1.0, 2.0}) {
        auto n = f.integrate(t, y);
        CHECK(std::abs(n.time - xi_oracle(t, a)) < 1e-8);
        CHECK(std::abs(n.y - phi_oracle(y, a)) < 1e-8);
      }
    }
  }
}

TEST_CASE("integrated derivatives match the closed form") {
  auto c = cand("exp(-2*y)", "2*t");
  for (double a : {0.25, 1.0}) {
    auto closed = exponentiate_flow(c, a);
    auto numeric = exponentiate_flow(c, a, {}, numeric_only());
    for (double y : {-2.0, 0.0, 2.0}) {
      CHECK(std::abs(numeric.Xi_t(0.9, y) - closed.Xi_t(0.9, y)) < 1e-9);
      CHECK(std::abs(numeric.phi_y(0.9, y) - closed.phi_y(0.9, y)) < 1e-9);
    }
  }
}

TEST_CASE("property: group law") {
  const char* gammas[] = {"exp(-2*y)", "1", "y", "exp(y)/16"};
  const char* hs[] = {"2*t", "0", "t"};
  for (const char* g : gammas) {
    for (const char* h : hs) {
      auto c = cand(g, h);
      for (double a : {0.25, 0.5}) {
        for (double b : {0.25, 0.5}) {
          auto fa = exponentiate_flow(c, a, {}, numeric_only());
          auto fb = exponentiate_flow(c, b, {}, numeric_only());
          auto fab = exponentiate_flow(c, a + b, {}, numeric_only());
          for (double t = 0.1; t <= 2.0; t += 0.38) {
            for (double y = -2; y <= 2; y += 0.8) {
              auto inner = fb.integrate(t, y);
              auto comp = fa.integrate(inner.time, inner.y);
              auto direct = fab.integrate(t, y);
              INFO(g, " ", h, " a=", a, " b=", b, " t=", t, " y=", y);
              CHECK(std::abs(comp.time - direct.time) < 1e-8);
              CHECK(std::abs(comp.y - direct.y) < 1e-8);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("property: infinitesimal consistency") {
  const double a = 1e-4;
  for (const char* g : {"exp(-2*y)", "y^2 + t", "t*y"}) {
    for (const char* h : {"2*t", "t^2", "t*(1 + y^2)"}) {
      auto c = cand(g, h);
      auto f = exponentiate_flow(c, a, {}, numeric_only());
      expr::CompiledExpr hc(c.h, {"t", "y"}), gc(c.gamma, {"t", "y"});
      for (double t : {0.3, 1.2}) {
        for (double y : {-1.0, 0.5}) {
          auto s = f.integrate(t, y);
          CHECK((s.time - t) / a == doctest::Approx(hc({t, y})).epsilon(1e-3));
          CHECK((s.y - y) / a == doctest::Approx(gc({t, y})).epsilon(1e-3));
        }
      }
    }
  }
}

TEST_CASE("blow-up is reported") {
  // dphi/da = phi^2 reaches infinity at a = 1/y0.
  auto f = exponentiate_flow(cand("y^2", "0"), 2.0, {}, numeric_only());
  try {
    f.integrate(1.0, 1.0);
    FAIL("expected blow-up");
  } catch (const FlowBlowUpError& err) {
    CHECK(err.reached() <= 2.0);
  }
  auto d = exponentiate_flow(cand("exp(-2*y)", "2*t"), -1.0);
  CHECK_THROWS_AS(d(1.0, 0.0), DomainError);
}
