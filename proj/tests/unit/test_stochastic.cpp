#include <cmath>
#include <set>

#include "doctest.h"
#include "liesym/error.hpp"
#include "liesym/expr/calculus.hpp"
#include "liesym/expr/parse.hpp"
#include "liesym/stochastic/stochastic.hpp"

using namespace liesym;
using namespace liesym::stochastic;

namespace {

expr::Expr be(const std::string& s) {
  return expr::simplify_basic(expr::parse(s, determining::bsde_table({})));
}
expr::Expr te(const std::string& s) {
  return expr::simplify_basic(expr::parse(s, determining::terminal_table({})));
}

determining::BsdeProblem bsde(const std::string& g, const std::string& H) {
  determining::BsdeProblem p;
  p.g = be(g);
  p.H = te(H);
  p.T = 1;
  return p;
}

determining::FbsdeProblem fbsde(const std::string& b, const std::string& sigma, double x0) {
  determining::FbsdeProblem p;
  auto t = determining::fbsde_table({});
  p.b = expr::simplify_basic(expr::parse(b, t));
  p.sigma = expr::simplify_basic(expr::parse(sigma, t));
  p.g = expr::number(0);
  p.H = te("x");
  p.x0 = x0;
  return p;
}

flow::GroupFlow quadratic_flow(double a) {
  return flow::exponentiate_flow({be("exp(-2*y)"), be("2*t"), std::nullopt}, a);
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

RateFn constant_rate(double c) {
  return [c](double, double, double) { return c; };
}

}  // namespace

TEST_CASE("time grid") {
  auto g = TimeGrid::uniform(1.0, 4);
  CHECK(g.size() == 5);
  CHECK(g.T() == 1.0);
  CHECK(g.dt(0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(TimeGrid(std::vector<double>{0.0}), Error);
  CHECK_THROWS_AS(TimeGrid(std::vector<double>{0.0, 0.5, 0.5}), Error);
}

TEST_CASE("simulate_brownian") {
  auto grid = TimeGrid::uniform(1.0, 100);
  auto pe = simulate_brownian(grid, 10000, 3);
  auto end = pe.get("B").column(100);
  double m = mean_of(end);
  double v = 0;
  for (double x : end) v += (x - m) * (x - m);
  v /= static_cast<double>(end.size() - 1);
  CHECK(std::abs(v - 1.0) < 3 * std::sqrt(2.0 / 10000));
  for (std::size_t p = 0; p < pe.paths; ++p) CHECK(pe.get("B").at(p, 0) == 0.0);

  auto again = simulate_brownian(grid, 10000, 3);
  CHECK(again.get("B").values == pe.get("B").values);
  CHECK(simulate_brownian(grid, 10, 4).get("B").values != simulate_brownian(grid, 10, 3).get("B").values);

  auto tiny = simulate_brownian(TimeGrid::uniform(0.5, 1), 1, 9);
  CHECK(tiny.get("B").grid.size() == 2);
  CHECK(std::isfinite(tiny.get("B").at(0, 1)));
  CHECK_THROWS_AS(simulate_brownian(grid, 0, 1), Error);
}

TEST_CASE("random time change with constant rate") {
  const double a = 0.5;
  auto pe = simulate_brownian(TimeGrid::uniform(1.0, 200), 50, 5);
  random_time_change(pe, constant_rate(std::exp(a)));
  const auto& beta = pe.get("beta");
  const auto& alpha = pe.get("alpha");
  CHECK(alpha.grid.T() == doctest::Approx(std::exp(2 * a)).epsilon(1e-12));
  for (std::size_t p = 0; p < pe.paths; ++p) {
    for (std::size_t k = 0; k <= 200; ++k) {
      CHECK(std::abs(beta.at(p, k) - std::exp(2 * a) * pe.grid[k]) < 1e-12);
      CHECK(std::abs(alpha.at(p, k) - std::exp(-2 * a) * alpha.grid[k]) < 1e-12);
    }
  }

  auto id = simulate_brownian(TimeGrid::uniform(1.0, 20), 5, 5);
  random_time_change(id, constant_rate(1.0));
  for (std::size_t p = 0; p < 5; ++p) {
    for (std::size_t k = 0; k <= 20; ++k) {
      CHECK(std::abs(id.get("beta").at(p, k) - id.grid[k]) < 1e-14);
      CHECK(std::abs(id.get("alpha").at(p, k) - id.grid[k]) < 1e-14);
    }
  }
}

TEST_CASE("random time change driven by Y") {
  auto pe = simulate_brownian(TimeGrid::uniform(1.0, 50), 20, 6);
  Process zero(pe.grid, pe.paths);
  pe.add("Y", zero);
  RateFn eta = [](double, double y, double) { return std::sqrt(1 + y * y); };
  random_time_change(pe, eta);
  for (std::size_t k = 0; k <= 50; ++k) CHECK(std::abs(pe.get("beta").at(3, k) - pe.grid[k]) < 1e-14);

  // Genuinely random clock: beta o alpha and alpha o beta are the identity
  // up to interpolation error within one grid cell.
  PathEnsemble r = simulate_brownian(TimeGrid::uniform(1.0, 100), 30, 7);
  r.add("Y", r.get("B"));
  random_time_change(r, eta);
  const auto& beta = r.get("beta");
  const auto& alpha = r.get("alpha");
  for (std::size_t p = 0; p < r.paths; ++p) {
    auto b = beta.row(p);
    auto al = alpha.row(p);
    for (std::size_t k = 0; k < alpha.grid.size(); ++k) {
      double back = interpolate(r.grid.nodes(), b, al[k]);
      CHECK(std::abs(back - alpha.grid[k]) < 1e-12);
    }
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
      if (b[k] > alpha.grid.T()) break;
      double back = interpolate(alpha.grid.nodes(), al, b[k]);
      CHECK(std::abs(back - r.grid[k]) <= r.grid.dt(0));
    }
    for (std::size_t k = 1; k < r.grid.size(); ++k) CHECK(b[k] > b[k - 1]);
  }
  RateFn bad = [](double, double, double) { return 0.0; };
  CHECK_THROWS_AS(random_time_change(r, bad), NonPositiveRateError);
}

TEST_CASE("transformed Brownian motion with constant rate") {
  const double a = 0.5;
  auto pe = simulate_brownian(TimeGrid::uniform(1.0, 200), 40, 8);
  transformed_brownian(pe, constant_rate(std::exp(a)));
  const auto& B = pe.get("B");
  const auto& bbar = pe.get("Bbar");
  const auto& comp = pe.get("Bbar_alpha");
  for (std::size_t p = 0; p < pe.paths; ++p) {
    for (std::size_t k = 0; k <= 200; ++k) {
      CHECK(std::abs(bbar.at(p, k) - std::exp(a) * B.at(p, k)) < 1e-12);
      // The clock nodes map back onto the original nodes, so the scaling
      // identity holds node by node.
      CHECK(std::abs(comp.at(p, k) - std::exp(a) * B.at(p, k)) < 1e-12);
    }
  }
  auto id = simulate_brownian(TimeGrid::uniform(1.0, 10), 5, 8);
  transformed_brownian(id, constant_rate(1.0));
  CHECK(id.get("Bbar").values == id.get("B").values);
}

TEST_CASE("stochastic sums use left endpoints only") {
  auto pe = simulate_brownian(TimeGrid::uniform(1.0, 10), 3, 1);
  std::set<double> times;
  RateFn spy = [&](double t, double, double) {
    times.insert(t);
    return 1.0;
  };
  transformed_brownian(pe, spy);
  CHECK_FALSE(times.contains(pe.grid.T()));
  CHECK(times.size() == pe.grid.steps());
}

TEST_CASE("bm_statistics") {
  auto pe = simulate_brownian(TimeGrid::uniform(1.0, 200), 10000, 11);
  auto r = bm_statistics(pe, "B");
  CHECK(r.tests.size() == 19);
  for (const auto& t : r.tests) {
    INFO(t.name, " = ", t.statistic);
    CHECK(t.pass);
  }

  const double a = 0.5;
  auto f = quadratic_flow(a);
  transformed_brownian(pe, rate_of(f));
  CHECK(bm_statistics(pe, "Bbar_alpha").all_pass());

  auto unscaled = bm_statistics(pe, "Bbar");
  bool variance_failed = false;
  for (const auto& t : unscaled.tests) {
    if (t.name.rfind("variance", 0) == 0 && !t.pass) variance_failed = true;
  }
  CHECK(variance_failed);
}

TEST_CASE("regression solver: martingale cases") {
  auto pe = simulate_brownian(TimeGrid::uniform(1.0, 50), 4000, 12);
  solve_bsde_regression(bsde("0", "x"), pe);
  const auto& B = pe.get("B");
  const auto& Y = pe.get("Y");
  const auto& Z = pe.get("Z");
  double ey = 0, ez = 0;
  for (std::size_t p = 0; p < pe.paths; ++p) {
    for (std::size_t k = 0; k <= 50; ++k) {
      ey += std::abs(Y.at(p, k) - B.at(p, k));
      ez += std::abs(Z.at(p, k) - 1);
    }
  }
  CHECK(ey / (51.0 * pe.paths) < 0.01);
  CHECK(ez / (51.0 * pe.paths) < 0.1);

  auto c = simulate_brownian(TimeGrid::uniform(1.0, 50), 1000, 13);
  solve_bsde_regression(bsde("0", "3/2"), c);
  for (double v : c.get("Y").values) CHECK(v == doctest::Approx(1.5).epsilon(1e-10));
  for (double v : c.get("Z").values) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("regression solver: errors") {
  auto pe = simulate_brownian(TimeGrid::uniform(1.0, 5), 3, 1);
  CHECK_THROWS_AS(solve_bsde_regression(bsde("z^2", "x"), pe), RegressionError);
  auto wrong = simulate_brownian(TimeGrid::uniform(2.0, 5), 100, 1);
  CHECK_THROWS_AS(solve_bsde_regression(bsde("z^2", "x"), wrong), Error);
}

TEST_CASE("quadratic oracle") {
  auto pe = simulate_brownian(TimeGrid::uniform(1.0, 20), 20000, 14);
  auto lin = quadratic_oracle(bsde("z^2", "x"), pe);
  const auto& B = pe.get("B");
  for (std::size_t k = 0; k <= 20; ++k) {
    CHECK(lin.at(5, k) == doctest::Approx(B.at(5, k) + 1.0 - pe.grid[k]));
  }
  CHECK(lin.at(7, 20) == B.at(7, 20));
  auto c = quadratic_oracle(bsde("z^2", "2"), pe);
  for (double v : c.values) CHECK(v == 2.0);
  CHECK_THROWS_AS(quadratic_oracle(bsde("z", "x"), pe), Error);

  // H(x) = x/2: E[exp(B_T) | B_t] = exp(B_t + (T - t)/2).
  auto half = quadratic_oracle(bsde("z^2", "x/2"), pe);
  double err = 0;
  for (std::size_t p = 0; p < pe.paths; ++p) {
    err += std::abs(half.at(p, 10) - (B.at(p, 10) / 2 + 0.25 * (1 - pe.grid[10])));
  }
  CHECK(err / pe.paths < 1e-10);
  CHECK(half.at(3, 20) == doctest::Approx(B.at(3, 20) / 2));
}

TEST_CASE("verify_transformed_solution basics") {
  auto p = bsde("z^2", "x");
  auto pe = simulate_brownian(TimeGrid::uniform(1.0, 40), 2000, 15);
  solve_bsde_regression(p, pe);

  auto id = verify_transformed_solution(p, quadratic_flow(0.0), pe);
  for (std::size_t k = 0; k < id.residuals.size(); ++k) {
    for (std::size_t i = 0; i < id.residuals[k].size(); ++i) {
      CHECK(std::abs(id.residuals[k][i] - id.original_residuals[k][i]) < 1e-12);
    }
  }
  CHECK(id.rms_transformed == doctest::Approx(id.rms_original).epsilon(1e-10));

  auto pe2 = simulate_brownian(TimeGrid::uniform(1.0, 40), 2000, 15);
  solve_bsde_regression(p, pe2);
  auto half = verify_transformed_solution(p, quadratic_flow(0.5), pe2);
  CHECK(half.identity_error < 1e-12);
  CHECK(pe2.has("Ybar"));
  CHECK(pe2.get("Ybar").at(0, 40) == doctest::Approx(0.5 * std::log(1.0 + std::exp(2 * pe2.get("B").at(0, 40)))));

  auto pe3 = simulate_brownian(TimeGrid::uniform(1.0, 10), 200, 15);
  solve_bsde_regression(p, pe3);
  CHECK_THROWS_AS(verify_transformed_solution(p, quadratic_flow(-0.5), pe3), DomainError);
}

TEST_CASE("euler_forward_sde") {
  auto grid = TimeGrid::uniform(1.0, 100);
  auto bm = euler_forward_sde(fbsde("0", "1", 0.7), grid, 50, 16);
  for (std::size_t i = 0; i < bm.get("X").values.size(); ++i) {
    CHECK(bm.get("X").values[i] == doctest::Approx(bm.get("B").values[i] + 0.7).epsilon(1e-12));
  }
  auto det = euler_forward_sde(fbsde("1", "0", 2.0), grid, 3, 16);
  for (std::size_t k = 0; k <= 100; ++k) CHECK(det.get("X").at(1, k) == doctest::Approx(2.0 + grid[k]));

  auto geo = euler_forward_sde(fbsde("0", "x", 1.0), grid, 10000, 17);
  auto end = geo.get("X").column(100);
  double m = mean_of(end), v = 0;
  for (double x : end) v += (x - m) * (x - m);
  double se = std::sqrt(v / (end.size() - 1) / end.size());
  CHECK(std::abs(m - 1.0) < 3 * se);

  auto again = euler_forward_sde(fbsde("0", "x", 1.0), grid, 10, 17);
  CHECK(again.get("X").at(4, 50) == geo.get("X").at(4, 50));
}

TEST_CASE("property: regression error shrinks as N and M double") {
  // The error is Monte Carlo noise of order 1/sqrt(M), so single seeds can
  // wobble between neighbouring sizes; the seed average must decrease at
  // every doubling and every seed must improve from the smallest to the
  // largest size.
  auto p = bsde("z^2", "x");
  const std::pair<std::size_t, std::size_t> sizes[] = {{1250, 25}, {2500, 50}, {5000, 100}, {10000, 200}};
  std::vector<double> average(4, 0.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::vector<double> errs;
    for (auto [M, N] : sizes) {
      auto pe = simulate_brownian(TimeGrid::uniform(1.0, N), M, seed);
      solve_bsde_regression(p, pe);
      auto oracle = quadratic_oracle(p, pe);
      double worst = 0;
      for (std::size_t k = 0; k <= N; ++k) {
        double e = 0;
        for (std::size_t i = 0; i < M; ++i) e += std::abs(pe.get("Y").at(i, k) - oracle.at(i, k));
        worst = std::max(worst, e / static_cast<double>(M));
      }
      errs.push_back(worst);
    }
    INFO("seed ", seed);
    CHECK(errs.back() < errs.front());
    for (std::size_t i = 0; i < errs.size(); ++i) average[i] += errs[i] / 3;
  }
  for (std::size_t i = 1; i < average.size(); ++i) CHECK(average[i] < average[i - 1]);
}
