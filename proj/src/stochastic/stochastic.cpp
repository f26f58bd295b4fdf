#include "liesym/stochastic/stochastic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "liesym/error.hpp"
#include "liesym/expr/calculus.hpp"

namespace liesym::stochastic {

using expr::CompiledExpr;
using expr::Expr;

bool StatReport::all_pass() const {
  return std::all_of(tests.begin(), tests.end(), [](const StatTest& t) { return t.pass; });
}

std::size_t StatReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(tests.begin(), tests.end(), [](const StatTest& t) { return !t.pass; }));
}

void StatReport::add(std::string name, double statistic, double lower, double upper,
                     std::size_t n) {
  bool pass = std::isfinite(statistic) && statistic >= lower && statistic <= upper;
  tests.push_back({std::move(name), statistic, lower, upper, pass, n});
}

namespace {

struct Moments {
  double mean = 0;
  double var = 0;  // unbiased
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.var = v.size() > 1 ? ss / (n - 1) : 0.0;
  return m;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  Moments ma = moments(a), mb = moments(b);
  double c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma.mean) * (b[i] - mb.mean);
  c /= static_cast<double>(a.size() - 1);
  return c / std::sqrt(ma.var * mb.var);
}


std::string at_time(const std::string& what, double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s@t=%.4g", what.c_str(), t);
  return buf;
}

const std::vector<double>* optional_row(const PathEnsemble& pe, const char* name) {
  return pe.has(name) ? &pe.get(name).values : nullptr;
}

// Least-squares projection onto polynomials in one standardized state.
class Design {
 public:
  Design(const std::vector<double>& state, int degree, std::size_t time_index) {
    Moments m = moments(state);
    const double sd = std::sqrt(m.var);
    const bool constant = !(sd > 1e-12 * (1 + std::abs(m.mean)));
    const int cols = constant ? 1 : degree + 1;
    if (static_cast<std::size_t>(cols) >= state.size()) {
      throw RegressionError("not enough paths for the regression basis", time_index);
    }
    x_.resize(static_cast<Eigen::Index>(state.size()), cols);
    for (std::size_t i = 0; i < state.size(); ++i) {
      double s = constant ? 0 : (state[i] - m.mean) / sd;
      double p = 1;
      for (int j = 0; j < cols; ++j) {
        x_(static_cast<Eigen::Index>(i), j) = p;
        p *= s;
      }
    }
    qr_.compute(x_);
    if (qr_.rank() < cols) throw RegressionError("rank-deficient regression design", time_index);
  }

  std::vector<double> fit(const std::vector<double>& y) const {
    Eigen::Map<const Eigen::VectorXd> v(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::VectorXd f = x_ * qr_.solve(v);
    return {f.data(), f.data() + f.size()};
  }

 private:
  Eigen::MatrixXd x_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

struct BackwardSpec {
  const CompiledExpr* g;      // in (t, x, y, z)
  const CompiledExpr* H;      // in x
  const char* state;          // "B" or "X"
};

void backward(PathEnsemble& pe, const BackwardSpec& spec, const RegressionOptions& o) {
  const Process& B = pe.get("B");
  const Process& S = pe.get(spec.state);
  const TimeGrid& grid = pe.grid;
  const std::size_t M = pe.paths, N = grid.steps();
  Process Y(grid, M), Z(grid, M);
  for (std::size_t p = 0; p < M; ++p) {
    double v = (*spec.H)({S.at(p, N)});
    if (!std::isfinite(v)) throw DomainError("terminal value is not finite on path " + std::to_string(p));
    Y.at(p, N) = v;
  }
  std::vector<double> next(M), work(M), dB(M), state(M), z(M);
  for (std::size_t k = N; k-- > 0;) {
    const double t = grid[k], dt = grid.dt(k);
    for (std::size_t p = 0; p < M; ++p) {
      next[p] = Y.at(p, k + 1);
      dB[p] = B.at(p, k + 1) - B.at(p, k);
      state[p] = S.at(p, k);
    }
    Design d(state, o.degree, k);
    if (o.z == ZEstimator::centered) {
      auto mean = d.fit(next);
      for (std::size_t p = 0; p < M; ++p) work[p] = (next[p] - mean[p]) * dB[p] / dt;
    } else {
      for (std::size_t p = 0; p < M; ++p) work[p] = next[p] * dB[p] / dt;
    }
    z = d.fit(work);
    for (std::size_t p = 0; p < M; ++p) {
      double g = (*spec.g)({t, state[p], next[p], z[p]});
      work[p] = next[p] + g * dt - (o.martingale_control ? z[p] * dB[p] : 0.0);
    }
    auto y = d.fit(work);
    for (std::size_t p = 0; p < M; ++p) {
      if (!std::isfinite(y[p]) || !std::isfinite(z[p])) {
        throw RegressionError("non-finite regression output", k);
      }
      Y.at(p, k) = y[p];
      Z.at(p, k) = z[p];
    }
  }
  for (std::size_t p = 0; p < M; ++p) Z.at(p, N) = Z.at(p, N - 1);
  pe.add("Y", std::move(Y));
  pe.add("Z", std::move(Z));
}

bool is_quadratic(const Expr& g) {
  return expr::simplify_basic(g) == expr::pow(expr::symbol("z"), expr::number(2));
}

}  // namespace

RateFn rate_of(const flow::GroupFlow& f) {
  return [&f](double t, double y, double x) { return flow::time_rate_eta(f, t, y, x); };
}

PathEnsemble simulate_brownian(const TimeGrid& grid, std::size_t paths, std::uint64_t seed) {
  if (paths < 1) throw Error("need at least one path");
  PathEnsemble pe;
  pe.grid = grid;
  pe.paths = paths;
  pe.seed = seed;
  Process B(grid, paths);
  for (std::size_t p = 0; p < paths; ++p) {
    std::mt19937_64 rng(path_seed(seed, p));
    std::normal_distribution<double> normal(0.0, 1.0);
    B.at(p, 0) = 0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      B.at(p, k + 1) = B.at(p, k) + std::sqrt(grid.dt(k)) * normal(rng);
    }
  }
  pe.add("B", std::move(B));
  return pe;
}

void random_time_change(PathEnsemble& pe, const RateFn& eta) {
  const TimeGrid& grid = pe.grid;
  const std::size_t M = pe.paths, N = grid.steps();
  const auto* Y = optional_row(pe, "Y");
  const auto* X = optional_row(pe, "X");
  Process beta(grid, M);
  double horizon = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < M; ++p) {
    double b = 0;
    beta.at(p, 0) = 0;
    for (std::size_t k = 0; k < N; ++k) {
      const std::size_t i = p * grid.size() + k;
      double e = eta(grid[k], Y ? (*Y)[i] : 0.0, X ? (*X)[i] : 0.0);
      if (!(e > 0) || !std::isfinite(e)) {
        throw NonPositiveRateError("time-change rate " + std::to_string(e) + " on path " +
                                   std::to_string(p) + " at step " + std::to_string(k));
      }
      b += e * e * grid.dt(k);
      beta.at(p, k + 1) = b;
    }
    horizon = std::min(horizon, b);
  }
  TimeGrid clock = TimeGrid::uniform(horizon, N);
  Process alpha(clock, M);
  for (std::size_t p = 0; p < M; ++p) {
    auto row = beta.row(p);
    for (std::size_t k = 0; k < clock.size(); ++k) {
      alpha.at(p, k) = interpolate(row, grid.nodes(), clock[k]);
    }
  }
  pe.add("beta", std::move(beta));
  pe.add("alpha", std::move(alpha));
}

void transformed_brownian(PathEnsemble& pe, const RateFn& eta) {
  if (!pe.has("alpha")) random_time_change(pe, eta);
  const TimeGrid& grid = pe.grid;
  const std::size_t M = pe.paths, N = grid.steps();
  const Process& B = pe.get("B");
  const auto* Y = optional_row(pe, "Y");
  const auto* X = optional_row(pe, "X");
  Process bbar(grid, M);
  for (std::size_t p = 0; p < M; ++p) {
    double s = 0;
    bbar.at(p, 0) = 0;
    for (std::size_t k = 0; k < N; ++k) {
      // Left endpoint only: eta is evaluated at node k for the increment k -> k+1.
      const std::size_t i = p * grid.size() + k;
      double e = eta(grid[k], Y ? (*Y)[i] : 0.0, X ? (*X)[i] : 0.0);
      if (!(e > 0)) throw NonPositiveRateError("time-change rate is not positive");
      s += e * (B.at(p, k + 1) - B.at(p, k));
      bbar.at(p, k + 1) = s;
    }
  }
  const Process& alpha = pe.get("alpha");
  Process composed(alpha.grid, M);
  for (std::size_t p = 0; p < M; ++p) {
    auto row = bbar.row(p);
    for (std::size_t k = 0; k < alpha.grid.size(); ++k) {
      composed.at(p, k) = interpolate(grid.nodes(), row, alpha.at(p, k));
    }
  }
  pe.add("Bbar", std::move(bbar));
  pe.add("Bbar_alpha", std::move(composed));
}

StatReport bm_statistics(const PathEnsemble& pe, const std::string& name) {
  const Process& W = pe.get(name);
  const std::size_t M = W.paths;
  const double m = static_cast<double>(M);
  StatReport r;
  auto cps = checkpoints(W.grid.steps());
  for (std::size_t k : cps) {
    const double t = W.grid[k] - W.grid[0];
    auto col = W.column(k);
    Moments mo = moments(col);
    r.add(at_time("mean", t), mo.mean, -3 * std::sqrt(t / m), 3 * std::sqrt(t / m), M);
    r.add(at_time("variance", t), mo.var, t * (1 - 3 * std::sqrt(2 / m)),
          t * (1 + 3 * std::sqrt(2 / m)), M);
    std::vector<double> qv(M, 0.0);
    for (std::size_t p = 0; p < M; ++p) {
      for (std::size_t j = 0; j < k; ++j) {
        double d = W.at(p, j + 1) - W.at(p, j);
        qv[p] += d * d;
      }
    }
    Moments mq = moments(qv);
    double se = std::sqrt(mq.var / m);
    r.add(at_time("quadratic_variation", t), mq.mean, t - 3 * se, t + 3 * se, M);
  }
  std::size_t prev = 0;
  for (std::size_t i = 0; i + 1 < cps.size(); ++i) {
    std::vector<double> a(M), b(M);
    for (std::size_t p = 0; p < M; ++p) {
      a[p] = W.at(p, cps[i]) - W.at(p, prev);
      b[p] = W.at(p, cps[i + 1]) - W.at(p, cps[i]);
    }
    r.add(at_time("increment_correlation", W.grid[cps[i]]), correlation(a, b), -3 / std::sqrt(m),
          3 / std::sqrt(m), M);
    prev = cps[i];
  }
  return r;
}

void solve_bsde_regression(const determining::BsdeProblem& p, PathEnsemble& pe,
                           const RegressionOptions& options) {
  auto c = determining::constant_values(p.constants);
  CompiledExpr g(p.g, {"t", "x", "y", "z"}, c);
  CompiledExpr H(p.H, {determining::terminal_var}, c);
  if (std::abs(pe.grid.T() - p.T) > 1e-12 * p.T) throw Error("grid horizon differs from T");
  backward(pe, {&g, &H, "B"}, options);
}

void solve_bsde_regression(const determining::FbsdeProblem& p, PathEnsemble& pe,
                           const RegressionOptions& options) {
  auto c = determining::constant_values(p.constants);
  CompiledExpr g(p.g, {"t", "x", "y", "z"}, c);
  CompiledExpr H(p.H, {determining::terminal_var}, c);
  if (std::abs(pe.grid.T() - p.T) > 1e-12 * p.T) throw Error("grid horizon differs from T");
  backward(pe, {&g, &H, "X"}, options);
}

Process quadratic_oracle(const determining::BsdeProblem& p, const PathEnsemble& pe, int nodes) {
  if (!is_quadratic(p.g)) throw Error("quadratic_oracle needs the generator g = z^2");
  const Process& B = pe.get("B");
  const TimeGrid& grid = pe.grid;
  const std::size_t M = pe.paths, N = grid.steps();
  Process Y(grid, M);
  Expr H = expr::simplify_basic(p.H);
  auto c = determining::constant_values(p.constants);
  if (H == expr::symbol(determining::terminal_var)) {
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t k = 0; k <= N; ++k) Y.at(i, k) = B.at(i, k) + (grid.T() - grid[k]);
    }
    return Y;
  }
  CompiledExpr h(H, {determining::terminal_var}, c);
  if (expr::free_symbols(H).empty() ||
      !expr::depends_on(H, determining::terminal_var)) {
    double v = h({0.0});
    std::fill(Y.values.begin(), Y.values.end(), v);
    return Y;
  }
  // Probabilists' Gauss-Hermite rule from the Jacobi matrix.
  if (nodes < 2) throw Error("quadrature needs at least 2 nodes");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int i = 1; i < nodes; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  Eigen::VectorXd u = eig.eigenvalues();
  Eigen::VectorXd w = eig.eigenvectors().row(0).transpose().array().square();
  for (std::size_t k = 0; k <= N; ++k) {
    const double sd = std::sqrt(grid.T() - grid[k]);
    for (std::size_t i = 0; i < M; ++i) {
      const double b = B.at(i, k);
      if (k == N) {
        Y.at(i, k) = h({b});
        continue;
      }
      // log-sum-exp keeps large H finite.
      std::vector<double> v(nodes);
      double top = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < nodes; ++j) {
        v[j] = 2 * h({b + sd * u[j]});
        top = std::max(top, v[j]);
      }
      double s = 0;
      for (int j = 0; j < nodes; ++j) s += w[j] * std::exp(v[j] - top);
      Y.at(i, k) = 0.5 * (top + std::log(s));
    }
  }
  return Y;
}

TransformedCheck verify_transformed_solution(const determining::BsdeProblem& p,
                                             const flow::GroupFlow& f, PathEnsemble& pe) {
  const TimeGrid& grid = pe.grid;
  const std::size_t M = pe.paths, N = grid.steps();
  const Process& B = pe.get("B");
  const Process& Y = pe.get("Y");
  const Process& Z = pe.get("Z");
  auto c = determining::constant_values(p.constants);
  CompiledExpr g(p.g, {"t", "x", "y", "z"}, c);
  const double a = f.a();

  // The quadratic-flow identity exp(2 Ybar) = 2a + exp(2 Y) only holds for
  // phi = (1/2) ln(2a + exp(2y)).
  bool quadratic_flow = false;
  if (f.closed_form()) {
    auto phi = expr::simplify_basic(
        expr::rational(1, 2) *
        expr::ln(expr::number(2) * expr::symbol("a") +
                 expr::exp(expr::number(2) * expr::symbol("y"))));
    quadratic_flow = f.closed_form()->phi == phi && is_quadratic(p.g);
  }
  if (quadratic_flow && a < 0) throw DomainError("the quadratic flow is only guarded for a >= 0");

  Process ybar(grid, M), zbar(grid, M), beta(grid, M), bbar(grid, M);
  TransformedCheck out;
  for (std::size_t i = 0; i < M; ++i) {
    double b = 0, w = 0;
    for (std::size_t k = 0; k <= N; ++k) {
      const double t = grid[k];
      const double y = Y.at(i, k);
      ybar.at(i, k) = f(t, y).y;
      zbar.at(i, k) = flow::zeta_bsde(f, t, y, Z.at(i, k));
      beta.at(i, k) = b;
      bbar.at(i, k) = w;
      if (k < N) {
        double e = flow::time_rate_eta(f, t, y);
        b += e * e * grid.dt(k);
        w += e * (B.at(i, k + 1) - B.at(i, k));
      }
      if (quadratic_flow) {
        double lhs = std::exp(2 * ybar.at(i, k)) - 2 * a;
        double rhs = std::exp(2 * y);
        out.identity_error = std::max(out.identity_error, std::abs(lhs - rhs) / rhs);
      }
    }
  }

  out.residuals.assign(N, std::vector<double>(M));
  out.original_residuals.assign(N, std::vector<double>(M));
  double ss = 0, ss0 = 0;
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t i = 0; i < M; ++i) {
      const double db = beta.at(i, k + 1) - beta.at(i, k);
      const double dw = bbar.at(i, k + 1) - bbar.at(i, k);
      double r = ybar.at(i, k) -
                 (ybar.at(i, k + 1) +
                  g({beta.at(i, k), 0.0, ybar.at(i, k + 1), zbar.at(i, k)}) * db -
                  zbar.at(i, k) * dw);
      double r0 = Y.at(i, k) - (Y.at(i, k + 1) +
                                g({grid[k], 0.0, Y.at(i, k + 1), Z.at(i, k)}) * grid.dt(k) -
                                Z.at(i, k) * (B.at(i, k + 1) - B.at(i, k)));
      out.residuals[k][i] = r;
      out.original_residuals[k][i] = r0;
      ss += r * r;
      ss0 += r0 * r0;
    }
    Moments m = moments(out.residuals[k]);
    double se = std::sqrt(m.var / static_cast<double>(M));
    out.report.add("residual_mean[" + std::to_string(k) + "]", m.mean, -3 * se, 3 * se, M);
  }
  const double count = static_cast<double>(N * M);
  out.rms_transformed = std::sqrt(ss / count);
  out.rms_original = std::sqrt(ss0 / count);
  out.report.add("rms_ratio", out.rms_transformed / out.rms_original, 0, 3, N * M);

  if (quadratic_flow) {
    out.report.add("pathwise_identity", out.identity_error, 0, 1e-12, (N + 1) * M);
    std::vector<double> start(M);
    for (std::size_t i = 0; i < M; ++i) start[i] = std::exp(2 * ybar.at(i, 0)) - 2 * a;
    const double ref = moments(start).mean;
    for (std::size_t k : checkpoints(N)) {
      std::vector<double> v(M);
      for (std::size_t i = 0; i < M; ++i) v[i] = std::exp(2 * ybar.at(i, k)) - 2 * a;
      Moments m = moments(v);
      double se = std::sqrt(m.var / static_cast<double>(M));
      out.report.add(at_time("martingale_mean", grid[k]), m.mean, ref - 3 * se, ref + 3 * se, M);
    }
  }
  pe.add("Ybar", std::move(ybar));
  pe.add("Zbar", std::move(zbar));
  pe.processes["beta"] = std::move(beta);
  pe.processes["Bbar"] = std::move(bbar);
  return out;
}

PathEnsemble euler_forward_sde(const determining::FbsdeProblem& p, const TimeGrid& grid,
                               std::size_t paths, std::uint64_t seed) {
  PathEnsemble pe = simulate_brownian(grid, paths, seed);
  auto c = determining::constant_values(p.constants);
  CompiledExpr b(p.b, {"t", "x"}, c), s(p.sigma, {"t", "x"}, c);
  const Process& B = pe.get("B");
  Process X(grid, paths);
  for (std::size_t i = 0; i < paths; ++i) {
    double x = p.x0;
    X.at(i, 0) = x;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const double t = grid[k];
      x += b({t, x}) * grid.dt(k) + s({t, x}) * (B.at(i, k + 1) - B.at(i, k));
      if (!std::isfinite(x)) {
        throw DomainError("forward SDE blew up on path " + std::to_string(i) + " at step " +
                          std::to_string(k));
      }
      X.at(i, k + 1) = x;
    }
  }
  pe.add("X", std::move(X));
  return pe;
}

std::vector<std::size_t> checkpoints(std::size_t steps) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i <= 5; ++i) {
    out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                               static_cast<double>(steps * i) / 5.0))));
  }
  return out;
}

}  // namespace liesym::stochastic
