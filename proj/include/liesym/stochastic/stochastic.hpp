#pragma once

#include <functional>
#include <string>
#include <vector>

#include "liesym/determining/problem.hpp"
#include "liesym/flow/flow.hpp"
#include "liesym/stochastic/paths.hpp"

namespace liesym::stochastic {

struct StatTest {
  std::string name;
  double statistic = 0;
  double lower = 0;  ///< acceptance interval
  double upper = 0;
  bool pass = false;
  std::size_t samples = 0;

  bool operator==(const StatTest&) const = default;
};

struct StatReport {
  std::vector<StatTest> tests;
  bool all_pass() const;
  std::size_t failures() const;
  void add(std::string name, double statistic, double lower, double upper, std::size_t n);

  bool operator==(const StatReport&) const = default;
};

/// Time-change rate eta(t, y, x) along a path.
using RateFn = std::function<double(double t, double y, double x)>;

RateFn rate_of(const flow::GroupFlow& f);

/// Brownian paths "B" with N(0, dt) increments; path i uses its own
/// generator seeded from (seed, i).
PathEnsemble simulate_brownian(const TimeGrid& grid, std::size_t paths, std::uint64_t seed);

/// Adds "beta" (left-endpoint sums of eta^2 on the grid) and "alpha" (its
/// per-path inverse on a uniform clock over [0, min_i beta_i(T)] with the
/// same number of nodes). eta reads Y and X when present, else 0.
void random_time_change(PathEnsemble& pe, const RateFn& eta);

/// Adds "Bbar" = sum eta(t_k, Y_k) dB_k and "Bbar_alpha" = Bbar(alpha(s)) on
/// the transformed clock. Runs random_time_change first when "alpha" is
/// missing.
void transformed_brownian(PathEnsemble& pe, const RateFn& eta);

/// Node indices round(k N / 5), k = 1..5, used as checkpoints.
std::vector<std::size_t> checkpoints(std::size_t steps);

/// Standard-Brownian-motion checks at 5 checkpoints: mean, variance,
/// quadratic variation and adjacent-increment correlation.
StatReport bm_statistics(const PathEnsemble& pe, const std::string& name);

enum class ZEstimator {
  plain,     ///< regress(Y_{k+1} dB_k) / dt
  centered,  ///< regress((Y_{k+1} - E[Y_{k+1} | state]) dB_k) / dt
};

struct RegressionOptions {
  int degree = 3;
  ZEstimator z = ZEstimator::centered;
  /// Regress Y_{k+1} + g dt - Z_k dB_k instead of Y_{k+1} + g dt (same
  /// conditional expectation).
  bool martingale_control = true;
};

/// Backward least-squares Monte Carlo. Adds "Y" at every node and "Z" (with
/// the last node copied from the one before). The state is B for a BSDE and
/// X for an FBSDE. Throws RegressionError on a rank-deficient design.
void solve_bsde_regression(const determining::BsdeProblem& p, PathEnsemble& pe,
                           const RegressionOptions& options = {});
void solve_bsde_regression(const determining::FbsdeProblem& p, PathEnsemble& pe,
                           const RegressionOptions& options = {});

/// Reference Y for g = z^2: B_t + (T - t) for H(x) = x, the constant for
/// constant H, else (1/2) ln E[exp(2 H(B_T)) | B_t] by Gauss-Hermite
/// quadrature with `nodes` points. Throws Error when g is not z^2.
Process quadratic_oracle(const determining::BsdeProblem& p, const PathEnsemble& pe,
                         int nodes = 64);

struct TransformedCheck {
  StatReport report;
  double rms_original = 0;
  double rms_transformed = 0;
  double identity_error = 0;  ///< max |exp(2 Ybar) - 2a - exp(2 Y)| / exp(2 Y)
  /// Per-step residuals, steps x paths.
  std::vector<std::vector<double>> residuals;
  std::vector<std::vector<double>> original_residuals;
};

/// Builds Ybar = phi(t, Y), Zbar = zeta(t, Y, Z), Bbar and beta per path and
/// tests the discrete BSDE residual on the transformed clock.
TransformedCheck verify_transformed_solution(const determining::BsdeProblem& p,
                                             const flow::GroupFlow& f, PathEnsemble& pe);

/// Euler-Maruyama for dX = b dt + sigma dB; adds "B" and "X".
PathEnsemble euler_forward_sde(const determining::FbsdeProblem& p, const TimeGrid& grid,
                               std::size_t paths, std::uint64_t seed);

}  // namespace liesym::stochastic
