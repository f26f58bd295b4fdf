#pragma once

#include <optional>
#include <vector>

#include "liesym/expr/eval.hpp"
#include "liesym/expr/expr.hpp"
#include "liesym/solver/solver.hpp"

namespace liesym::flow {

/// Image of a point (t, y[, x]) under the group element a.
struct State {
  double time = 0;  ///< Xi
  double y = 0;     ///< phi
  double x = 0;     ///< phi^x (FBSDE), else the input x
};

/// Finite transformations in closed form, as expressions in t, x, y and the
/// group parameter symbol `a`.
struct ClosedForm {
  expr::Expr Xi;
  expr::Expr phi;
  expr::Expr phix;
  std::string rule;  ///< which library case matched
};

/// Recognizes h in {0, k t}, gamma in {0, c, c exp(m y)}, xi in {0, c}
/// with numeric k, c, m. Returns nullopt otherwise.
std::optional<ClosedForm> recognize(const solver::SymmetryCandidate& c);

struct FlowOptions {
  bool use_closed_form = true;
  double tolerance = 1e-10;  ///< step-halving acceptance
  int min_steps = 16;
  int max_steps = 1 << 20;
};

/// The one-parameter group generated by a candidate, at a fixed parameter a.
/// Immutable; evaluation is thread-safe.
class GroupFlow {
 public:
  GroupFlow(const solver::SymmetryCandidate& c, double a, const expr::Values& constants = {},
            FlowOptions options = {});

  /// A fixed map given directly by expressions in (t, x, y); `a` is only
  /// recorded. Derivatives are taken symbolically.
  static GroupFlow snapshot(const ClosedForm& maps, double a);

  double a() const { return a_; }
  bool has_closed_form() const { return closed_.has_value(); }
  const std::optional<ClosedForm>& closed_form() const { return closed_; }

  /// Closed form when recognized, else the integrated flow.
  State operator()(double t, double y, double x = 0) const;

  /// Always RK4 integration of the Lie equations from parameter 0 to a.
  State integrate(double t, double y, double x = 0) const;

  double Xi_t(double t, double y, double x = 0) const;
  double phi_y(double t, double y, double x = 0) const;
  double phi_x(double t, double y, double x = 0) const;

  int calibrated_steps() const { return steps_; }

  /// Integrated image together with its Jacobian d(Xi, phi, phix)/d(t, y, x),
  /// from the variational equations.
  struct Tangent {
    State state;
    double jacobian[3][3] = {};
  };
  Tangent tangent(double t, double y, double x = 0) const;

 private:
  GroupFlow() = default;
  State rk4(double t, double y, double x, int steps) const;
  State closed(double t, double y, double x) const;
  Tangent rk4_tangent(double t, double y, double x, int steps) const;

  double a_ = 0;
  bool numeric_ = false;
  FlowOptions options_;
  expr::CompiledExpr h_, gamma_, xi_;
  expr::CompiledExpr jac_[3][3];
  bool has_xi_ = false;
  int steps_ = 0;

  std::optional<ClosedForm> closed_;
  expr::CompiledExpr cXi_, cphi_, cphix_, cXi_t_, cphi_y_, cphi_x_;
};

GroupFlow exponentiate_flow(const solver::SymmetryCandidate& c, double a,
                            const expr::Values& constants = {}, FlowOptions options = {});

/// eta = sqrt(Xi_t). Throws NonPositiveRateError when Xi_t <= 0.
double time_rate_eta(const GroupFlow& f, double t, double y, double x = 0);

/// phi_y z / eta.
double zeta_bsde(const GroupFlow& f, double t, double y, double z);

/// (phi_y z + sigma phi_x) / eta.
double zeta_fbsde(const GroupFlow& f, double sigma, double t, double x, double y, double z);

struct TerminalTransform {
  std::vector<double> values;    ///< phi(T, xi_i, a)
  std::vector<double> horizons;  ///< beta_i(T), when supplied
};

TerminalTransform transform_terminal(const GroupFlow& f, double T,
                                     const std::vector<double>& terminal,
                                     const std::vector<double>& horizons = {},
                                     const std::vector<double>& x = {});

}  // namespace liesym::flow
