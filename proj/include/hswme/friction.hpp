#pragma once

#include <cstddef>
#include <span>

#include "hswme/model.hpp"
#include "hswme/transport.hpp"

namespace hswme {

/// Backward Euler on d(hu)/dt = -(nu/lambda)(u_m + sum alpha) with h and
/// the moments held at their incoming values. `h_alpha_sum` is
/// sum_k h*alpha_k per cell (empty for the plain SWE).
MacroState macro_friction_step(const MacroState& U, std::span<const double> h_alpha_sum, double dt,
                               const ModelParams& params);
MacroState macro_friction_step(const MacroState& U, const MicroState& V, double dt, const ModelParams& params);

/// Scratch buffers reused across per-cell solves.
struct FrictionWorkspace {
  Matrix t;
  Matrix rhs;
  Vector tmp;
};

/// Implicit solver for the moment friction operator
///   D(c1, c2) = I - c1 * M1_unit - c2 * b_unit 1^T.
/// M1_unit is reduced once to Hessenberg form; each solve then costs
/// O(N^2) with the rank-one part handled by Sherman-Morrison.
class FrictionSolver {
 public:
  explicit FrictionSolver(FrictionOperators ops);

  const FrictionOperators& operators() const { return ops_; }
  std::size_t n_moments() const { return ops_.n_moments(); }

  /// Overwrites x with D(c1, c2)^{-1} x.
  void solve(double c1, double c2, std::span<double> x, FrictionWorkspace& ws) const;

  /// Overwrites every column of rhs (N x p) with (I - c M1_unit)^{-1} rhs.
  void solve_shifted(double c, Matrix& rhs, FrictionWorkspace& ws) const;

 private:
  FrictionOperators ops_;
  HessenbergForm hess_;
  Vector b_tilde_;    // Q^T b_unit
  Vector ones_tilde_;  // Q^T 1
};

/// Per-cell solve D_j V_j^{n+1} = V_j + dt u_{m,j} b with
/// D_j = I - (dt/h_j^2) M1 - (dt/h_j) M2; h and u_m from U_new.
MicroState micro_friction_step(const MacroState& U_new, const MicroState& V, double dt, const ModelParams& params);
MicroState micro_friction_step(const MacroState& U_new, const MicroState& V, double dt, const FrictionSolver& solver);

/// Solves  L - dt M1 L H2 - dt b 1^T L H1 = rhs  for L (N x r), with H1, H2
/// symmetric r x r. M1 and b are the solver's operators at its viscosity.
Matrix solve_friction_l_step(const FrictionSolver& solver, const Matrix& h2, const Matrix& h1, double dt,
                             const Matrix& rhs);

}  // namespace hswme
