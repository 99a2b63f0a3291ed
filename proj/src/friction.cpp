#include "hswme/friction.hpp"

#include <cmath>
#include <string>

namespace hswme {

namespace {

void require_positive_height(const MacroState& U, const char* where) {
  for (std::size_t j = 0; j < U.n_cells(); ++j) {
    if (!(U.h(j) > 0.0)) {
      throw SolverError(std::string(where) + ": non-positive water height in cell " + std::to_string(j), j);
    }
  }
}

// y = Q^T x and y = Q x for the n x n Hessenberg basis.
void apply_qt(const Matrix& q, std::span<const double> x, std::span<double> y) {
  const std::size_t n = q.rows();
  for (std::size_t k = 0; k < n; ++k) y[k] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto qi = q.row(i);
    const double xi = x[i];
    for (std::size_t k = 0; k < n; ++k) y[k] += qi[k] * xi;
  }
}

void apply_q(const Matrix& q, std::span<const double> x, std::span<double> y) {
  const std::size_t n = q.rows();
  for (std::size_t i = 0; i < n; ++i) {
    auto qi = q.row(i);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += qi[k] * x[k];
    y[i] = s;
  }
}

}  // namespace

MacroState macro_friction_step(const MacroState& U, std::span<const double> h_alpha_sum, double dt,
                               const ModelParams& params) {
  require_positive_height(U, "macro_friction_step");
  if (!h_alpha_sum.empty() && h_alpha_sum.size() != U.n_cells()) {
    throw std::invalid_argument("macro_friction_step: moment sum length mismatch");
  }
  const double k = params.slip_rate();
  MacroState out = U;
  for (std::size_t j = 0; j < U.n_cells(); ++j) {
    const double h = U.h(j);
    const double alpha_sum = h_alpha_sum.empty() ? 0.0 : h_alpha_sum[j] / h;
    out.hu(j) = (U.hu(j) - dt * k * alpha_sum) / (1.0 + dt * k / h);
  }
  return out;
}

MacroState macro_friction_step(const MacroState& U, const MicroState& V, double dt, const ModelParams& params) {
  if (V.n_moments() == 0) return macro_friction_step(U, std::span<const double>{}, dt, params);
  if (V.n_cells() != U.n_cells()) throw std::invalid_argument("macro_friction_step: micro/macro size mismatch");
  Vector sums(U.n_cells(), 0.0);
  for (std::size_t j = 0; j < sums.size(); ++j)
    for (double v : V.row(j)) sums[j] += v;
  return macro_friction_step(U, sums, dt, params);
}

FrictionSolver::FrictionSolver(FrictionOperators ops) : ops_(std::move(ops)), hess_(hessenberg(ops_.m1_unit)) {
  const std::size_t n = ops_.n_moments();
  b_tilde_.assign(n, 0.0);
  ones_tilde_.assign(n, 0.0);
  const Vector ones(n, 1.0);
  apply_qt(hess_.Q, ops_.b_unit, b_tilde_);
  apply_qt(hess_.Q, ones, ones_tilde_);
}

void FrictionSolver::solve(double c1, double c2, std::span<double> x, FrictionWorkspace& ws) const {
  const std::size_t n = n_moments();
  if (x.size() != n) throw std::invalid_argument("FrictionSolver::solve: length mismatch");
  if (ws.rhs.rows() != n || ws.rhs.cols() != 2) ws.rhs = Matrix(n, 2);
  ws.tmp.resize(n);

  apply_qt(hess_.Q, x, ws.tmp);
  for (std::size_t k = 0; k < n; ++k) {
    ws.rhs(k, 0) = ws.tmp[k];
    ws.rhs(k, 1) = b_tilde_[k];
  }
  solve_shifted_hessenberg(hess_.H, c1, ws.rhs, ws.t);

  double op = 0.0;
  double oq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    op += ones_tilde_[k] * ws.rhs(k, 0);
    oq += ones_tilde_[k] * ws.rhs(k, 1);
  }
  const double denom = 1.0 - c2 * oq;
  if (!(std::abs(denom) > 1e-14)) throw SingularMatrixError("FrictionSolver::solve: singular rank-one update");
  const double s = op / denom;
  for (std::size_t k = 0; k < n; ++k) ws.tmp[k] = ws.rhs(k, 0) + c2 * s * ws.rhs(k, 1);
  apply_q(hess_.Q, ws.tmp, x);
}

void FrictionSolver::solve_shifted(double c, Matrix& rhs, FrictionWorkspace& ws) const {
  const std::size_t n = n_moments();
  if (rhs.rows() != n) throw std::invalid_argument("FrictionSolver::solve_shifted: row mismatch");
  Matrix rt = transpose_times(hess_.Q, rhs);
  solve_shifted_hessenberg(hess_.H, c, rt, ws.t);
  rhs = hess_.Q * rt;
}

MicroState micro_friction_step(const MacroState& U_new, const MicroState& V, double dt, const ModelParams& params) {
  if (V.n_moments() == 0 || params.nu == 0.0) {
    if (V.n_moments() != 0 && V.n_cells() != U_new.n_cells()) {
      throw std::invalid_argument("micro_friction_step: micro/macro size mismatch");
    }
    return V;
  }
  ModelParams p = params;
  p.n_moments = V.n_moments();
  return micro_friction_step(U_new, V, dt, FrictionSolver(build_friction_operators(p)));
}

MicroState micro_friction_step(const MacroState& U_new, const MicroState& V, double dt, const FrictionSolver& solver) {
  const std::size_t n = V.n_moments();
  if (V.n_cells() != U_new.n_cells()) throw std::invalid_argument("micro_friction_step: micro/macro size mismatch");
  if (n != solver.n_moments()) throw std::invalid_argument("micro_friction_step: moment count mismatch");
  require_positive_height(U_new, "micro_friction_step");
  const FrictionOperators& ops = solver.operators();
  if (ops.nu == 0.0) return V;

  MicroState out = V;
  FrictionWorkspace ws;
  for (std::size_t j = 0; j < V.n_cells(); ++j) {
    const double h = U_new.h(j);
    const double forcing = dt * U_new.velocity(j) * ops.slip_rate;
    auto x = out.row(j);
    for (std::size_t k = 0; k < n; ++k) x[k] += forcing * ops.b_unit[k];
    try {
      solver.solve(dt * ops.nu / (h * h), dt * ops.slip_rate / h, x, ws);
    } catch (const SingularMatrixError&) {
      throw SolverError("micro_friction_step: singular friction matrix in cell " + std::to_string(j), j);
    }
  }
  return out;
}

Matrix solve_friction_l_step(const FrictionSolver& solver, const Matrix& h2, const Matrix& h1, double dt,
                             const Matrix& rhs) {
  const std::size_t n = solver.n_moments();
  const std::size_t r = h2.rows();
  if (rhs.rows() != n || rhs.cols() != r || h1.rows() != r || h2.cols() != r || h1.cols() != r) {
    throw std::invalid_argument("solve_friction_l_step: shape mismatch");
  }
  const FrictionOperators& ops = solver.operators();
  const SymmetricEigen eig = symmetric_eigen(h2);
  const Matrix& Z = eig.vectors;
  const Matrix G = transpose_times(Z, h1 * Z);
  const Matrix RZ = rhs * Z;

  // Column k of L Z solves (I - dt lambda_k M1) y = (R Z)_k + dt c_k b, where
  // c = G (1^T L Z)^T couples the columns through the rank-one term.
  Matrix P(n, r);
  Matrix q(n, r);
  Vector p1(r), sigma(r);
  FrictionWorkspace ws;
  Matrix cols(n, 2);
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      cols(i, 0) = RZ(i, k);
      cols(i, 1) = ops.slip_rate * ops.b_unit[i];
    }
    solver.solve_shifted(dt * ops.nu * eig.values[k], cols, ws);
    p1[k] = 0.0;
    sigma[k] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      P(i, k) = cols(i, 0);
      q(i, k) = cols(i, 1);
      p1[k] += cols(i, 0);
      sigma[k] += cols(i, 1);
    }
  }

  Matrix sys(r, r);
  Matrix gp(r, 1);
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t m = 0; m < r; ++m) {
      sys(a, m) = (a == m ? 1.0 : 0.0) - dt * G(a, m) * sigma[m];
      gp(a, 0) += G(a, m) * p1[m];
    }
  }
  const Matrix c = solve_dense(sys, gp);

  Matrix Y = P;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < r; ++k) Y(i, k) += dt * c(k, 0) * q(i, k);
  return times_transpose(Y, Z);
}

}  // namespace hswme
