#include "hswme/dlra.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "hswme/detail/splitting.hpp"

namespace hswme {

namespace {

Vector row_vector(const Matrix& m, std::size_t i) { return Vector(m.row(i).begin(), m.row(i).end()); }

// X (S v) without forming X S.
Vector times_coefficients(const Matrix& X, const Matrix& S, std::span<const double> v) {
  const Vector sv = matvec(S, v);
  return matvec(X, sv);
}

}  // namespace

MicroState LowRankFactors::lift() const { return MicroState(times_transpose(X * S, W)); }

Vector LowRankFactors::h_alpha1() const { return times_coefficients(X, S, row_vector(W, 0)); }

Vector LowRankFactors::h_alpha_sum() const {
  return times_coefficients(X, S, transpose_matvec(W, Vector(W.rows(), 1.0)));
}

LowRankFactors dlra_init(const MicroState& V0, std::size_t r) {
  if (r == 0 || r > std::min(V0.n_cells(), V0.n_moments())) {
    throw std::invalid_argument("dlra_init: rank must lie in [1, min(N_x, N)]");
  }
  const SvdResult svd = truncated_svd(V0.matrix(), r);
  LowRankFactors f;
  f.X = svd.U;
  f.W = svd.Vt.transposed();
  f.S = transpose_times(f.X, V0.matrix() * f.W);
  return f;
}

Matrix weighted_gram(const Matrix& X, std::span<const double> w) {
  const std::size_t r = X.cols();
  Matrix g(r, r);
  for (std::size_t j = 0; j < X.rows(); ++j) {
    auto x = X.row(j);
    for (std::size_t a = 0; a < r; ++a) {
      const double wa = w[j] * x[a];
      for (std::size_t b = a; b < r; ++b) g(a, b) += wa * x[b];
    }
  }
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < a; ++b) g(a, b) = g(b, a);
  return g;
}

ProjectedTransport project_transport(const MicroInterfaceData& data, const Matrix& X, std::size_t n_moments,
                                     const Grid& grid) {
  const std::size_t n = X.rows();
  const std::size_t r = X.cols();
  if (data.n_interfaces() != n + 1 || n != grid.n_cells) throw std::invalid_argument("project_transport: shape mismatch");

  Matrix dx(n + 1, r);
  for (std::size_t i = 0; i <= n; ++i) {
    auto xl = X.row(neighbor(i, -1, n, grid.bc));
    auto xr = X.row(neighbor(i, 0, n, grid.bc));
    auto d = dx.row(i);
    for (std::size_t a = 0; a < r; ++a) d[a] = xr[a] - xl[a];
  }

  ProjectedTransport p{Matrix(r, r), Matrix(r, r), Matrix(r, r), Matrix(n_moments, r)};
  Vector avg(r), au(r), aa(r);
  for (std::size_t j = 0; j < n; ++j) {
    auto xj = X.row(j);
    auto xm = X.row(neighbor(j, -1, n, grid.bc));
    auto xp = X.row(neighbor(j, 1, n, grid.bc));
    auto dl = dx.row(j);
    auto dr = dx.row(j + 1);
    for (std::size_t a = 0; a < r; ++a) {
      avg[a] = xp[a] + xm[a];
      au[a] = data.u_bar[j + 1] * dr[a] + data.u_bar[j] * dl[a];
      aa[a] = data.alpha_bar[j + 1] * dr[a] + data.alpha_bar[j] * dl[a];
    }
    for (std::size_t a = 0; a < r; ++a) {
      auto pa = p.p_avg.row(a);
      auto pu = p.p_u.row(a);
      auto pal = p.p_alpha.row(a);
      for (std::size_t b = 0; b < r; ++b) {
        pa[b] += avg[a] * xj[b];
        pu[b] += au[a] * xj[b];
        pal[b] += aa[a] * xj[b];
      }
    }
    const double e1 = data.e1[j + 1] + data.e1[j];
    const double e2 = data.e2[j + 1] + data.e2[j];
    for (std::size_t b = 0; b < r; ++b) {
      if (n_moments >= 1) p.g(0, b) += e1 * xj[b];
      if (n_moments >= 2) p.g(1, b) += e2 * xj[b];
    }
  }
  return p;
}

DlraTransportStages dlra_transport_stages(const MacroState& U_tilde, const MacroState& U_old,
                                          const LowRankFactors& f, double dt, const Grid& grid) {
  const std::size_t n = f.X.rows();
  const std::size_t nm = f.W.rows();
  const std::size_t r = f.rank();
  if (n != U_old.n_cells() || n != U_tilde.n_cells() || f.W.cols() != r || f.X.cols() != r || f.S.cols() != r) {
    throw std::invalid_argument("dlra_transport_step: shape mismatch");
  }
  const OffdiagA A(nm);
  const double c = dt / (2.0 * grid.dx());

  DlraTransportStages st;
  st.data = micro_interface_data(U_tilde, primitive_alpha1(U_old, f.h_alpha1()), grid);

  // K-step: the reduced Lax-Friedrichs update in the basis W0.
  const Vector w1 = row_vector(f.W, 0);
  const Vector w2 = nm >= 2 ? row_vector(f.W, 1) : Vector(r, 0.0);
  const Matrix A_hat0 = transpose_times(f.W, A.times(f.W));
  st.K1 = reduced_transport_update(st.data, f.X * f.S, A_hat0, w1, w2, dt, grid);
  QrResult qk = qr(st.K1);
  const Matrix M = transpose_times(qk.Q, f.X);

  // L-step with the cell sums of X0.
  const ProjectedTransport p0 = project_transport(st.data, f.X, nm, grid);
  const Matrix L0 = times_transpose(f.W, f.S);
  st.L1 = 0.5 * (L0 * p0.p_avg) - c * (p0.g + L0 * p0.p_u + A.times(L0 * p0.p_alpha));
  QrResult ql = qr(st.L1);
  const Matrix Nm = transpose_times(ql.Q, f.W);

  // S-step in the new bases.
  st.S_start = times_transpose(M * f.S, Nm);
  const ProjectedTransport p1 = project_transport(st.data, qk.Q, nm, grid);
  const Matrix A_hat1 = transpose_times(ql.Q, A.times(ql.Q));
  const Matrix St = st.S_start.transposed();
  const Matrix S1t =
      0.5 * (St * p1.p_avg) - c * (transpose_times(ql.Q, p1.g) + St * p1.p_u + A_hat1 * (St * p1.p_alpha));
  st.S1 = S1t.transposed();

  st.result = {std::move(qk.Q), st.S1, std::move(ql.Q)};
  return st;
}

LowRankFactors dlra_transport_step(const MacroState& U_tilde, const MacroState& U_old, const LowRankFactors& f,
                                   double dt, const Grid& grid) {
  return dlra_transport_stages(U_tilde, U_old, f, dt, grid).result;
}

DlraFrictionStages dlra_friction_stages(const MacroState& U_new, const LowRankFactors& f, double dt,
                                        const FrictionSolver& solver) {
  const std::size_t n = f.X.rows();
  const std::size_t nm = f.W.rows();
  const std::size_t r = f.rank();
  if (n != U_new.n_cells() || nm != solver.n_moments()) throw std::invalid_argument("dlra_friction_step: shape mismatch");
  const FrictionOperators& fr = solver.operators();

  Vector u(n), hinv(n), hinv2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = U_new.h(j);
    if (!(h > 0.0)) throw SolverError("dlra_friction_step: non-positive water height in cell " + std::to_string(j), j);
    u[j] = U_new.velocity(j);
    hinv[j] = 1.0 / h;
    hinv2[j] = 1.0 / (h * h);
  }

  DlraFrictionStages st;

  // K-step: per-cell implicit solve in the current moment basis W1.
  const ReducedOperators ops1 = build_reduced_operators(f.W, fr);
  st.K2 = f.X * f.S;
  reduced_friction_update(U_new, st.K2, ops1, dt);
  QrResult qk = qr(st.K2);
  const Matrix M = transpose_times(qk.Q, f.X);

  // L-step: structured implicit solve with the cell weights projected on X1.
  Matrix rhs = times_transpose(f.W, f.S);
  const Vector xu = transpose_matvec(f.X, u);
  for (std::size_t i = 0; i < nm; ++i)
    for (std::size_t a = 0; a < r; ++a) rhs(i, a) += dt * fr.slip_rate * fr.b_unit[i] * xu[a];
  try {
    st.L2 = solve_friction_l_step(solver, weighted_gram(f.X, hinv2), weighted_gram(f.X, hinv), dt, rhs);
  } catch (const SingularMatrixError& e) {
    throw SolverError(std::string("dlra_friction_step: ") + e.what(), 0);
  }
  QrResult ql = qr(st.L2);
  const Matrix Nm = transpose_times(ql.Q, f.W);

  // S-step: r^2 implicit Galerkin system in (X2, W2).
  st.S_start = times_transpose(M * f.S, Nm);
  const ReducedOperators ops2 = build_reduced_operators(ql.Q, fr);
  const Vector x2u = transpose_matvec(qk.Q, u);
  const Vector b2 = ops2.b_hat();
  Matrix srhs = st.S_start;
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b) srhs(a, b) += dt * x2u[a] * b2[b];
  try {
    st.S2 = solve_kron(weighted_gram(qk.Q, hinv2), ops2.M1_hat().transposed(), weighted_gram(qk.Q, hinv),
                       ops2.M2_hat().transposed(), dt, srhs);
  } catch (const SingularMatrixError& e) {
    throw SolverError(std::string("dlra_friction_step: ") + e.what(), 0);
  }

  st.result = {std::move(qk.Q), st.S2, std::move(ql.Q)};
  return st;
}

LowRankFactors dlra_friction_step(const MacroState& U_new, const LowRankFactors& f, double dt,
                                  const FrictionSolver& solver) {
  if (solver.operators().nu == 0.0) return f;
  return dlra_friction_stages(U_new, f, dt, solver).result;
}

LowRankFactors dlra_friction_step(const MacroState& U_new, const LowRankFactors& f, double dt,
                                  const ModelParams& params) {
  if (params.nu == 0.0) return f;
  ModelParams p = params;
  p.n_moments = f.W.rows();
  return dlra_friction_step(U_new, f, dt, FrictionSolver(build_friction_operators(p)));
}

namespace {

class DlraBackend {
 public:
  DlraBackend(LowRankFactors f, const ModelParams& params) : f_(std::move(f)) {
    if (params.nu > 0.0) solver_.emplace(build_friction_operators(params));
  }

  Vector h_alpha1() const { return f_.h_alpha1(); }
  Vector h_alpha_sum() const { return f_.h_alpha_sum(); }

  void transport(const MacroState& U_tilde, const MacroState& U_old, double dt, const Grid& grid) {
    f_ = dlra_transport_step(U_tilde, U_old, f_, dt, grid);
  }

  void friction(const MacroState& U_new, double dt) {
    if (solver_) f_ = dlra_friction_step(U_new, f_, dt, *solver_);
  }

  MicroState lifted() const { return f_.lift(); }

  bool finite() const {
    for (double v : f_.S.data())
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  LowRankFactors f_;
  std::optional<FrictionSolver> solver_;
};

}  // namespace

RunResult dlra_run(const SimulationConfig& config, std::size_t r, const FrameObserver& observer) {
  config.validate();
  return dlra_run(config, r, initial_condition(config.test_case, config.grid, config.params, config.case_options), observer);
}

RunResult dlra_run(const SimulationConfig& config, std::size_t r, State initial, const FrameObserver& observer) {
  config.validate();
  if (config.params.n_moments == 0) throw std::invalid_argument("dlra_run: needs N >= 1");
  if (initial.U.n_cells() != config.grid.n_cells || initial.V.n_cells() != config.grid.n_cells ||
      initial.V.n_moments() != config.params.n_moments) {
    throw std::invalid_argument("dlra_run: initial state shape mismatch");
  }
  DlraBackend backend(dlra_init(initial.V, r), config.params);
  return detail::run_split(config, std::move(initial.U), backend, "dlra", observer);
}

}  // namespace hswme
