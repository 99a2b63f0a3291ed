#include "hswme/pod.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hswme/detail/splitting.hpp"

namespace hswme {

Matrix ReducedOperators::M1_hat() const { return nu * m1_unit_hat; }

Matrix ReducedOperators::M2_hat() const {
  const std::size_t r = rank();
  Matrix m(r, r);
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b) m(a, b) = slip_rate * b_unit_hat[a] * ones_hat[b];
  return m;
}

Vector ReducedOperators::b_hat() const {
  Vector b = b_unit_hat;
  for (double& v : b) v *= slip_rate;
  return b;
}

ReducedOperators build_reduced_operators(const Matrix& W, const ModelParams& params) {
  if (W.rows() == 0) throw std::invalid_argument("build_reduced_operators: invalid basis shape");
  ModelParams p = params;
  p.n_moments = W.rows();
  return build_reduced_operators(W, build_friction_operators(p));
}

ReducedOperators build_reduced_operators(const Matrix& W, const FrictionOperators& fr) {
  const std::size_t n = W.rows();
  const std::size_t r = W.cols();
  if (n == 0 || r == 0 || r > n || fr.n_moments() != n) {
    throw std::invalid_argument("build_reduced_operators: invalid basis shape");
  }

  ReducedOperators ops;
  ops.A_hat = transpose_times(W, OffdiagA(n).times(W));
  ops.m1_unit_hat = transpose_times(W, fr.m1_unit * W);
  ops.b_unit_hat = transpose_matvec(W, fr.b_unit);
  ops.ones_hat = transpose_matvec(W, Vector(n, 1.0));
  ops.w_row1.assign(W.row(0).begin(), W.row(0).end());
  ops.w_row2 = n >= 2 ? Vector(W.row(1).begin(), W.row(1).end()) : Vector(r, 0.0);
  ops.nu = fr.nu;
  ops.slip_rate = fr.slip_rate;
  return ops;
}

MicroState ReducedMicroState::lift(const Matrix& W) const { return MicroState(times_transpose(V_hat, W)); }

ReducedMicroState ReducedMicroState::project(const MicroState& V, const Matrix& W) {
  if (V.n_moments() != W.rows()) throw std::invalid_argument("ReducedMicroState::project: moment count mismatch");
  return {V.matrix() * W};
}

Matrix build_snapshot_matrix(const std::vector<const Trajectory*>& trajectories) {
  std::size_t rows = 0;
  std::size_t n = 0;
  bool first = true;
  for (const Trajectory* t : trajectories) {
    for (const MicroState& f : t->micro) {
      if (first) {
        n = f.n_moments();
        first = false;
      } else if (f.n_moments() != n) {
        throw std::invalid_argument("build_snapshot_matrix: moment count mismatch");
      }
      rows += f.n_cells();
    }
  }
  Matrix s(rows, n);
  std::size_t offset = 0;
  for (const Trajectory* t : trajectories) {
    for (const MicroState& f : t->micro) {
      const auto src = f.matrix().data();
      std::copy(src.begin(), src.end(), s.data().begin() + static_cast<std::ptrdiff_t>(offset * n));
      offset += f.n_cells();
    }
  }
  return s;
}

Matrix build_snapshot_matrix(const std::vector<Trajectory>& trajectories) {
  std::vector<const Trajectory*> ptrs;
  for (const Trajectory& t : trajectories) ptrs.push_back(&t);
  return build_snapshot_matrix(ptrs);
}

void SnapshotGram::add(const MicroState& frame) { add(frame.matrix()); }

void SnapshotGram::add(const Matrix& rows) {
  const std::size_t n = n_moments();
  if (rows.cols() != n) throw std::invalid_argument("SnapshotGram::add: moment count mismatch");
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto v = rows.row(i);
    for (std::size_t a = 0; a < n; ++a) {
      const double va = v[a];
      if (va == 0.0) continue;
      auto g = gram_.row(a);
      for (std::size_t b = a; b < n; ++b) g[b] += va * v[b];
    }
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < a; ++b) gram_(a, b) = gram_(b, a);
  rows_ += rows.rows();
}

ReducedBasis pod_basis(const SnapshotGram& gram, std::size_t r) {
  const std::size_t n = gram.n_moments();
  if (r == 0 || r > n) throw std::invalid_argument("pod_basis: rank must lie in [1, N]");
  if (gram.n_rows() == 0) throw std::invalid_argument("pod_basis: empty snapshot set");
  const SymmetricEigen eig = symmetric_eigen(gram.gram());
  ReducedBasis basis;
  basis.W = Matrix(n, r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < r; ++k) basis.W(i, k) = eig.vectors(i, k);
  basis.singular_values.resize(n);
  for (std::size_t k = 0; k < n; ++k) basis.singular_values[k] = std::sqrt(std::max(eig.values[k], 0.0));
  return basis;
}

ReducedBasis pod_basis(const std::vector<const Trajectory*>& trajectories, std::size_t r) {
  if (trajectories.empty()) throw std::invalid_argument("pod_basis: empty snapshot set");
  const Trajectory& first = *trajectories.front();
  const std::size_t n = first.micro.empty() ? first.params.n_moments : first.micro.front().n_moments();
  SnapshotGram gram(n);
  for (const Trajectory* t : trajectories) {
    for (const MicroState& f : t->micro) {
      if (f.n_moments() != n) throw std::invalid_argument("pod_basis: moment count mismatch");
      gram.add(f);
    }
  }
  ReducedBasis basis = pod_basis(gram, r);
  for (const Trajectory* t : trajectories) {
    basis.training_cases.emplace_back(to_string(t->test_case));
    basis.training_nu.push_back(t->params.nu);
  }
  return basis;
}

PodModel pod_offline(const std::vector<const Trajectory*>& trajectories, std::size_t r, const ModelParams& target) {
  PodModel m{pod_basis(trajectories, r), {}};
  m.ops = build_reduced_operators(m.basis.W, target);
  return m;
}

Matrix reduced_transport_update(const MicroInterfaceData& data, const Matrix& coeffs, const Matrix& A_hat,
                                std::span<const double> w1, std::span<const double> w2, double dt,
                                const Grid& grid) {
  const std::size_t n = coeffs.rows();
  const std::size_t r = coeffs.cols();
  if (n != grid.n_cells || data.n_interfaces() != n + 1 || A_hat.rows() != r || w1.size() != r || w2.size() != r) {
    throw std::invalid_argument("reduced_transport_update: shape mismatch");
  }
  Matrix flux(n + 1, r);
  Vector dk(r);
  for (std::size_t i = 0; i <= n; ++i) {
    auto kl = coeffs.row(neighbor(i, -1, n, grid.bc));
    auto kr = coeffs.row(neighbor(i, 0, n, grid.bc));
    for (std::size_t a = 0; a < r; ++a) dk[a] = kr[a] - kl[a];
    auto f = flux.row(i);
    const double ub = data.u_bar[i];
    const double ab = data.alpha_bar[i];
    for (std::size_t a = 0; a < r; ++a) {
      auto arow = A_hat.row(a);
      double s = 0.0;
      for (std::size_t b = 0; b < r; ++b) s += arow[b] * dk[b];
      f[a] = ub * dk[a] + ab * s + data.e1[i] * w1[a] + data.e2[i] * w2[a];
    }
  }
  const double c = dt / (2.0 * grid.dx());
  Matrix out(n, r);
  for (std::size_t j = 0; j < n; ++j) {
    auto km = coeffs.row(neighbor(j, -1, n, grid.bc));
    auto kp = coeffs.row(neighbor(j, 1, n, grid.bc));
    auto fl = flux.row(j);
    auto fr = flux.row(j + 1);
    auto o = out.row(j);
    for (std::size_t a = 0; a < r; ++a) o[a] = 0.5 * (kp[a] + km[a]) - c * (fr[a] + fl[a]);
  }
  return out;
}

void reduced_friction_update(const MacroState& U_new, Matrix& coeffs, const ReducedOperators& ops, double dt) {
  const std::size_t r = coeffs.cols();
  if (coeffs.rows() != U_new.n_cells() || r != ops.rank()) {
    throw std::invalid_argument("reduced_friction_update: shape mismatch");
  }
  if (ops.nu == 0.0) return;
  std::vector<double> sys(r * r);
  for (std::size_t j = 0; j < coeffs.rows(); ++j) {
    const double h = U_new.h(j);
    if (!(h > 0.0)) {
      throw SolverError("reduced friction: non-positive water height in cell " + std::to_string(j), j);
    }
    const double c1 = dt * ops.nu / (h * h);
    const double c2 = dt * ops.slip_rate / h;
    const double forcing = dt * U_new.velocity(j) * ops.slip_rate;
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = 0; b < r; ++b)
        sys[a * r + b] = (a == b ? 1.0 : 0.0) - c1 * ops.m1_unit_hat(a, b) - c2 * ops.b_unit_hat[a] * ops.ones_hat[b];
    auto x = coeffs.row(j);
    for (std::size_t a = 0; a < r; ++a) x[a] += forcing * ops.b_unit_hat[a];
    try {
      solve_small_inplace(sys, r, x);
    } catch (const SingularMatrixError&) {
      throw SolverError("reduced friction: singular operator in cell " + std::to_string(j), j);
    }
  }
}

Vector reduced_h_alpha1(const Matrix& coeffs, std::span<const double> w_row1) {
  Vector out(coeffs.rows());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = dot(coeffs.row(j), w_row1);
  return out;
}

MicroInterfaceData pod_interface_data(const MacroState& U_tilde, const MacroState& U_old,
                                      const ReducedMicroState& V_hat, const ReducedOperators& ops, const Grid& grid) {
  const Vector alpha1 = primitive_alpha1(U_old, reduced_h_alpha1(V_hat.V_hat, ops.w_row1));
  return micro_interface_data(U_tilde, alpha1, grid);
}

ReducedMicroState pod_micro_transport_step(const MacroState& U_tilde, const MacroState& U_old,
                                           const ReducedMicroState& V_hat, const ReducedOperators& ops, double dt,
                                           const Grid& grid) {
  if (V_hat.n_cells() != U_old.n_cells() || U_tilde.n_cells() != U_old.n_cells()) {
    throw std::invalid_argument("pod_micro_transport_step: shape mismatch");
  }
  const MicroInterfaceData d = pod_interface_data(U_tilde, U_old, V_hat, ops, grid);
  return {reduced_transport_update(d, V_hat.V_hat, ops.A_hat, ops.w_row1, ops.w_row2, dt, grid)};
}

ReducedMicroState pod_micro_friction_step(const MacroState& U_new, const ReducedMicroState& V_hat,
                                          const ReducedOperators& ops, double dt) {
  ReducedMicroState out = V_hat;
  reduced_friction_update(U_new, out.V_hat, ops, dt);
  return out;
}

namespace {

class PodBackend {
 public:
  PodBackend(ReducedMicroState v, const Matrix& W, const ReducedOperators& ops) : v_(std::move(v)), W_(W), ops_(ops) {}

  Vector h_alpha1() const { return reduced_h_alpha1(v_.V_hat, ops_.w_row1); }
  Vector h_alpha_sum() const { return reduced_h_alpha1(v_.V_hat, ops_.ones_hat); }

  void transport(const MacroState& U_tilde, const MacroState& U_old, double dt, const Grid& grid) {
    v_ = pod_micro_transport_step(U_tilde, U_old, v_, ops_, dt, grid);
  }

  void friction(const MacroState& U_new, double dt) { reduced_friction_update(U_new, v_.V_hat, ops_, dt); }

  MicroState lifted() const { return v_.lift(W_); }

  bool finite() const {
    for (double v : v_.V_hat.data())
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  ReducedMicroState v_;
  const Matrix& W_;
  const ReducedOperators& ops_;
};

}  // namespace

RunResult pod_rom_run(const SimulationConfig& config, const ReducedBasis& basis, const ReducedOperators& ops,
                      const FrameObserver& observer) {
  config.validate();
  return pod_rom_run(config, basis, ops, initial_condition(config.test_case, config.grid, config.params, config.case_options), observer);
}

RunResult pod_rom_run(const SimulationConfig& config, const ReducedBasis& basis, const ReducedOperators& ops,
                      State initial, const FrameObserver& observer) {
  config.validate();
  if (config.params.n_moments == 0) throw std::invalid_argument("pod_rom_run: needs N >= 1");
  if (basis.n_moments() != config.params.n_moments) throw std::invalid_argument("pod_rom_run: basis moment count mismatch");
  if (ops.rank() != basis.rank()) throw std::invalid_argument("pod_rom_run: operator rank mismatch");
  if (ops.nu != config.params.nu || ops.slip_rate != config.params.slip_rate()) {
    throw std::invalid_argument("pod_rom_run: operators built for different friction parameters");
  }
  if (initial.U.n_cells() != config.grid.n_cells || initial.V.n_cells() != config.grid.n_cells) {
    throw std::invalid_argument("pod_rom_run: initial state/grid mismatch");
  }
  PodBackend backend(ReducedMicroState::project(initial.V, basis.W), basis.W, ops);
  return detail::run_split(config, std::move(initial.U), backend, "pod", observer);
}

}  // namespace hswme
