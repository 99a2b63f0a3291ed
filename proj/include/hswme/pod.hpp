#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hswme/fom.hpp"

namespace hswme {

/// Orthonormal moment basis W (N x r) with the spectrum it was cut from.
struct ReducedBasis {
  Matrix W;
  Vector singular_values;  // full spectrum of the snapshot matrix, descending
  std::vector<std::string> training_cases;
  std::vector<double> training_nu;

  std::size_t rank() const { return W.cols(); }
  std::size_t n_moments() const { return W.rows(); }
};

/// Galerkin projections of the moment operators onto span(W). Friction
/// parts are kept per unit viscosity and scaled by `nu` / `slip_rate`.
struct ReducedOperators {
  Matrix A_hat;        // W^T A W
  Matrix m1_unit_hat;  // W^T M1_unit W
  Vector b_unit_hat;   // W^T b_unit
  Vector ones_hat;     // W^T 1
  Vector w_row1;       // first row of W
  Vector w_row2;       // second row of W (zero when N = 1)
  double nu = 0.0;
  double slip_rate = 0.0;

  std::size_t rank() const { return A_hat.rows(); }
  Matrix M1_hat() const;
  Matrix M2_hat() const;  // b_hat ones_hat^T
  Vector b_hat() const;
};

ReducedOperators build_reduced_operators(const Matrix& W, const ModelParams& params);
ReducedOperators build_reduced_operators(const Matrix& W, const FrictionOperators& friction);

/// Coefficients V_hat (N_x x r); the moment state is V = V_hat W^T.
struct ReducedMicroState {
  Matrix V_hat;

  std::size_t n_cells() const { return V_hat.rows(); }
  std::size_t rank() const { return V_hat.cols(); }
  MicroState lift(const Matrix& W) const;
  static ReducedMicroState project(const MicroState& V, const Matrix& W);
};

/// Frames of every trajectory stacked vertically in time order.
Matrix build_snapshot_matrix(const std::vector<const Trajectory*>& trajectories);
Matrix build_snapshot_matrix(const std::vector<Trajectory>& trajectories);

/// Streaming accumulator of S^T S for the snapshot matrix S, so training
/// never holds all frames.
class SnapshotGram {
 public:
  explicit SnapshotGram(std::size_t n_moments) : gram_(n_moments, n_moments) {}

  void add(const MicroState& frame);
  void add(const Matrix& rows);

  std::size_t n_moments() const { return gram_.rows(); }
  std::size_t n_rows() const { return rows_; }
  const Matrix& gram() const { return gram_; }

 private:
  Matrix gram_;
  std::size_t rows_ = 0;
};

/// Top-r right singular vectors of the snapshot matrix.
ReducedBasis pod_basis(const SnapshotGram& gram, std::size_t r);
ReducedBasis pod_basis(const std::vector<const Trajectory*>& trajectories, std::size_t r);

struct PodModel {
  ReducedBasis basis;
  ReducedOperators ops;
};

/// Basis from training trajectories plus operators for `target` params.
PodModel pod_offline(const std::vector<const Trajectory*>& trajectories, std::size_t r, const ModelParams& target);

/// Explicit reduced Lax-Friedrichs update shared by the POD step and the
/// DLRA K-step. Rows of `coeffs` are per-cell coefficients in the basis
/// whose projected matrix is `A_hat` and whose first two rows are w1, w2.
Matrix reduced_transport_update(const MicroInterfaceData& data, const Matrix& coeffs, const Matrix& A_hat,
                                std::span<const double> w1, std::span<const double> w2, double dt,
                                const Grid& grid);

/// Per-cell reduced backward-Euler friction solve, in place on `coeffs`.
void reduced_friction_update(const MacroState& U_new, Matrix& coeffs, const ReducedOperators& ops, double dt);

/// Per-cell h * alpha_1 = V_hat_j . w_row1.
Vector reduced_h_alpha1(const Matrix& coeffs, std::span<const double> w_row1);

MicroInterfaceData pod_interface_data(const MacroState& U_tilde, const MacroState& U_old,
                                      const ReducedMicroState& V_hat, const ReducedOperators& ops, const Grid& grid);

ReducedMicroState pod_micro_transport_step(const MacroState& U_tilde, const MacroState& U_old,
                                           const ReducedMicroState& V_hat, const ReducedOperators& ops, double dt,
                                           const Grid& grid);

ReducedMicroState pod_micro_friction_step(const MacroState& U_new, const ReducedMicroState& V_hat,
                                          const ReducedOperators& ops, double dt);

/// Online reduced run; frames hold the lifted moments.
RunResult pod_rom_run(const SimulationConfig& config, const ReducedBasis& basis, const ReducedOperators& ops,
                      const FrameObserver& observer = {});
RunResult pod_rom_run(const SimulationConfig& config, const ReducedBasis& basis, const ReducedOperators& ops,
                      State initial, const FrameObserver& observer = {});

}  // namespace hswme
