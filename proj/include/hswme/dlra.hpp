#pragma once

#include <cstddef>

#include "hswme/fom.hpp"
#include "hswme/pod.hpp"

namespace hswme {

/// V ~ X S W^T with X (N_x x r) and W (N x r) orthonormal.
struct LowRankFactors {
  Matrix X;
  Matrix S;
  Matrix W;

  std::size_t rank() const { return S.rows(); }
  MicroState lift() const;
  Vector h_alpha1() const;     // X S W(0, :)^T
  Vector h_alpha_sum() const;  // X S W^T 1
};

/// Truncated SVD of V0; rank-deficient directions are filled by the QR
/// completion and carry zero coefficients.
LowRankFactors dlra_init(const MicroState& V0, std::size_t r);

/// r x r sums over cells used by the moment-basis (L) and coefficient (S)
/// updates; ghost rows follow the boundary condition.
struct ProjectedTransport {
  Matrix p_avg;    // sum_j (x_{j+1} + x_{j-1}) x_j^T
  Matrix p_u;      // sum_j (u_{j+1/2} dx_{j+1/2} + u_{j-1/2} dx_{j-1/2}) x_j^T
  Matrix p_alpha;  // same with the interface alpha_1
  Matrix g;        // N x r: sum_j (E_{j+1/2} + E_{j-1/2}) x_j^T
};

ProjectedTransport project_transport(const MicroInterfaceData& data, const Matrix& X, std::size_t n_moments,
                                     const Grid& grid);

/// Intermediate results of one transport step, before and after each QR.
struct DlraTransportStages {
  MicroInterfaceData data;  // frozen interface state of the step
  Matrix K1;                // updated X0 S0
  Matrix L1;                // updated W0 S0^T
  Matrix S_start;           // M S0 N^T
  Matrix S1;
  LowRankFactors result;    // (X1, S1, W1)
};

DlraTransportStages dlra_transport_stages(const MacroState& U_tilde, const MacroState& U_old,
                                          const LowRankFactors& f, double dt, const Grid& grid);
LowRankFactors dlra_transport_step(const MacroState& U_tilde, const MacroState& U_old, const LowRankFactors& f,
                                   double dt, const Grid& grid);

struct DlraFrictionStages {
  Matrix K2;
  Matrix L2;
  Matrix S_start;
  Matrix S2;
  LowRankFactors result;  // (X2, S2, W2)
};

DlraFrictionStages dlra_friction_stages(const MacroState& U_new, const LowRankFactors& f, double dt,
                                        const FrictionSolver& solver);
LowRankFactors dlra_friction_step(const MacroState& U_new, const LowRankFactors& f, double dt,
                                  const FrictionSolver& solver);
LowRankFactors dlra_friction_step(const MacroState& U_new, const LowRankFactors& f, double dt,
                                  const ModelParams& params);

/// X^T diag(w) X.
Matrix weighted_gram(const Matrix& X, std::span<const double> w);

RunResult dlra_run(const SimulationConfig& config, std::size_t r, const FrameObserver& observer = {});
RunResult dlra_run(const SimulationConfig& config, std::size_t r, State initial, const FrameObserver& observer = {});

}  // namespace hswme
