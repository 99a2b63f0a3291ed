#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "hswme/model.hpp"

namespace hswme {

/// Raised when a step produces a non-positive height or a non-finite value.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::size_t cell, std::size_t step = 0)
      : std::runtime_error(what), cell_(cell), step_(step) {}
  std::size_t cell() const { return cell_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t cell_;
  std::size_t step_;
};

struct TimeStep {
  double dt = 0.0;
  double lambda_max = 0.0;
};

/// max_j |u_m| + sqrt(g h + alpha_1^2). `alpha1` is the primitive first
/// moment per cell.
double max_wave_speed(const MacroState& U, std::span<const double> alpha1, const ModelParams& params);

/// dt = cfl * dx / lambda_max, clipped so that t + dt does not pass t_final.
TimeStep select_time_step(const MacroState& U, std::span<const double> alpha1, const Grid& grid,
                          const ModelParams& params, double t, double t_final);

/// Lax-Friedrichs path-conservative update of (h, hu). Only the first
/// moment enters, so the micro block is passed as h*alpha_1 per cell.
MacroState macro_transport_step(const MacroState& U, std::span<const double> h_alpha1, double dt,
                                const Grid& grid, const ModelParams& params);
MacroState macro_transport_step(const MacroState& U, const MicroState& V, double dt, const Grid& grid,
                                const ModelParams& params);

/// Interface data shared by every micro transport variant: for interface i
/// between cells i-1 and i (i = 0..n_cells, ghosts per bc) the averaged
/// velocity, averaged alpha_1, and the two non-zero rows of A_vu * dU.
struct MicroInterfaceData {
  Vector u_bar;
  Vector alpha_bar;
  Vector e1;  // row 1 of A_vu(U_i - U_{i-1})
  Vector e2;  // row 2 of A_vu(U_i - U_{i-1})

  std::size_t n_interfaces() const { return u_bar.size(); }
};

/// Velocity and height differences come from `U`, alpha_1 from `alpha1`.
MicroInterfaceData micro_interface_data(const MacroState& U, std::span<const double> alpha1, const Grid& grid);

/// Micro update with alpha_1 supplied explicitly (it is held fixed for the
/// whole step).
MicroState micro_transport_step_frozen(const MacroState& U_tilde, std::span<const double> alpha1,
                                       const MicroState& V, double dt, const Grid& grid);

/// Micro update staged after the macro step: h and u_m from U_tilde,
/// alpha_1 = V(:,0) / h from the pre-step state (U_old, V).
MicroState micro_transport_step(const MacroState& U_tilde, const MacroState& U_old, const MicroState& V, double dt,
                                const Grid& grid);

/// Both blocks advanced from (U, V) simultaneously. Equivalent to the
/// unsplit full-matrix scheme; kept for verification.
State coupled_transport_step(const MacroState& U, const MicroState& V, double dt, const Grid& grid,
                             const ModelParams& params);

/// Per-cell alpha_1 = h_alpha1 / h.
Vector primitive_alpha1(const MacroState& U, std::span<const double> h_alpha1);

/// Throws SolverError at the first cell with h <= 0 or a non-finite entry.
void check_macro_state(const MacroState& U, const char* where);

}  // namespace hswme
