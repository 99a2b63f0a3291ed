#pragma once

// Shared time loop of the full-order and reduced solvers. The macro block is
// always advanced by the same unreduced code; only the micro backend varies.
//
// A backend provides:
//   Vector h_alpha1() const;            h * alpha_1 per cell
//   Vector h_alpha_sum() const;         sum_k h * alpha_k per cell
//   void transport(const MacroState& U_tilde, const MacroState& U_old, double dt, const Grid&);
//   void friction(const MacroState& U_new, double dt);
//   MicroState lifted() const;          N_x x N view for output
//   bool finite() const;

#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "hswme/fom.hpp"

namespace hswme::detail {

class Stopwatch {
 public:
  Stopwatch() : start_(clock::now()) {}
  double lap() {
    const auto now = clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

template <class Backend>
RunResult run_split(const SimulationConfig& config, MacroState U, Backend& backend, const std::string& solver,
                    const FrameObserver& observer) {
  config.validate();
  const Grid& grid = config.grid;
  const ModelParams& params = config.params;
  const std::size_t n_moments = params.n_moments;

  RunResult result;
  Trajectory& traj = result.trajectory;
  RunReport& report = result.report;
  traj.params = params;
  traj.grid = grid;
  traj.test_case = config.test_case;
  traj.case_options = config.case_options;
  traj.snapshot_stride = config.snapshot_stride;
  traj.solver = solver;
  PhaseTimes& ph = report.wall_seconds;

  Stopwatch total;
  Stopwatch sw;

  const auto record = [&](double t) {
    MicroState V = backend.lifted();
    traj.times.push_back(t);
    report.mass.push_back(total_mass(U, grid));
    report.momentum.push_back(total_momentum(U, grid));
    report.moment4.push_back(n_moments >= 4 ? total_moment(V, 3, grid) : 0.0);
    if (observer) observer(t, U, V);
    if (config.keep_frames) {
      traj.macro.push_back(U);
      traj.micro.push_back(std::move(V));
    }
  };

  check_macro_state(U, solver.c_str());
  record(0.0);
  ph.output += sw.lap();

  double t = 0.0;
  std::size_t step = 0;
  while (t < config.t_final) {
    try {
      const Vector h_alpha1 = backend.h_alpha1();
      Vector alpha1;
      if (n_moments > 0) alpha1 = primitive_alpha1(U, h_alpha1);
      TimeStep ts = select_time_step(U, alpha1, grid, params, t, config.t_final);
      const bool last = t + ts.dt >= config.t_final;
      if (!(ts.dt > 0.0) || !std::isfinite(ts.dt)) {
        throw SolverError(solver + ": invalid time step " + std::to_string(ts.dt), 0);
      }
      ph.time_step += sw.lap();

      MacroState U_tilde = n_moments > 0 ? macro_transport_step(U, h_alpha1, ts.dt, grid, params)
                                         : macro_transport_step(U, std::span<const double>{}, ts.dt, grid, params);
      ph.macro_transport += sw.lap();

      backend.transport(U_tilde, U, ts.dt, grid);
      ph.micro_transport += sw.lap();

      const Vector sums = backend.h_alpha_sum();
      MacroState U_new = macro_friction_step(U_tilde, sums, ts.dt, params);
      ph.macro_friction += sw.lap();

      backend.friction(U_new, ts.dt);
      ph.micro_friction += sw.lap();

      U = std::move(U_new);
      check_macro_state(U, solver.c_str());
      if (!backend.finite()) throw SolverError(solver + ": non-finite micro state", 0);
      t = last ? config.t_final : t + ts.dt;
      ++step;
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " at step " + std::to_string(step), e.cell(), step);
    }
    if (step % config.snapshot_stride == 0 || t >= config.t_final) {
      sw.lap();
      record(t);
      ph.output += sw.lap();
    }
  }
  report.steps = step;
  ph.total = total.lap();
  return result;
}

}  // namespace hswme::detail
