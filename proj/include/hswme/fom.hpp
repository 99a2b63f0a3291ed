#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hswme/friction.hpp"
#include "hswme/model.hpp"
#include "hswme/transport.hpp"

namespace hswme {

struct SimulationConfig {
  TestCase test_case = TestCase::DamBreak;
  ModelParams params;
  Grid grid;
  CaseOptions case_options;
  double t_final = 0.2;
  std::size_t snapshot_stride = 1;  // record every k-th step (the final step is always recorded)
  bool keep_frames = true;          // false: only the observer sees frames

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<MacroState> macro;
  std::vector<MicroState> micro;  // lifted to N_x x N for the reduced backends

  ModelParams params;
  Grid grid;
  TestCase test_case = TestCase::DamBreak;
  CaseOptions case_options;
  std::size_t snapshot_stride = 1;
  std::string solver;

  std::size_t n_frames() const { return times.size(); }
};

struct PhaseTimes {
  double time_step = 0.0;
  double macro_transport = 0.0;
  double micro_transport = 0.0;
  double macro_friction = 0.0;
  double micro_friction = 0.0;
  double output = 0.0;
  double total = 0.0;
};

struct RunReport {
  PhaseTimes wall_seconds;
  std::size_t steps = 0;
  // Midpoint-rule totals per recorded time.
  std::vector<double> mass;       // sum h dx
  std::vector<double> momentum;   // sum hu dx
  std::vector<double> moment4;    // sum h alpha_4 dx (0 when N < 4)
};

struct RunResult {
  Trajectory trajectory;
  RunReport report;
};

/// Called at each recorded time with the (lifted) state.
using FrameObserver = std::function<void(double t, const MacroState& U, const MicroState& V)>;

/// Full-order operator-split run from the configured initial condition.
RunResult run_hswme(const SimulationConfig& config, const FrameObserver& observer = {});
/// Full-order run from an explicit initial state.
RunResult run_hswme(const SimulationConfig& config, State initial, const FrameObserver& observer = {});

/// Plain shallow water run (N forced to 0).
RunResult run_swe(const SimulationConfig& config, const FrameObserver& observer = {});

/// Relative L2 error of (h, hu) at the final frame, `reference` in the
/// denominator.
double relative_l2_error(const Trajectory& a, const Trajectory& reference);
double relative_l2_error(const MacroState& a, const MacroState& reference);

/// Midpoint-rule totals of a single frame.
double total_mass(const MacroState& U, const Grid& grid);
double total_momentum(const MacroState& U, const Grid& grid);
double total_moment(const MicroState& V, std::size_t k, const Grid& grid);

}  // namespace hswme
