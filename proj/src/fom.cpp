#include "hswme/fom.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "hswme/detail/splitting.hpp"

namespace hswme {

namespace {

class FullOrderBackend {
 public:
  FullOrderBackend(MicroState V, const ModelParams& params) : V_(std::move(V)) {
    if (V_.n_moments() > 0 && params.nu > 0.0) solver_.emplace(build_friction_operators(params));
  }

  Vector h_alpha1() const { return V_.n_moments() > 0 ? V_.matrix().col(0) : Vector{}; }

  Vector h_alpha_sum() const {
    if (V_.n_moments() == 0) return {};
    Vector s(V_.n_cells(), 0.0);
    for (std::size_t j = 0; j < s.size(); ++j)
      for (double v : V_.row(j)) s[j] += v;
    return s;
  }

  void transport(const MacroState& U_tilde, const MacroState& U_old, double dt, const Grid& grid) {
    if (V_.n_moments() > 0) V_ = micro_transport_step(U_tilde, U_old, V_, dt, grid);
  }

  void friction(const MacroState& U_new, double dt) {
    if (solver_) V_ = micro_friction_step(U_new, V_, dt, *solver_);
  }

  MicroState lifted() const { return V_; }

  bool finite() const {
    for (double v : V_.matrix().data())
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  MicroState V_;
  std::optional<FrictionSolver> solver_;
};

}  // namespace

void SimulationConfig::validate() const {
  params.validate();
  grid.validate();
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("SimulationConfig: t_final must be positive");
  if (snapshot_stride == 0) throw std::invalid_argument("SimulationConfig: snapshot_stride must be at least 1");
}

RunResult run_hswme(const SimulationConfig& config, const FrameObserver& observer) {
  config.validate();
  return run_hswme(config, initial_condition(config.test_case, config.grid, config.params, config.case_options), observer);
}

RunResult run_hswme(const SimulationConfig& config, State initial, const FrameObserver& observer) {
  config.validate();
  if (initial.U.n_cells() != config.grid.n_cells) throw std::invalid_argument("run_hswme: initial state/grid mismatch");
  if (initial.V.n_moments() != config.params.n_moments || initial.V.n_cells() != config.grid.n_cells) {
    throw std::invalid_argument("run_hswme: initial micro state shape mismatch");
  }
  FullOrderBackend backend(std::move(initial.V), config.params);
  return detail::run_split(config, std::move(initial.U), backend, config.params.n_moments > 0 ? "hswme" : "swe",
                           observer);
}

RunResult run_swe(const SimulationConfig& config, const FrameObserver& observer) {
  SimulationConfig c = config;
  c.params.n_moments = 0;
  return run_hswme(c, observer);
}

double relative_l2_error(const MacroState& a, const MacroState& reference) {
  if (a.n_cells() != reference.n_cells()) throw std::invalid_argument("relative_l2_error: grid mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < a.n_cells(); ++j) {
    const double dh = a.h(j) - reference.h(j);
    const double dq = a.hu(j) - reference.hu(j);
    num += dh * dh + dq * dq;
    den += reference.h(j) * reference.h(j) + reference.hu(j) * reference.hu(j);
  }
  return std::sqrt(num) / std::sqrt(den);
}

double relative_l2_error(const Trajectory& a, const Trajectory& reference) {
  if (!(a.grid == reference.grid)) throw std::invalid_argument("relative_l2_error: grid mismatch");
  if (a.macro.empty() || reference.macro.empty()) throw std::invalid_argument("relative_l2_error: empty trajectory");
  if (std::abs(a.times.back() - reference.times.back()) > 1e-12 * std::max(1.0, std::abs(reference.times.back()))) {
    throw std::invalid_argument("relative_l2_error: final times differ");
  }
  return relative_l2_error(a.macro.back(), reference.macro.back());
}

double total_mass(const MacroState& U, const Grid& grid) {
  double s = 0.0;
  for (std::size_t j = 0; j < U.n_cells(); ++j) s += U.h(j);
  return s * grid.dx();
}

double total_momentum(const MacroState& U, const Grid& grid) {
  double s = 0.0;
  for (std::size_t j = 0; j < U.n_cells(); ++j) s += U.hu(j);
  return s * grid.dx();
}

double total_moment(const MicroState& V, std::size_t k, const Grid& grid) {
  if (k >= V.n_moments()) throw std::out_of_range("total_moment: moment index out of range");
  double s = 0.0;
  for (std::size_t j = 0; j < V.n_cells(); ++j) s += V(j, k);
  return s * grid.dx();
}

}  // namespace hswme
