#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "hswme/linalg.hpp"

namespace hswme {

/// Physical and numerical constants of one simulation.
struct ModelParams {
  double g = 9.81;          // gravitational acceleration [m/s^2]
  double nu = 1.0;          // kinematic viscosity [m^2/s]
  double lambda = 0.5;      // slip length [m]
  std::size_t n_moments = 0;  // N; 0 selects the plain shallow water equations
  double cfl = 0.25;

  /// nu / lambda, the slip friction rate.
  double slip_rate() const { return nu / lambda; }
  void validate() const;
};

enum class BoundaryCondition { Periodic, Outflow };

std::string_view to_string(BoundaryCondition bc);
BoundaryCondition boundary_from_string(std::string_view name);

struct Grid {
  std::size_t n_cells = 0;
  double x_min = -1.0;
  double x_max = 1.0;
  BoundaryCondition bc = BoundaryCondition::Outflow;

  double dx() const { return (x_max - x_min) / static_cast<double>(n_cells); }
  double center(std::size_t j) const { return x_min + (static_cast<double>(j) + 0.5) * dx(); }
  void validate() const;
  bool operator==(const Grid&) const = default;
};

/// Cell index of the neighbour at `j + offset`, resolving the single ghost
/// layer: periodic wrap or zero-gradient copy of the nearest interior cell.
inline std::size_t neighbor(std::size_t j, int offset, std::size_t n, BoundaryCondition bc) {
  const auto idx = static_cast<std::ptrdiff_t>(j) + offset;
  const auto sn = static_cast<std::ptrdiff_t>(n);
  if (idx >= 0 && idx < sn) return static_cast<std::size_t>(idx);
  if (bc == BoundaryCondition::Periodic) return static_cast<std::size_t>(((idx % sn) + sn) % sn);
  return idx < 0 ? 0 : n - 1;
}

/// Conserved block: one (h, h*u_m) row per cell.
class MacroState {
 public:
  MacroState() = default;
  explicit MacroState(std::size_t n_cells) : q_(n_cells, 2) {}
  explicit MacroState(Matrix q);

  std::size_t n_cells() const { return q_.rows(); }
  double& h(std::size_t j) { return q_(j, 0); }
  double h(std::size_t j) const { return q_(j, 0); }
  double& hu(std::size_t j) { return q_(j, 1); }
  double hu(std::size_t j) const { return q_(j, 1); }
  double velocity(std::size_t j) const { return q_(j, 1) / q_(j, 0); }

  const Matrix& matrix() const { return q_; }
  Matrix& matrix() { return q_; }
  bool operator==(const MacroState&) const = default;

 private:
  Matrix q_;
};

/// Moment block: one (h*alpha_1, ..., h*alpha_N) row per cell. Column k
/// holds moment k+1.
class MicroState {
 public:
  MicroState() = default;
  MicroState(std::size_t n_cells, std::size_t n_moments) : v_(n_cells, n_moments) {}
  explicit MicroState(Matrix v) : v_(std::move(v)) {}

  std::size_t n_cells() const { return v_.rows(); }
  std::size_t n_moments() const { return v_.cols(); }
  double& operator()(std::size_t j, std::size_t k) { return v_(j, k); }
  double operator()(std::size_t j, std::size_t k) const { return v_(j, k); }
  std::span<double> row(std::size_t j) { return v_.row(j); }
  std::span<const double> row(std::size_t j) const { return v_.row(j); }

  const Matrix& matrix() const { return v_; }
  Matrix& matrix() { return v_; }
  bool operator==(const MicroState&) const = default;

 private:
  Matrix v_;
};

struct State {
  MacroState U;
  MicroState V;
};

/// Scaled Legendre polynomial phi_j on [0, 1]; phi_j(0) = 1 and
/// int_0^1 phi_m phi_n = delta_mn / (2n + 1).
double legendre_phi(int degree, double zeta);

/// u(zeta) = u_m + sum_j alpha_j phi_j(zeta); alphas[k] is alpha_{k+1}.
double reconstruct_velocity(double u_m, std::span<const double> alphas, double zeta);

/// The bidiagonal moment-coupling matrix shared by every A_vv block.
/// With 1-based indices: A_{j,j+1} = (j+2)/(2j+3), A_{j,j-1} = (j-1)/(2j-1).
class OffdiagA {
 public:
  explicit OffdiagA(std::size_t n);

  std::size_t size() const { return n_; }
  /// 0-based entry A(k, k+1).
  double super(std::size_t k) const { return sup_[k]; }
  /// 0-based entry A(k, k-1), k >= 1.
  double sub(std::size_t k) const { return sub_[k]; }

  /// out = A * in.
  void apply(std::span<const double> in, std::span<double> out) const;
  Matrix dense() const;
  /// A * m for an n x r matrix m.
  Matrix times(const Matrix& m) const;

 private:
  std::size_t n_;
  Vector sup_;
  Vector sub_;
};

/// Block decomposition of the transport matrix at one state. A_vv is kept
/// implicit as u_m * I + alpha_1 * A.
struct TransportBlocks {
  Matrix uu;  // 2 x 2
  Matrix uv;  // 2 x N
  Matrix vu;  // N x 2
  double vv_diagonal = 0.0;  // u_m
  double vv_coupling = 0.0;  // alpha_1

  Matrix dense_vv() const;
};

TransportBlocks transport_blocks(double h, double u_m, double alpha1, const ModelParams& params);

/// Friction coupling coefficient a_{i,j} (i >= 0, j >= 1):
/// 0 when i + j is even, otherwise m (m + 1) / 2 with m = min(i - 1, j).
double coefficient_a(int i, int j);

/// Friction right-hand side [0, S_0, ..., S_N] of the full system.
///
/// The viscous term of equation i (0 = momentum, i >= 1 = moment i) uses
/// a_{i+1,j}: the coefficient table counts equations from the momentum row
/// as row 1. With this reading 4 a_{i+1,j} = int_0^1 phi_i' phi_j' and the
/// moment operator is dissipative.
Vector source_term(double h, double u_m, std::span<const double> alphas, const ModelParams& params);

/// Linear friction operators of the moment block with h and u_m frozen:
///   dV/dt = M1 V / h^2 + M2 V / h + u_m b,  M2 = b 1^T.
/// Stored per unit viscosity so reduced copies can be rescaled to other nu.
struct FrictionOperators {
  Matrix m1_unit;   // M1 / nu
  Vector b_unit;    // b * lambda / nu, entries -(2k + 1)
  double nu = 0.0;
  double slip_rate = 0.0;  // nu / lambda

  std::size_t n_moments() const { return b_unit.size(); }
  Matrix M1() const;
  Matrix M2() const;
  Vector b() const;
};

FrictionOperators build_friction_operators(const ModelParams& params);

enum class TestCase { DamBreak, SmoothWave };

std::string_view to_string(TestCase c);
TestCase test_case_from_string(std::string_view name);

struct CaseOptions {
  // Dam break: h = 0.3 + 0.35 (tanh(k x) - tanh(k (x - 0.2))). k = 50 gives
  // the water column on [0, 0.2]; k = 1 is the gentle bump of the bare formula.
  double dam_break_steepness = 50.0;
  bool operator==(const CaseOptions&) const = default;
};

/// Initial macro/micro state of a benchmark case on the given grid.
State initial_condition(TestCase c, const Grid& grid, const ModelParams& params, const CaseOptions& options = {});

}  // namespace hswme
