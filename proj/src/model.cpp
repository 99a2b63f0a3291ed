#include "hswme/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hswme {

void ModelParams::validate() const {
  if (!(g > 0.0)) throw std::invalid_argument("ModelParams: g must be positive");
  if (!(nu >= 0.0)) throw std::invalid_argument("ModelParams: nu must be non-negative");
  if (!(lambda > 0.0)) throw std::invalid_argument("ModelParams: lambda must be positive");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("ModelParams: cfl must lie in (0, 1]");
}

std::string_view to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Periodic ? "periodic" : "outflow";
}

BoundaryCondition boundary_from_string(std::string_view name) {
  if (name == "periodic") return BoundaryCondition::Periodic;
  if (name == "outflow") return BoundaryCondition::Outflow;
  throw std::invalid_argument("unknown boundary condition '" + std::string(name) + "'");
}

void Grid::validate() const {
  if (n_cells == 0) throw std::invalid_argument("Grid: n_cells must be positive");
  if (!(x_min < x_max)) throw std::invalid_argument("Grid: x_min must be below x_max");
}

MacroState::MacroState(Matrix q) : q_(std::move(q)) {
  if (q_.cols() != 2) throw std::invalid_argument("MacroState: expected two columns (h, hu)");
}

double legendre_phi(int degree, double zeta) {
  // phi_j(zeta) = P_j(1 - 2 zeta) with P_j the Legendre polynomial on [-1, 1].
  const double x = 1.0 - 2.0 * zeta;
  if (degree == 0) return 1.0;
  double p_prev = 1.0;
  double p = x;
  for (int n = 1; n < degree; ++n) {
    const double next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
    p_prev = p;
    p = next;
  }
  return p;
}

double reconstruct_velocity(double u_m, std::span<const double> alphas, double zeta) {
  double u = u_m;
  for (std::size_t k = 0; k < alphas.size(); ++k) u += alphas[k] * legendre_phi(static_cast<int>(k) + 1, zeta);
  return u;
}

OffdiagA::OffdiagA(std::size_t n) : n_(n), sup_(n, 0.0), sub_(n, 0.0) {
  for (std::size_t k = 0; k < n; ++k) {
    const double j = static_cast<double>(k) + 1.0;  // 1-based row index
    if (k + 1 < n) sup_[k] = (j + 2.0) / (2.0 * j + 3.0);
    if (k >= 1) sub_[k] = (j - 1.0) / (2.0 * j - 1.0);
  }
}

void OffdiagA::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t k = 0; k < n_; ++k) {
    double s = 0.0;
    if (k + 1 < n_) s += sup_[k] * in[k + 1];
    if (k >= 1) s += sub_[k] * in[k - 1];
    out[k] = s;
  }
}

Matrix OffdiagA::dense() const {
  Matrix a(n_, n_);
  for (std::size_t k = 0; k < n_; ++k) {
    if (k + 1 < n_) a(k, k + 1) = sup_[k];
    if (k >= 1) a(k, k - 1) = sub_[k];
  }
  return a;
}

Matrix OffdiagA::times(const Matrix& m) const {
  if (m.rows() != n_) throw std::invalid_argument("OffdiagA::times: row mismatch");
  Matrix out(n_, m.cols());
  for (std::size_t k = 0; k < n_; ++k) {
    auto o = out.row(k);
    if (k + 1 < n_) {
      auto next = m.row(k + 1);
      for (std::size_t c = 0; c < m.cols(); ++c) o[c] += sup_[k] * next[c];
    }
    if (k >= 1) {
      auto prev = m.row(k - 1);
      for (std::size_t c = 0; c < m.cols(); ++c) o[c] += sub_[k] * prev[c];
    }
  }
  return out;
}

Matrix TransportBlocks::dense_vv() const {
  const std::size_t n = vu.rows();
  Matrix a = OffdiagA(n).dense();
  a *= vv_coupling;
  for (std::size_t k = 0; k < n; ++k) a(k, k) += vv_diagonal;
  return a;
}

TransportBlocks transport_blocks(double h, double u_m, double alpha1, const ModelParams& params) {
  if (!(h > 0.0)) throw std::invalid_argument("transport_blocks: water height must be positive");
  const std::size_t n = params.n_moments;
  TransportBlocks b{Matrix(2, 2), Matrix(2, n), Matrix(n, 2), u_m, alpha1};
  b.uu(0, 1) = 1.0;
  b.uu(1, 0) = params.g * h - u_m * u_m - alpha1 * alpha1 / 3.0;
  b.uu(1, 1) = 2.0 * u_m;
  if (n >= 1) {
    b.uv(1, 0) = 2.0 / 3.0 * alpha1;
    b.vu(0, 0) = -2.0 * u_m * alpha1;
    b.vu(0, 1) = 2.0 * alpha1;
  }
  if (n >= 2) b.vu(1, 0) = -2.0 / 3.0 * alpha1 * alpha1;
  return b;
}

double coefficient_a(int i, int j) {
  if ((i + j) % 2 == 0) return 0.0;
  const int m = std::min(i - 1, j);
  return 0.5 * static_cast<double>(m) * static_cast<double>(m + 1);
}

Vector source_term(double h, double u_m, std::span<const double> alphas, const ModelParams& params) {
  if (!(h > 0.0)) throw std::invalid_argument("source_term: water height must be positive");
  const std::size_t n = alphas.size();
  Vector s(n + 2, 0.0);
  double alpha_sum = 0.0;
  for (double a : alphas) alpha_sum += a;
  for (std::size_t i = 0; i <= n; ++i) {
    const double w = 2.0 * static_cast<double>(i) + 1.0;
    double coupling = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      coupling += coefficient_a(static_cast<int>(i) + 1, static_cast<int>(j)) * alphas[j - 1];
    }
    s[i + 1] = -params.slip_rate() * w * (u_m + alpha_sum) - 4.0 * params.nu / h * w * coupling;
  }
  return s;
}

Matrix FrictionOperators::M1() const { return nu * m1_unit; }

Matrix FrictionOperators::M2() const {
  const std::size_t n = n_moments();
  Matrix m(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) m(k, j) = slip_rate * b_unit[k];
  return m;
}

Vector FrictionOperators::b() const {
  Vector b = b_unit;
  for (double& v : b) v *= slip_rate;
  return b;
}

FrictionOperators build_friction_operators(const ModelParams& params) {
  params.validate();
  const std::size_t n = params.n_moments;
  if (n == 0) throw std::invalid_argument("build_friction_operators: no moment block for N = 0");
  FrictionOperators ops{Matrix(n, n), Vector(n), params.nu, params.slip_rate()};
  for (std::size_t k = 1; k <= n; ++k) {
    const double w = 2.0 * static_cast<double>(k) + 1.0;
    ops.b_unit[k - 1] = -w;
    for (std::size_t j = 1; j <= n; ++j) {
      ops.m1_unit(k - 1, j - 1) = -4.0 * w * coefficient_a(static_cast<int>(k) + 1, static_cast<int>(j));
    }
  }
  return ops;
}

std::string_view to_string(TestCase c) { return c == TestCase::DamBreak ? "dam-break" : "smooth-wave"; }

TestCase test_case_from_string(std::string_view name) {
  if (name == "dam-break" || name == "dambreak" || name == "DamBreak") return TestCase::DamBreak;
  if (name == "smooth-wave" || name == "smoothwave" || name == "SmoothWave") return TestCase::SmoothWave;
  throw std::invalid_argument("unknown test case '" + std::string(name) + "'");
}

State initial_condition(TestCase c, const Grid& grid, const ModelParams& params, const CaseOptions& options) {
  grid.validate();
  if (!(options.dam_break_steepness > 0.0)) throw std::invalid_argument("initial_condition: steepness must be positive");
  const double k = options.dam_break_steepness;
  const std::size_t n = params.n_moments;
  State s{MacroState(grid.n_cells), MicroState(grid.n_cells, n)};
  for (std::size_t j = 0; j < grid.n_cells; ++j) {
    const double x = grid.center(j);
    switch (c) {
      case TestCase::DamBreak:
        s.U.h(j) = 0.3 + 0.35 * (std::tanh(k * x) - std::tanh(k * (x - 0.2)));
        s.U.hu(j) = 0.0;
        break;
      case TestCase::SmoothWave: {
        const double h = 1.0 + std::exp(3.0 * std::cos(std::numbers::pi * (x + 0.5))) / std::exp(4.0);
        s.U.h(j) = h;
        s.U.hu(j) = 0.25 * h;
        // u = 0.25 (1 - phi_1 + phi_N); for N = 1 both terms hit alpha_1.
        if (n >= 1) {
          s.V(j, 0) += -0.25 * h;
          s.V(j, n - 1) += 0.25 * h;
        }
        break;
      }
    }
  }
  return s;
}

}  // namespace hswme
