#include "hswme/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hswme {

namespace {

void require_positive_height(const MacroState& U, const char* where) {
  for (std::size_t j = 0; j < U.n_cells(); ++j) {
    if (!(U.h(j) > 0.0)) {
      throw SolverError(std::string(where) + ": non-positive water height in cell " + std::to_string(j), j);
    }
  }
}

}  // namespace

void check_macro_state(const MacroState& U, const char* where) {
  for (std::size_t j = 0; j < U.n_cells(); ++j) {
    if (!(U.h(j) > 0.0) || !std::isfinite(U.h(j)) || !std::isfinite(U.hu(j))) {
      throw SolverError(std::string(where) + ": invalid macro state in cell " + std::to_string(j) +
                            " (h = " + std::to_string(U.h(j)) + ", hu = " + std::to_string(U.hu(j)) + ")",
                        j);
    }
  }
}

Vector primitive_alpha1(const MacroState& U, std::span<const double> h_alpha1) {
  Vector a(U.n_cells());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = h_alpha1[j] / U.h(j);
  return a;
}

double max_wave_speed(const MacroState& U, std::span<const double> alpha1, const ModelParams& params) {
  require_positive_height(U, "max_wave_speed");
  double s = 0.0;
  for (std::size_t j = 0; j < U.n_cells(); ++j) {
    const double a = alpha1.empty() ? 0.0 : alpha1[j];
    s = std::max(s, std::abs(U.velocity(j)) + std::sqrt(params.g * U.h(j) + a * a));
  }
  return s;
}

TimeStep select_time_step(const MacroState& U, std::span<const double> alpha1, const Grid& grid,
                          const ModelParams& params, double t, double t_final) {
  TimeStep ts;
  ts.lambda_max = max_wave_speed(U, alpha1, params);
  ts.dt = params.cfl * grid.dx() / ts.lambda_max;
  if (t + ts.dt > t_final) ts.dt = t_final - t;
  return ts;
}

MacroState macro_transport_step(const MacroState& U, std::span<const double> h_alpha1, double dt,
                                const Grid& grid, const ModelParams& params) {
  const std::size_t n = U.n_cells();
  if (n != grid.n_cells) throw std::invalid_argument("macro_transport_step: grid/state size mismatch");
  if (!h_alpha1.empty() && h_alpha1.size() != n) {
    throw std::invalid_argument("macro_transport_step: h*alpha_1 length mismatch");
  }
  require_positive_height(U, "macro_transport_step");

  const auto hal = [&](std::size_t j) { return h_alpha1.empty() ? 0.0 : h_alpha1[j]; };

  // Fluctuation through interface i (cells i-1 | i).
  Vector flux_h(n + 1);
  Vector flux_hu(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t l = neighbor(i, -1, n, grid.bc);
    const std::size_t r = neighbor(i, 0, n, grid.bc);
    const double hl = U.h(l), hr = U.h(r);
    const double ul = U.hu(l) / hl, ur = U.hu(r) / hr;
    const double al = hal(l) / hl, ar = hal(r) / hr;
    const double h_bar = 0.5 * (hl + hr);
    const double u_bar = 0.5 * (ul + ur);
    const double a_bar = 0.5 * (al + ar);
    const double dh = hr - hl;
    const double dhu = U.hu(r) - U.hu(l);
    const double dha = hal(r) - hal(l);
    flux_h[i] = dhu;
    flux_hu[i] = (params.g * h_bar - u_bar * u_bar - a_bar * a_bar / 3.0) * dh + 2.0 * u_bar * dhu +
                 2.0 / 3.0 * a_bar * dha;
  }

  const double c = dt / (2.0 * grid.dx());
  MacroState out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t jm = neighbor(j, -1, n, grid.bc);
    const std::size_t jp = neighbor(j, 1, n, grid.bc);
    out.h(j) = 0.5 * (U.h(jp) + U.h(jm)) - c * (flux_h[j + 1] + flux_h[j]);
    out.hu(j) = 0.5 * (U.hu(jp) + U.hu(jm)) - c * (flux_hu[j + 1] + flux_hu[j]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(out.h(j) > 0.0) || !std::isfinite(out.hu(j))) {
      throw SolverError("macro_transport_step: invalid state emerging in cell " + std::to_string(j) +
                            " (h = " + std::to_string(out.h(j)) + ")",
                        j);
    }
  }
  return out;
}

MacroState macro_transport_step(const MacroState& U, const MicroState& V, double dt, const Grid& grid,
                                const ModelParams& params) {
  if (V.n_moments() == 0) return macro_transport_step(U, std::span<const double>{}, dt, grid, params);
  if (V.n_cells() != U.n_cells()) throw std::invalid_argument("macro_transport_step: micro/macro size mismatch");
  const Vector h_alpha1 = V.matrix().col(0);
  return macro_transport_step(U, h_alpha1, dt, grid, params);
}

MicroInterfaceData micro_interface_data(const MacroState& U, std::span<const double> alpha1, const Grid& grid) {
  const std::size_t n = U.n_cells();
  if (alpha1.size() != n) throw std::invalid_argument("micro_interface_data: alpha_1 length mismatch");
  MicroInterfaceData d{Vector(n + 1), Vector(n + 1), Vector(n + 1), Vector(n + 1)};
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t l = neighbor(i, -1, n, grid.bc);
    const std::size_t r = neighbor(i, 0, n, grid.bc);
    const double u_bar = 0.5 * (U.velocity(l) + U.velocity(r));
    const double a_bar = 0.5 * (alpha1[l] + alpha1[r]);
    const double dh = U.h(r) - U.h(l);
    const double dhu = U.hu(r) - U.hu(l);
    d.u_bar[i] = u_bar;
    d.alpha_bar[i] = a_bar;
    d.e1[i] = -2.0 * u_bar * a_bar * dh + 2.0 * a_bar * dhu;
    d.e2[i] = -2.0 / 3.0 * a_bar * a_bar * dh;
  }
  return d;
}

MicroState micro_transport_step_frozen(const MacroState& U_tilde, std::span<const double> alpha1,
                                       const MicroState& V, double dt, const Grid& grid) {
  const std::size_t n = U_tilde.n_cells();
  const std::size_t nm = V.n_moments();
  if (V.n_cells() != n || n != grid.n_cells) throw std::invalid_argument("micro_transport_step: shape mismatch");
  if (nm == 0) return V;
  require_positive_height(U_tilde, "micro_transport_step");

  const MicroInterfaceData d = micro_interface_data(U_tilde, alpha1, grid);
  const OffdiagA A(nm);

  // flux(i, :) = A_vu dU + (u_bar I + alpha_bar A) dV across interface i.
  Matrix flux(n + 1, nm);
  Vector dv(nm);
  Vector adv(nm);
  for (std::size_t i = 0; i <= n; ++i) {
    auto vl = V.row(neighbor(i, -1, n, grid.bc));
    auto vr = V.row(neighbor(i, 0, n, grid.bc));
    for (std::size_t k = 0; k < nm; ++k) dv[k] = vr[k] - vl[k];
    A.apply(dv, adv);
    auto f = flux.row(i);
    for (std::size_t k = 0; k < nm; ++k) f[k] = d.u_bar[i] * dv[k] + d.alpha_bar[i] * adv[k];
    f[0] += d.e1[i];
    if (nm >= 2) f[1] += d.e2[i];
  }

  const double c = dt / (2.0 * grid.dx());
  MicroState out(n, nm);
  for (std::size_t j = 0; j < n; ++j) {
    auto vm = V.row(neighbor(j, -1, n, grid.bc));
    auto vp = V.row(neighbor(j, 1, n, grid.bc));
    auto fl = flux.row(j);
    auto fr = flux.row(j + 1);
    auto o = out.row(j);
    for (std::size_t k = 0; k < nm; ++k) o[k] = 0.5 * (vp[k] + vm[k]) - c * (fr[k] + fl[k]);
  }
  return out;
}

MicroState micro_transport_step(const MacroState& U_tilde, const MacroState& U_old, const MicroState& V, double dt,
                                const Grid& grid) {
  if (U_old.n_cells() != U_tilde.n_cells()) throw std::invalid_argument("micro_transport_step: shape mismatch");
  if (V.n_moments() == 0) return V;
  if (V.n_cells() != U_old.n_cells()) throw std::invalid_argument("micro_transport_step: shape mismatch");
  require_positive_height(U_old, "micro_transport_step");
  const Vector alpha1 = primitive_alpha1(U_old, V.matrix().col(0));
  return micro_transport_step_frozen(U_tilde, alpha1, V, dt, grid);
}

State coupled_transport_step(const MacroState& U, const MicroState& V, double dt, const Grid& grid,
                             const ModelParams& params) {
  return {macro_transport_step(U, V, dt, grid, params), micro_transport_step(U, U, V, dt, grid)};
}

}  // namespace hswme
