#include "oracles.hpp"

#include <cmath>
#include <numbers>

namespace oracle {

Mat to_eigen(const hswme::Matrix& m) {
  Mat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

hswme::Matrix from_eigen(const Mat& m) {
  hswme::Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

double phi(int n, double zeta) { return std::legendre(static_cast<unsigned>(n), 1.0 - 2.0 * zeta); }

double dphi(int n, double zeta) {
  if (n == 0) return 0.0;
  // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1), only used away from x = +-1.
  const double x = 1.0 - 2.0 * zeta;
  const double pn = std::legendre(static_cast<unsigned>(n), x);
  const double pm = std::legendre(static_cast<unsigned>(n - 1), x);
  return -2.0 * n * (x * pn - pm) / (x * x - 1.0);
}

void gauss_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(n, t);
      const double q = std::legendre(n - 1, t);
      dp = n * (t * p - q) / (t * t - 1.0);
      const double step = p / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double p = std::legendre(n, t);
    const double q = std::legendre(n - 1, t);
    dp = n * (t * p - q) / (t * t - 1.0);
    x[i] = 0.5 * (1.0 - t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

Mat derivative_gram(int n) {
  std::vector<double> x, w;
  gauss_01(n + 4, x, w);
  Mat G = Mat::Zero(n, n);
  for (std::size_t q = 0; q < x.size(); ++q)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) += w[q] * dphi(i, x[q]) * dphi(j, x[q]);
  return G;
}

Vec source(double h, double u, const Vec& alpha, double nu, double lambda) {
  const int n = static_cast<int>(alpha.size());
  const Mat G = derivative_gram(n + 1);
  Vec full(n + 1);
  full(0) = 0.0;
  full.tail(n) = alpha;
  const double sum = alpha.sum();
  // Galerkin test with phi_i: slip at zeta = 0, viscous term -(nu/h) int phi_i' u'.
  Vec s(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double slip = -(nu / lambda) * (u + sum);
    const double visc = -(nu / h) * G.row(i).dot(full);
    s(i) = (2 * i + 1) * (slip + visc);
  }
  return s;
}

Mat transport_matrix(double h, double u, double a, int n, double g) {
  Mat A = Mat::Zero(n + 2, n + 2);
  A(0, 1) = 1.0;
  A(1, 0) = g * h - u * u - a * a / 3.0;
  A(1, 1) = 2.0 * u;
  if (n >= 1) {
    A(1, 2) = 2.0 * a / 3.0;
    A(2, 0) = -2.0 * u * a;
    A(2, 1) = 2.0 * a;
  }
  if (n >= 2) A(3, 0) = -2.0 / 3.0 * a * a;
  for (int k = 1; k <= n; ++k) {
    const int row = k + 1;
    A(row, row) = u;
    if (k < n) A(row, row + 1) = (k + 2.0) / (2.0 * k + 3.0) * a;
    if (k > 1) A(row, row - 1) = (k - 1.0) / (2.0 * k - 1.0) * a;
  }
  return A;
}

namespace {

// Interior rows plus one ghost row on each side.
Mat with_ghosts(const Mat& Q, hswme::BoundaryCondition bc) {
  const Eigen::Index n = Q.rows();
  Mat G(n + 2, Q.cols());
  G.middleRows(1, n) = Q;
  if (bc == hswme::BoundaryCondition::Periodic) {
    G.row(0) = Q.row(n - 1);
    G.row(n + 1) = Q.row(0);
  } else {
    G.row(0) = Q.row(0);
    G.row(n + 1) = Q.row(n - 1);
  }
  return G;
}

}  // namespace

Mat coupled_step(const Mat& Q, double dt, const hswme::Grid& grid, double g) {
  const Eigen::Index n = Q.rows();
  const int nm = static_cast<int>(Q.cols()) - 2;
  const Mat G = with_ghosts(Q, grid.bc);
  Mat fluc(n + 1, Q.cols());
  for (Eigen::Index i = 0; i <= n; ++i) {
    const auto l = G.row(i);
    const auto r = G.row(i + 1);
    const double h = 0.5 * (l(0) + r(0));
    const double u = 0.5 * (l(1) / l(0) + r(1) / r(0));
    const double a = nm > 0 ? 0.5 * (l(2) / l(0) + r(2) / r(0)) : 0.0;
    fluc.row(i) = (transport_matrix(h, u, a, nm, g) * (r - l).transpose()).transpose();
  }
  const double c = dt / (2.0 * grid.dx());
  Mat out(n, Q.cols());
  for (Eigen::Index j = 0; j < n; ++j) out.row(j) = 0.5 * (G.row(j) + G.row(j + 2)) - c * (fluc.row(j + 1) + fluc.row(j));
  return out;
}

Mat micro_step(const Mat& U_tilde, const Vec& alpha1, const Mat& V, double dt, const hswme::Grid& grid) {
  const Eigen::Index n = U_tilde.rows();
  const int nm = static_cast<int>(V.cols());
  Mat Q(n, nm + 2);
  Q << U_tilde, V;
  const Mat G = with_ghosts(Q, grid.bc);
  const Mat Ga = with_ghosts(Mat(alpha1), grid.bc);
  Mat fluc(n + 1, nm);
  for (Eigen::Index i = 0; i <= n; ++i) {
    const auto l = G.row(i);
    const auto r = G.row(i + 1);
    const double h = 0.5 * (l(0) + r(0));
    const double u = 0.5 * (l(1) / l(0) + r(1) / r(0));
    const double a = 0.5 * (Ga(i, 0) + Ga(i + 1, 0));
    const Mat A = transport_matrix(h, u, a, nm, 9.81);
    fluc.row(i) = (A.bottomRows(nm) * (r - l).transpose()).transpose();
  }
  const double c = dt / (2.0 * grid.dx());
  Mat out(n, nm);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.row(j) = 0.5 * (G.row(j).tail(nm) + G.row(j + 2).tail(nm)) - c * (fluc.row(j + 1) + fluc.row(j));
  }
  return out;
}

CellFriction cell_friction(double h, double u, int n, double nu, double lambda) {
  // Probe the affine map hα -> S_{1..N}.
  const Vec s0 = source(h, u, Vec::Zero(n), nu, lambda).tail(n);
  CellFriction f{Mat(n, n), s0};
  for (int k = 0; k < n; ++k) {
    Vec e = Vec::Zero(n);
    e(k) = 1.0 / h;
    f.J.col(k) = source(h, u, e, nu, lambda).tail(n) - s0;
  }
  return f;
}

std::vector<CellFriction> friction_field(const Mat& U, int n_moments, double nu, double lambda) {
  std::vector<CellFriction> out;
  for (Eigen::Index j = 0; j < U.rows(); ++j) out.push_back(cell_friction(U(j, 0), U(j, 1) / U(j, 0), n_moments, nu, lambda));
  return out;
}

Mat friction_rhs(const std::vector<CellFriction>& field, const Mat& V) {
  Mat out(V.rows(), V.cols());
  for (Eigen::Index j = 0; j < V.rows(); ++j) out.row(j) = (field[j].J * V.row(j).transpose() + field[j].c).transpose();
  return out;
}

Mat solve_affine(const std::function<Mat(const Mat&)>& residual, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index m = rows * cols;
  const Mat r0 = residual(Mat::Zero(rows, cols));
  Mat A(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Mat e = Mat::Zero(rows, cols);
    e(k / cols, k % cols) = 1.0;
    const Mat d = residual(e) - r0;
    for (Eigen::Index i = 0; i < m; ++i) A(i, k) = d(i / cols, i % cols);
  }
  Vec b(m);
  for (Eigen::Index i = 0; i < m; ++i) b(i) = -r0(i / cols, i % cols);
  const Vec z = A.fullPivLu().solve(b);
  Mat out(rows, cols);
  for (Eigen::Index i = 0; i < m; ++i) out(i / cols, i % cols) = z(i);
  return out;
}

Mat random_macro(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> hd(0.5, 1.5), ud(-0.5, 0.5);
  Mat U(n, 2);
  for (int j = 0; j < n; ++j) {
    U(j, 0) = hd(rng);
    U(j, 1) = U(j, 0) * ud(rng);
  }
  return U;
}

Mat random_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = d(rng);
  return M;
}

Mat random_micro(std::mt19937_64& rng, int n, int nm, double scale) { return random_matrix(rng, n, nm, scale); }

Mat random_orthonormal(std::mt19937_64& rng, int rows, int cols) {
  const Mat A = random_matrix(rng, rows, cols);
  Eigen::HouseholderQR<Mat> qr(A);
  return qr.householderQ() * Mat::Identity(rows, cols);
}

hswme::MacroState macro(const Mat& U) { return hswme::MacroState(from_eigen(U)); }
hswme::MicroState micro(const Mat& V) { return hswme::MicroState(from_eigen(V)); }

}  // namespace oracle
