#include "hswme/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace hswme {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::size_t rows, std::size_t cols, std::vector<double> data) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("Matrix::from_rows: data length does not match shape");
  }
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(data);
  return m;
}

Vector Matrix::col(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::set_col(std::size_t j, std::span<const double> values) {
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("Matrix +=: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("Matrix -=: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Matrix *: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("transpose_times: row mismatch");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto ak = a.row(k);
    auto bk = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      auto ci = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix times_transpose(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("times_transpose: column mismatch");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
  return c;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector transpose_matvec(const Matrix& a, std::span<const double> x) {
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += ai[j] * x[i];
  }
  return y;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double orthonormality_defect(const Matrix& q) {
  const Matrix g = transpose_times(q, q);
  return max_abs_diff(g, Matrix::identity(q.cols()));
}

namespace {

// Projects column `v` (length m) against the first `k` columns of `q`,
// twice, accumulating the coefficients into `coeff` when non-null.
void orthogonalize(const Matrix& q, std::size_t k, std::vector<double>& v, double* coeff) {
  const std::size_t m = q.rows();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < k; ++i) {
      double c = 0.0;
      for (std::size_t row = 0; row < m; ++row) c += q(row, i) * v[row];
      for (std::size_t row = 0; row < m; ++row) v[row] -= c * q(row, i);
      if (coeff) coeff[i] += c;
    }
  }
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

QrResult qr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  if (m < k) throw std::invalid_argument("qr: more columns than rows");

  QrResult out{Matrix(m, k), Matrix(k, k)};
  const double threshold = 1e-13 * frobenius_norm(a);
  std::size_t next_candidate = 0;
  std::vector<double> v(m);
  std::vector<double> coeff(k);

  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t row = 0; row < m; ++row) v[row] = a(row, j);
    std::fill(coeff.begin(), coeff.end(), 0.0);
    orthogonalize(out.Q, j, v, coeff.data());
    for (std::size_t i = 0; i < j; ++i) out.R(i, j) = coeff[i];

    double nv = norm2(v);
    if (nv > threshold && nv > 0.0) {
      out.R(j, j) = nv;
      for (std::size_t row = 0; row < m; ++row) out.Q(row, j) = v[row] / nv;
      continue;
    }

    // Null column: complete with the first surviving canonical vector.
    // Some e_i keeps at least the average squared norm (m - j) / m.
    const double accept = std::sqrt(0.5 * static_cast<double>(m - j) / static_cast<double>(m));
    out.R(j, j) = 0.0;
    bool found = false;
    for (; next_candidate < m; ++next_candidate) {
      std::fill(v.begin(), v.end(), 0.0);
      v[next_candidate] = 1.0;
      orthogonalize(out.Q, j, v, nullptr);
      nv = norm2(v);
      if (nv >= accept) {
        for (std::size_t row = 0; row < m; ++row) out.Q(row, j) = v[row] / nv;
        ++next_candidate;
        found = true;
        break;
      }
    }
    if (!found) throw std::runtime_error("qr: orthonormal completion failed");
  }
  return out;
}

SymmetricEigen symmetric_eigen(const Matrix& a_in) {
  const std::size_t n = a_in.rows();
  if (a_in.cols() != n) throw std::invalid_argument("symmetric_eigen: matrix not square");
  Matrix a = a_in;
  Matrix v = Matrix::identity(n);

  const double scale = frobenius_norm(a);
  for (int sweep = 0; sweep < 100 && scale > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-16 * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    // Sign convention: largest-magnitude component positive.
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(v(i, src)) > std::abs(v(imax, src))) imax = i;
    const double sign = v(imax, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
  }
  return out;
}

SvdResult truncated_svd(const Matrix& a, std::size_t r) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (r < 1 || r > std::min(m, n)) {
    throw std::invalid_argument("truncated_svd: rank " + std::to_string(r) + " outside [1, min(m, n)]");
  }
  // one-sided Jacobi on the rows of B = T^T, where T is A or A^T, whichever is tall
  const bool tall = m >= n;
  Matrix B = tall ? a.transposed() : a;
  const std::size_t q = B.rows(), p = B.cols();
  Matrix Z = Matrix::identity(q);
  const double eps = std::numeric_limits<double>::epsilon();
  const auto rotate = [](std::span<double> x, std::span<double> y, double c, double s) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double xi = x[k], yi = y[k];
      x[k] = c * xi - s * yi;
      y[k] = s * xi + c * yi;
    }
  };
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        const auto bi = B.row(i), bj = B.row(j);
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          alpha += bi[k] * bi[k];
          beta += bj[k] * bj[k];
          gamma += bi[k] * bj[k];
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        rotate(bi, bj, c, c * t);
        rotate(Z.row(i), Z.row(j), c, c * t);
      }
    }
    if (!rotated) break;
  }

  Vector norms(q);
  for (std::size_t k = 0; k < q; ++k) {
    double s = 0.0;
    for (double v : B.row(k)) s += v * v;
    norms[k] = std::sqrt(s);
  }
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  SvdResult out;
  out.sigma.resize(r);
  out.U = Matrix(m, r);
  out.Vt = Matrix(r, n);
  const double tiny = std::max(norms[order[0]], std::numeric_limits<double>::min()) * q * eps;
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t src = order[k];
    const double sigma = norms[src] > tiny ? norms[src] : 0.0;
    out.sigma[k] = sigma;
    if (tall) {
      for (std::size_t i = 0; i < m; ++i) out.U(i, k) = sigma > 0.0 ? B(src, i) / sigma : 0.0;
      for (std::size_t j = 0; j < n; ++j) out.Vt(k, j) = Z(src, j);
    } else {
      for (std::size_t i = 0; i < m; ++i) out.U(i, k) = Z(src, i);
      for (std::size_t j = 0; j < n; ++j) out.Vt(k, j) = sigma > 0.0 ? B(src, j) / sigma : 0.0;
    }
  }
  // complete the vectors of zero singular values; QR keeps the others up to sign
  if (out.sigma[r - 1] == 0.0) {
    Matrix& M = tall ? out.U : out.Vt;
    const Matrix D = tall ? M : M.transposed();
    const Matrix Q = qr(D).Q;
    for (std::size_t k = 0; k < r; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < D.rows(); ++i) dot += Q(i, k) * D(i, k);
      const double sign = out.sigma[k] > 0.0 && dot < 0.0 ? -1.0 : 1.0;
      for (std::size_t i = 0; i < D.rows(); ++i) (tall ? M(i, k) : M(k, i)) = sign * Q(i, k);
    }
  }
  return out;
}

void solve_small_inplace(std::span<double> a, std::size_t n, std::span<double> b) {
  double scale = 0.0;
  for (std::size_t k = 0; k < n * n; ++k) scale = std::max(scale, std::abs(a[k]));
  const double tol = 1e-14 * scale;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    if (!(std::abs(a[piv * n + k]) > tol)) throw SingularMatrixError("solve_small_inplace: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    const double inv = 1.0 / a[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i * n + k] * inv;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      b[i] -= f * b[k];
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    double s = b[kk];
    for (std::size_t c = kk + 1; c < n; ++c) s -= a[kk * n + c] * b[c];
    b[kk] = s / a[kk * n + kk];
  }
}

Matrix solve_dense(const Matrix& a_in, const Matrix& b_in) {
  const std::size_t n = a_in.rows();
  if (a_in.cols() != n) throw std::invalid_argument("solve_dense: matrix not square");
  if (b_in.rows() != n) throw std::invalid_argument("solve_dense: right-hand side row mismatch");
  Matrix a = a_in;
  Matrix b = b_in;
  const std::size_t p = b.cols();
  const double tol = 1e-14 * max_abs(a_in);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (!(std::abs(a(piv, k)) > tol)) {
      throw SingularMatrixError("solve_dense: singular matrix (pivot " + std::to_string(k) + ")");
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (std::size_t j = 0; j < p; ++j) std::swap(b(k, j), b(piv, j));
    }
    const double inv = 1.0 / a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = 0; j < p; ++j) b(i, j) -= f * b(k, j);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = b(kk, j);
      for (std::size_t c = kk + 1; c < n; ++c) s -= a(kk, c) * b(c, j);
      b(kk, j) = s / a(kk, kk);
    }
  }
  return b;
}

Matrix solve_kron(const Matrix& a1, const Matrix& h1, const Matrix& a2, const Matrix& h2, double dt,
                  const Matrix& rhs) {
  const std::size_t n = rhs.rows();
  const std::size_t r = rhs.cols();
  if (a1.rows() != n || a1.cols() != n || a2.rows() != n || a2.cols() != n || h1.rows() != r ||
      h1.cols() != r || h2.rows() != r || h2.cols() != r) {
    throw std::invalid_argument("solve_kron: operand shapes do not match the right-hand side");
  }
  // Unknown index (i, a) -> i * r + a, matching the row-major layout of X.
  const std::size_t dim = n * r;
  Matrix op(dim, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < r; ++a) {
      const std::size_t row = i * r + a;
      for (std::size_t j = 0; j < n; ++j) {
        const double c1 = a1(i, j);
        const double c2 = a2(i, j);
        if (c1 == 0.0 && c2 == 0.0) continue;
        for (std::size_t b = 0; b < r; ++b) op(row, j * r + b) -= dt * (c1 * h1(b, a) + c2 * h2(b, a));
      }
      op(row, row) += 1.0;
    }
  }
  Matrix vec = Matrix::from_rows(dim, 1, Vector(rhs.data().begin(), rhs.data().end()));
  const Matrix x = solve_dense(op, vec);
  return Matrix::from_rows(n, r, Vector(x.data().begin(), x.data().end()));
}

HessenbergForm hessenberg(const Matrix& a_in) {
  const std::size_t n = a_in.rows();
  if (a_in.cols() != n) throw std::invalid_argument("hessenberg: matrix not square");
  Matrix a = a_in;
  Matrix q = Matrix::identity(n);
  std::vector<double> v(n);

  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (a(k + 1, k) > 0) alpha = -alpha;

    std::fill(v.begin(), v.end(), 0.0);
    v[k + 1] = a(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;

    // A <- P A
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
      s *= beta;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
    }
    // A <- A P, Q <- Q P
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      double t = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) {
        s += a(i, j) * v[j];
        t += q(i, j) * v[j];
      }
      s *= beta;
      t *= beta;
      for (std::size_t j = k + 1; j < n; ++j) {
        a(i, j) -= s * v[j];
        q(i, j) -= t * v[j];
      }
    }
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
  return {std::move(q), std::move(a)};
}

void solve_shifted_hessenberg(const Matrix& h, double c, Matrix& rhs, Matrix& work) {
  const std::size_t n = h.rows();
  const std::size_t p = rhs.cols();
  if (rhs.rows() != n) throw std::invalid_argument("solve_shifted_hessenberg: right-hand side row mismatch");
  if (work.rows() != n || work.cols() != n) work = Matrix(n, n);

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i == 0 ? 0 : i - 1;
    for (std::size_t j = 0; j < j0; ++j) work(i, j) = 0.0;
    for (std::size_t j = j0; j < n; ++j) {
      const double t = (i == j ? 1.0 : 0.0) - c * h(i, j);
      work(i, j) = t;
      scale = std::max(scale, std::abs(t));
    }
  }
  const double tol = 1e-14 * scale;

  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (std::abs(work(k + 1, k)) > std::abs(work(k, k))) {
      for (std::size_t j = k; j < n; ++j) std::swap(work(k, j), work(k + 1, j));
      for (std::size_t j = 0; j < p; ++j) std::swap(rhs(k, j), rhs(k + 1, j));
    }
    if (!(std::abs(work(k, k)) > tol)) throw SingularMatrixError("solve_shifted_hessenberg: singular shifted matrix");
    const double f = work(k + 1, k) / work(k, k);
    if (f == 0.0) continue;
    for (std::size_t j = k + 1; j < n; ++j) work(k + 1, j) -= f * work(k, j);
    for (std::size_t j = 0; j < p; ++j) rhs(k + 1, j) -= f * rhs(k, j);
  }
  if (n > 0 && !(std::abs(work(n - 1, n - 1)) > tol)) {
    throw SingularMatrixError("solve_shifted_hessenberg: singular shifted matrix");
  }
  for (std::size_t kk = n; kk-- > 0;) {
    const double inv = 1.0 / work(kk, kk);
    for (std::size_t j = 0; j < p; ++j) {
      double s = rhs(kk, j);
      for (std::size_t col = kk + 1; col < n; ++col) s -= work(kk, col) * rhs(col, j);
      rhs(kk, j) = s * inv;
    }
  }
}

}  // namespace hswme
