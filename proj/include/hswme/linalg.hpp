#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hswme {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles with value semantics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Vector col(std::size_t j) const;
  void set_col(std::size_t j, std::span<const double> values);

  Matrix transposed() const;
  void fill(double value);

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

/// a^T b without forming the transpose.
Matrix transpose_times(const Matrix& a, const Matrix& b);
/// a b^T without forming the transpose.
Matrix times_transpose(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);
Vector transpose_matvec(const Matrix& a, std::span<const double> x);

double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);
double dot(std::span<const double> a, std::span<const double> b);

/// max |Q^T Q - I| over all entries.
double orthonormality_defect(const Matrix& q);

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QrResult {
  Matrix Q;  // m x k, orthonormal columns
  Matrix R;  // k x k, upper triangular with non-negative diagonal
};

/// Thin QR of an m x k matrix (m >= k).
///
/// Columns are orthogonalized with twice-iterated Gram-Schmidt. A column
/// whose remainder falls below 1e-13 * ||A||_F is treated as null: its Q
/// column is the first canonical vector e_i that survives
/// orthogonalization against the accepted columns, and its R diagonal is 0.
/// The result is deterministic and Q is orthonormal even for A = 0.
QrResult qr(const Matrix& a);

struct SvdResult {
  Matrix U;      // m x r
  Vector sigma;  // r, descending, non-negative
  Matrix Vt;     // r x n
};

/// Rank-r truncated SVD by one-sided Jacobi on the shorter dimension.
/// Left vectors of zero singular values are completed to an orthonormal set.
SvdResult truncated_svd(const Matrix& a, std::size_t r);

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // columns are eigenvectors
};

/// Cyclic Jacobi eigensolver for a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& a);

/// In-place partial-pivot solve of a small n x n row-major system stored in
/// `a`; the solution overwrites `b`. No allocation.
void solve_small_inplace(std::span<double> a, std::size_t n, std::span<double> b);

/// Solves A X = B with partial-pivot elimination.
/// Throws SingularMatrixError when a pivot falls below 1e-14 * max|A|.
Matrix solve_dense(const Matrix& a, const Matrix& b);

/// Solves X - dt*A1*X*H1 - dt*A2*X*H2 = rhs for X (N x r) by assembling the
/// (N r) x (N r) Kronecker system explicitly.
Matrix solve_kron(const Matrix& a1, const Matrix& h1, const Matrix& a2, const Matrix& h2,
                  double dt, const Matrix& rhs);

/// Orthogonal similarity A = Q H Q^T with H upper Hessenberg (Householder).
struct HessenbergForm {
  Matrix Q;
  Matrix H;
};
HessenbergForm hessenberg(const Matrix& a);

/// Solves (I - c H) X = rhs in place for upper-Hessenberg H in O(n^2) per
/// right-hand side. `work` is scratch space and is resized as needed.
void solve_shifted_hessenberg(const Matrix& h, double c, Matrix& rhs, Matrix& work);

}  // namespace hswme
