#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "ossr/errors.hpp"

namespace ossr {

using Vec = std::vector<double>;
using Complex = std::complex<double>;

/// Dense real matrix, row-major. Zero-sized dimensions are legal and behave
/// like empty sums (products come out as zero matrices of the right shape),
/// which keeps disturbance-free agents (q = 0) on the same code path.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat diag(const Vec& d);
  static Mat column(const Vec& v);
  static Mat row(const Vec& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Mat transpose() const;
  Mat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Mat& m);
  Vec row_vec(std::size_t i) const;
  Vec col_vec(std::size_t j) const;

  double norm_max() const;
  double norm_fro() const;
  double norm_one() const;  // max column sum
  bool all_finite() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator-(const Mat& a);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& a);
Vec operator*(const Mat& a, const Vec& x);

Mat hstack(const Mat& a, const Mat& b);
Mat vstack(const Mat& a, const Mat& b);
Mat kron(const Mat& a, const Mat& b);

// small vector helpers
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
Vec vadd(const Vec& a, const Vec& b);
Vec vsub(const Vec& a, const Vec& b);
Vec vscale(double s, const Vec& a);

/// Solve A X = B by LU with partial pivoting. Throws SingularMatrix when a
/// pivot falls below 1e-12 * max|A|.
Mat solve_linear(const Mat& A, const Mat& B);
Vec solve_vec(const Mat& A, const Vec& b);

struct Spectrum {
  std::vector<Complex> eigenvalues;
  double abscissa;  // max real part, -inf for empty matrices
};

/// Eigenvalues via Householder Hessenberg reduction followed by Francis
/// double-shift QR iteration. Complex pairs come out exactly conjugate
/// (extracted from 2x2 Schur blocks). Throws NoConvergence at the iteration
/// cap. Intended for n <= 64.
Spectrum eigenvalues(const Mat& A);

/// Rank by column-pivoted Householder QR: number of |R(k,k)| above tol.
/// Default tol = 1e-9 * max|A| * max(m, n).
std::size_t numerical_rank(const Mat& A);
std::size_t numerical_rank(const Mat& A, double tol);

/// Matrix exponential by Pade(13) scaling and squaring.
Mat expm(const Mat& A);

}  // namespace ossr
