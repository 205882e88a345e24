#include "ossr/mat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ossr {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

void require(bool ok, const char* msg) {
  if (!ok) throw Error(msg);
}
}  // namespace

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "Mat: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(const Vec& d) {
  Mat m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Mat Mat::column(const Vec& v) {
  Mat m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

Mat Mat::row(const Vec& v) {
  Mat m(1, v.size());
  for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j];
  return m;
}

Mat Mat::transpose() const {
  Mat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Mat Mat::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  require(r0 + nr <= rows_ && c0 + nc <= cols_, "Mat::block out of range");
  Mat b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Mat::set_block(std::size_t r0, std::size_t c0, const Mat& m) {
  require(r0 + m.rows() <= rows_ && c0 + m.cols() <= cols_, "Mat::set_block out of range");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) (*this)(r0 + i, c0 + j) = m(i, j);
}

Vec Mat::row_vec(std::size_t i) const {
  Vec v(cols_);
  for (std::size_t j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
  return v;
}

Vec Mat::col_vec(std::size_t j) const {
  Vec v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

double Mat::norm_max() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Mat::norm_fro() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Mat::norm_one() const {
  double m = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
    m = std::max(m, s);
  }
  return m;
}

bool Mat::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Mat operator+(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "Mat+: shape mismatch");
  Mat c = a;
  for (std::size_t k = 0; k < c.data().size(); ++k) c.data()[k] += b.data()[k];
  return c;
}

Mat operator-(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "Mat-: shape mismatch");
  Mat c = a;
  for (std::size_t k = 0; k < c.data().size(); ++k) c.data()[k] -= b.data()[k];
  return c;
}

Mat operator-(const Mat& a) { return -1.0 * a; }

Mat operator*(const Mat& a, const Mat& b) {
  require(a.cols() == b.rows(), "Mat*: shape mismatch");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Mat operator*(double s, const Mat& a) {
  Mat c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

Vec operator*(const Mat& a, const Vec& x) {
  require(a.cols() == x.size(), "Mat*Vec: shape mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Mat hstack(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows(), "hstack: row mismatch");
  Mat c(a.rows(), a.cols() + b.cols());
  c.set_block(0, 0, a);
  c.set_block(0, a.cols(), b);
  return c;
}

Mat vstack(const Mat& a, const Mat& b) {
  require(a.cols() == b.cols(), "vstack: col mismatch");
  Mat c(a.rows() + b.rows(), a.cols());
  c.set_block(0, 0, a);
  c.set_block(a.rows(), 0, b);
  return c;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          c(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
    }
  return c;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Vec vadd(const Vec& a, const Vec& b) {
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

Vec vsub(const Vec& a, const Vec& b) {
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Vec vscale(double s, const Vec& a) {
  Vec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = s * a[i];
  return c;
}

Mat solve_linear(const Mat& A, const Mat& B) {
  require(A.rows() == A.cols(), "solve_linear: A not square");
  require(A.rows() == B.rows(), "solve_linear: shape mismatch");
  const std::size_t n = A.rows();
  if (n == 0) return Mat(0, B.cols());

  Mat lu = A;
  Mat x = B;
  const double pivot_floor = 1e-12 * A.norm_max();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double pmax = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu(i, k));
      if (v > pmax) {
        pmax = v;
        piv = i;
      }
    }
    if (!(pmax > pivot_floor))
      throw SingularMatrix("solve_linear: numerically singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = lu(i, k) / lu(k, k);
      if (m == 0.0) continue;
      lu(i, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= m * x(k, j);
    }
  }
  // back substitution
  for (std::size_t j = 0; j < x.cols(); ++j) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x(ii, j);
      for (std::size_t k = ii + 1; k < n; ++k) s -= lu(ii, k) * x(k, j);
      x(ii, j) = s / lu(ii, ii);
    }
  }
  return x;
}

Vec solve_vec(const Mat& A, const Vec& b) {
  Mat x = solve_linear(A, Mat::column(b));
  return x.col_vec(0);
}

namespace {

// In-place Householder similarity reduction to upper Hessenberg form.
void hessenberg_reduce(Mat& h) {
  const std::size_t n = h.rows();
  if (n < 3) return;
  Vec v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double sigma = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) sigma += h(i, k) * h(i, k);
    sigma = std::sqrt(sigma);
    if (sigma == 0.0) continue;
    const double x0 = h(k + 1, k);
    const double alpha = (x0 >= 0.0) ? -sigma : sigma;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = h(i, k);
      if (i == k + 1) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 <= kEps * kEps * sigma * sigma) continue;
    const double inv = 1.0 / std::sqrt(vnorm2);
    for (std::size_t i = k + 1; i < n; ++i) v[i] *= inv;
    // left: rows k+1..n-1
    for (std::size_t j = k; j < n; ++j) {
      double w = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) w += v[i] * h(i, j);
      w *= 2.0;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= v[i] * w;
    }
    // right: cols k+1..n-1
    for (std::size_t i = 0; i < n; ++i) {
      double w = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) w += h(i, j) * v[j];
      w *= 2.0;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= w * v[j];
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

// Eigenvalues of a 2x2 block; complex pairs are exact conjugates.
void eig2x2(double a, double b, double c, double d, std::vector<Complex>& out) {
  const double half_tr = 0.5 * (a + d);
  const double det = a * d - b * c;
  const double disc = half_tr * half_tr - det;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double l1 = half_tr + ((half_tr >= 0.0) ? sq : -sq);
    const double l2 = (l1 != 0.0) ? det / l1 : half_tr - ((half_tr >= 0.0) ? sq : -sq);
    out.emplace_back(l1, 0.0);
    out.emplace_back(l2, 0.0);
  } else {
    const double im = std::sqrt(-disc);
    out.emplace_back(half_tr, im);
    out.emplace_back(half_tr, -im);
  }
}

// Francis double-shift QR on an upper Hessenberg matrix; returns eigenvalues.
std::vector<Complex> hessenberg_qr(Mat h) {
  const std::size_t n = h.rows();
  std::vector<Complex> eig;
  eig.reserve(n);
  if (n == 0) return eig;
  if (n == 1) {
    eig.emplace_back(h(0, 0), 0.0);
    return eig;
  }

  const double hnorm = std::max(h.norm_max(), kEps);
  long p = static_cast<long>(n) - 1;
  int iter_since_deflation = 0;
  long total_iters = 0;
  const long iter_cap = 80 * static_cast<long>(n);

  auto negligible = [&](long k) {
    // subdiagonal entry h(k, k-1)
    double tol = kEps * (std::abs(h(k - 1, k - 1)) + std::abs(h(k, k)));
    if (tol == 0.0) tol = kEps * hnorm;
    return std::abs(h(k, k - 1)) <= tol;
  };

  while (p >= 0) {
    if (p == 0) {
      eig.emplace_back(h(0, 0), 0.0);
      break;
    }
    // zero out negligible subdiagonals in the active range
    for (long k = p; k >= 1; --k)
      if (negligible(k)) h(k, k - 1) = 0.0;

    if (h(p, p - 1) == 0.0) {
      eig.emplace_back(h(p, p), 0.0);
      --p;
      iter_since_deflation = 0;
      continue;
    }
    if (p == 1 || h(p - 1, p - 2) == 0.0) {
      eig2x2(h(p - 1, p - 1), h(p - 1, p), h(p, p - 1), h(p, p), eig);
      p -= 2;
      iter_since_deflation = 0;
      continue;
    }

    if (total_iters++ > iter_cap)
      throw NoConvergence("eigenvalues: QR iteration cap reached");

    // start of the unreduced block ending at p
    long l = p - 1;
    while (l > 0 && h(l, l - 1) != 0.0) --l;

    double s, t;
    ++iter_since_deflation;
    if (iter_since_deflation == 10 || iter_since_deflation == 20) {
      // exceptional shift to break symmetry-induced cycles
      const double sx = std::abs(h(p, p - 1)) + std::abs(h(p - 1, p - 2));
      s = 1.5 * sx;
      t = -0.4375 * sx * sx;
    } else {
      s = h(p - 1, p - 1) + h(p, p);
      t = h(p - 1, p - 1) * h(p, p) - h(p - 1, p) * h(p, p - 1);
    }
    if (iter_since_deflation >= 30) {
      iter_since_deflation = 0;  // keep cycling with fresh exceptional shifts
    }

    // first column of (H^2 - sH + tI) restricted to the active block
    double x = h(l, l) * h(l, l) + h(l, l + 1) * h(l + 1, l) - s * h(l, l) + t;
    double y = h(l + 1, l) * (h(l, l) + h(l + 1, l + 1) - s);
    double z = (l + 2 <= p) ? h(l + 2, l + 1) * h(l + 1, l) : 0.0;

    for (long k = l; k <= p - 2; ++k) {
      // Householder zeroing (y, z) against x
      const double scale = std::abs(x) + std::abs(y) + std::abs(z);
      double v0 = 0, v1 = 0, v2 = 0;
      bool apply = false;
      if (scale > 0.0) {
        const double xs = x / scale, ys = y / scale, zs = z / scale;
        const double nrm = std::sqrt(xs * xs + ys * ys + zs * zs);
        const double alpha = (xs >= 0.0) ? -nrm : nrm;
        v0 = xs - alpha;
        v1 = ys;
        v2 = zs;
        const double vn = std::sqrt(v0 * v0 + v1 * v1 + v2 * v2);
        if (vn > 0.0) {
          v0 /= vn;
          v1 /= vn;
          v2 /= vn;
          apply = true;
        }
      }
      if (apply) {
        const long qc = std::max(l, k - 1);
        const long last_row = std::min<long>(k + 3, p);
        for (std::size_t j = static_cast<std::size_t>(qc); j < n; ++j) {
          double w = v0 * h(k, j) + v1 * h(k + 1, j) + v2 * h(k + 2, j);
          w *= 2.0;
          h(k, j) -= v0 * w;
          h(k + 1, j) -= v1 * w;
          h(k + 2, j) -= v2 * w;
        }
        for (long i = 0; i <= last_row; ++i) {
          double w = v0 * h(i, k) + v1 * h(i, k + 1) + v2 * h(i, k + 2);
          w *= 2.0;
          h(i, k) -= v0 * w;
          h(i, k + 1) -= v1 * w;
          h(i, k + 2) -= v2 * w;
        }
      }
      x = h(k + 1, k);
      y = h(k + 2, k);
      z = (k + 3 <= p) ? h(k + 3, k) : 0.0;
    }

    // final 2-element reflection on rows (p-1, p)
    {
      const double scale = std::abs(x) + std::abs(y);
      if (scale > 0.0) {
        const double xs = x / scale, ys = y / scale;
        const double nrm = std::sqrt(xs * xs + ys * ys);
        const double alpha = (xs >= 0.0) ? -nrm : nrm;
        double v0 = xs - alpha, v1 = ys;
        const double vn = std::sqrt(v0 * v0 + v1 * v1);
        if (vn > 0.0) {
          v0 /= vn;
          v1 /= vn;
          for (std::size_t j = static_cast<std::size_t>(p - 2); j < n; ++j) {
            double w = v0 * h(p - 1, j) + v1 * h(p, j);
            w *= 2.0;
            h(p - 1, j) -= v0 * w;
            h(p, j) -= v1 * w;
          }
          for (long i = 0; i <= p; ++i) {
            double w = v0 * h(i, p - 1) + v1 * h(i, p);
            w *= 2.0;
            h(i, p - 1) -= v0 * w;
            h(i, p) -= v1 * w;
          }
        }
      }
    }
  }
  return eig;
}

}  // namespace

Spectrum eigenvalues(const Mat& A) {
  require(A.rows() == A.cols(), "eigenvalues: matrix not square");
  if (A.rows() > 64) throw Error("eigenvalues: n > 64 unsupported");
  Spectrum sp;
  if (A.rows() == 0) {
    sp.abscissa = -std::numeric_limits<double>::infinity();
    return sp;
  }
  // scale to unit max magnitude for a well-behaved iteration
  const double scale = A.norm_max();
  Mat h = (scale > 0.0) ? (1.0 / scale) * A : A;
  hessenberg_reduce(h);
  sp.eigenvalues = hessenberg_qr(std::move(h));
  if (scale > 0.0)
    for (auto& ev : sp.eigenvalues) ev *= scale;
  sp.abscissa = -std::numeric_limits<double>::infinity();
  for (const auto& ev : sp.eigenvalues) sp.abscissa = std::max(sp.abscissa, ev.real());
  return sp;
}

std::size_t numerical_rank(const Mat& A) {
  return numerical_rank(A, 1e-9 * A.norm_max() * static_cast<double>(std::max(A.rows(), A.cols())));
}

std::size_t numerical_rank(const Mat& A, double tol) {
  const std::size_t m = A.rows(), n = A.cols();
  if (m == 0 || n == 0) return 0;
  Mat r = A;
  const std::size_t kmax = std::min(m, n);
  std::size_t rank = 0;
  Vec v(m);
  for (std::size_t k = 0; k < kmax; ++k) {
    // pivot: column with largest remaining norm
    std::size_t best = k;
    double best_norm = -1.0;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += r(i, j) * r(i, j);
      if (s > best_norm) {
        best_norm = s;
        best = j;
      }
    }
    if (best != k)
      for (std::size_t i = 0; i < m; ++i) std::swap(r(i, k), r(i, best));
    double sigma = std::sqrt(std::max(best_norm, 0.0));
    if (sigma == 0.0) break;
    const double alpha = (r(k, k) >= 0.0) ? -sigma : sigma;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) {
      v[i] = r(i, k);
      if (i == k) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(vnorm2);
      for (std::size_t i = k; i < m; ++i) v[i] *= inv;
      for (std::size_t j = k; j < n; ++j) {
        double w = 0.0;
        for (std::size_t i = k; i < m; ++i) w += v[i] * r(i, j);
        w *= 2.0;
        for (std::size_t i = k; i < m; ++i) r(i, j) -= v[i] * w;
      }
    }
    if (std::abs(r(k, k)) > tol) ++rank;
  }
  return rank;
}

Mat expm(const Mat& A) {
  require(A.rows() == A.cols(), "expm: matrix not square");
  const std::size_t n = A.rows();
  if (n == 0) return Mat(0, 0);

  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const double theta13 = 5.371920351148152;

  int squarings = 0;
  Mat a = A;
  const double nrm = A.norm_one();
  if (nrm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    a = std::ldexp(1.0, -squarings) * a;
  }

  const Mat I = Mat::identity(n);
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;

  Mat u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * I);
  Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * I;

  Mat r = solve_linear(v - u, v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace ossr
