#include "ossr/plant.hpp"

#include <cmath>

#include "ossr/errors.hpp"

namespace ossr {

void AgentPlant::validate() const {
  const std::size_t nn = A.rows();
  if (A.cols() != nn) throw ScenarioError("plant: A must be square");
  if (B.rows() != nn || B.cols() != 1) throw ScenarioError("plant: B must be n x 1");
  if (C.rows() != 1 || C.cols() != nn) throw ScenarioError("plant: C must be 1 x n");
  if (E.rows() != nn) throw ScenarioError("plant: E must have n rows");
  if (!A.all_finite() || !B.all_finite() || !C.all_finite() || !E.all_finite())
    throw ScenarioError("plant: non-finite entry");
}

Vec plant_rhs(const AgentPlant& p, const Vec& x, double u, const Vec& w) {
  Vec dx = p.A * x;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += p.B(i, 0) * u;
  if (!w.empty()) {
    const Vec ew = p.E * w;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += ew[i];
  }
  return dx;
}

std::size_t relative_degree(const AgentPlant& p) {
  const std::size_t n = p.n();
  Mat row = p.C;  // C A^(k-1)
  const double scale = std::max(1.0, p.C.norm_max() * p.B.norm_max());
  double growth = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const Mat cab = row * p.B;  // 1x1
    if (std::abs(cab(0, 0)) > 1e-10 * scale * growth) return k;
    row = row * p.A;
    growth *= std::max(1.0, p.A.norm_max());
  }
  throw NoRelativeDegree("relative_degree: C A^k B vanishes for all k <= n");
}

namespace {

Mat controllability_matrix(const Mat& A, const Mat& B) {
  const std::size_t n = A.rows();
  Mat cm(n, n * B.cols());
  Mat col = B;
  for (std::size_t k = 0; k < n; ++k) {
    cm.set_block(0, k * B.cols(), col);
    col = A * col;
  }
  return cm;
}

Mat observability_stack(const Mat& Cobs, const Mat& A) {
  const std::size_t q = A.rows();
  Mat obs(Cobs.rows() * q, q);
  Mat row = Cobs;
  for (std::size_t k = 0; k < q; ++k) {
    obs.set_block(k * Cobs.rows(), 0, row);
    row = row * A;
  }
  return obs;
}

}  // namespace

bool check_minimal(const AgentPlant& p) {
  p.validate();
  const std::size_t n = p.n();
  if (n == 0) return true;
  const bool ctrb = numerical_rank(controllability_matrix(p.A, p.B)) == n;
  const bool obsv = numerical_rank(observability_stack(p.C, p.A)) == n;
  return ctrb && obsv;
}

bool check_observable(const Mat& E, const Mat& S) {
  const std::size_t q = S.rows();
  if (S.cols() != q || E.cols() != q) throw Error("check_observable: shape mismatch");
  if (q == 0) return true;
  return numerical_rank(observability_stack(E, S)) == q;
}

bool regulator_rank_check(const AgentPlant& p, const Mat& S) {
  p.validate();
  const std::size_t n = p.n();

  std::vector<Complex> lambdas{Complex(0.0, 0.0)};
  if (S.rows() > 0)
    for (const Complex& ev : eigenvalues(S).eigenvalues) lambdas.push_back(ev);

  for (const Complex& lambda : lambdas) {
    // rosenbrock = [A - lambda I, B; C, 0], realified when lambda is complex
    const std::size_t m = n + 1;
    if (lambda.imag() == 0.0) {
      Mat ros(m, m);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          ros(i, j) = p.A(i, j) - (i == j ? lambda.real() : 0.0);
      for (std::size_t i = 0; i < n; ++i) ros(i, n) = p.B(i, 0);
      for (std::size_t j = 0; j < n; ++j) ros(n, j) = p.C(0, j);
      if (numerical_rank(ros) != m) return false;
    } else {
      // rank_C(M) = rank_R([Re -Im; Im Re]) / 2
      Mat re(m, m), im(m, m);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          re(i, j) = p.A(i, j) - (i == j ? lambda.real() : 0.0);
          im(i, j) = (i == j) ? -lambda.imag() : 0.0;
        }
      for (std::size_t i = 0; i < n; ++i) re(i, n) = p.B(i, 0);
      for (std::size_t j = 0; j < n; ++j) re(n, j) = p.C(0, j);
      Mat blk = vstack(hstack(re, -1.0 * im), hstack(im, re));
      if (numerical_rank(blk) != 2 * m) return false;
    }
  }
  return true;
}

NormalForm normal_form(const AgentPlant& p) {
  p.validate();
  const std::size_t n = p.n();
  NormalForm nf;
  nf.r = relative_degree(p);

  nf.chain_map = Mat(nf.r, n);
  {
    Mat row = p.C;
    for (std::size_t k = 0; k < nf.r; ++k) {
      nf.chain_map.set_block(k, 0, row);
      row = row * p.A;
    }
  }

  const std::size_t nz = n - nf.r;
  nf.zero_map = Mat(nz, n);
  if (nz > 0) {
    // orthonormal direction of B
    Vec ub = p.B.col_vec(0);
    const double bn = norm2(ub);
    if (bn == 0.0) throw DegenerateTransform("normal_form: B is zero");
    for (double& v : ub) v /= bn;

    // all Gram-Schmidt work happens inside the (n-1)-dim complement of B, so
    // W B = 0 holds by construction
    std::vector<Vec> kept;  // first r-1 chain rows (they live in B-perp), then W rows
    for (std::size_t k = 0; k + 1 < nf.r; ++k) {
      Vec row = nf.chain_map.row_vec(k);
      const double cb = dot(row, ub);
      for (std::size_t i = 0; i < n; ++i) row[i] -= cb * ub[i];
      for (int pass = 0; pass < 2; ++pass)
        for (const Vec& u : kept) {
          const double c = dot(u, row);
          for (std::size_t i = 0; i < n; ++i) row[i] -= c * u[i];
        }
      const double nr = norm2(row);
      if (nr < 1e-12) throw DegenerateTransform("normal_form: dependent chain rows");
      for (double& v : row) v /= nr;
      kept.push_back(row);
    }

    std::size_t placed = 0;
    for (std::size_t i = 0; i < n && placed < nz; ++i) {
      Vec cand(n, 0.0);
      cand[i] = 1.0;
      const double cb = dot(cand, ub);
      for (std::size_t k = 0; k < n; ++k) cand[k] -= cb * ub[k];
      for (int pass = 0; pass < 2; ++pass)
        for (const Vec& u : kept) {
          const double c = dot(u, cand);
          for (std::size_t k = 0; k < n; ++k) cand[k] -= c * u[k];
        }
      const double nc = norm2(cand);
      if (nc > 1e-8) {
        for (double& v : cand) v /= nc;
        kept.push_back(cand);
        nf.zero_map.set_block(placed, 0, Mat::row(cand));
        ++placed;
      }
    }
    if (placed != nz) throw DegenerateTransform("normal_form: could not complete zero map");
  }

  Mat T = (nz > 0) ? vstack(nf.chain_map, nf.zero_map) : nf.chain_map;
  Mat Tinv;
  try {
    Tinv = solve_linear(T, Mat::identity(n));
  } catch (const SingularMatrix&) {
    throw DegenerateTransform("normal_form: stacked transform is singular");
  }
  const double residual = (T * Tinv - Mat::identity(n)).norm_max();
  if (residual > 1e-9) throw DegenerateTransform("normal_form: transform poorly conditioned");

  const Mat Vchain = Tinv.block(0, 0, n, nf.r);
  if (nz > 0) {
    const Mat Vz = Tinv.block(0, nf.r, n, nz);
    nf.A0 = nf.zero_map * p.A * Vz;
    nf.Bz = nf.zero_map * p.A * Vchain;
    nf.Ez = nf.zero_map * p.E;
  } else {
    nf.A0 = Mat(0, 0);
    nf.Bz = Mat(0, nf.r);
    nf.Ez = Mat(0, p.q());
  }
  return nf;
}

bool is_minimum_phase(const AgentPlant& p) {
  const NormalForm nf = normal_form(p);
  if (nf.A0.rows() == 0) return true;
  return eigenvalues(nf.A0).abscissa < 0.0;
}

}  // namespace ossr
