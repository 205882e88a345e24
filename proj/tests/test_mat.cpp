#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "ossr/mat.hpp"

using namespace ossr;

namespace {

Mat random_mat(std::mt19937_64& rng, std::size_t m, std::size_t n, double lo = -1.0,
               double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat a(m, n);
  for (double& v : a.data()) v = u(rng);
  return a;
}

// well conditioned: random entries plus a dominant diagonal
Mat random_well_conditioned(std::mt19937_64& rng, std::size_t n) {
  Mat a = random_mat(rng, n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += 4.0;
  return a;
}

// sort eigenvalues by (re, im) and compare multisets
void check_spectrum(std::vector<Complex> got, std::vector<Complex> want, double tol) {
  auto cmp = [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  };
  REQUIRE(got.size() == want.size());
  std::sort(got.begin(), got.end(), cmp);
  std::sort(want.begin(), want.end(), cmp);
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(std::abs(got[i] - want[i]) < tol);
}

// independent near-singularity witness: smallest pivot of complex Gaussian
// elimination on (A - lambda I), relative to the matrix scale
double min_pivot_of_shift(const Mat& A, Complex lambda) {
  const std::size_t n = A.rows();
  std::vector<std::vector<Complex>> m(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = Complex(A(i, j), 0.0) - (i == j ? lambda : 0.0);
  double min_pivot = 1e300;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
    std::swap(m[k], m[piv]);
    min_pivot = std::min(min_pivot, std::abs(m[k][k]));
    if (std::abs(m[k][k]) == 0.0) return 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = m[i][k] / m[k][k];
      for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
    }
  }
  return min_pivot;
}

}  // namespace

TEST_CASE("solve_linear identity and diagonal") {
  Mat I3 = Mat::identity(3);
  Mat b{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  Mat x = solve_linear(I3, b);
  CHECK((x - b).norm_max() == 0.0);

  Mat a{{2.0, 0.0}, {0.0, 4.0}};
  Mat rhs{{1.0}, {1.0}};
  Mat y = solve_linear(a, rhs);
  CHECK(y(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(y(1, 0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("solve_linear recovers known solution at 8x8") {
  std::mt19937_64 rng(7);
  Mat a = random_well_conditioned(rng, 8);
  Mat x0 = random_mat(rng, 8, 3);
  Mat b = a * x0;
  Mat x = solve_linear(a, b);
  CHECK((x - x0).norm_max() < 1e-9);
}

TEST_CASE("solve_linear residual bound over random instances") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 2 + trial % 10;
    Mat a = random_well_conditioned(rng, n);
    Mat b = random_mat(rng, n, 2);
    Mat x = solve_linear(a, b);
    const double res = (a * x - b).norm_max();
    CHECK(res <= 1e-10 * (1.0 + a.norm_max() * x.norm_max()));
  }
}

TEST_CASE("solve_linear rejects singular input") {
  Mat a{{1.0, 2.0}, {2.0, 4.0}};
  Mat b{{1.0}, {1.0}};
  CHECK_THROWS_AS(solve_linear(a, b), SingularMatrix);
}

TEST_CASE("eigenvalues of fixed small matrices") {
  check_spectrum(eigenvalues(Mat{{-1.0, 0.0}, {0.0, -2.0}}).eigenvalues,
                 {{-1.0, 0.0}, {-2.0, 0.0}}, 1e-12);
  CHECK(eigenvalues(Mat{{-1.0, 0.0}, {0.0, -2.0}}).abscissa == doctest::Approx(-1.0));

  // rotation generator: pure imaginary conjugate pair
  Spectrum rot = eigenvalues(Mat{{0.0, 1.0}, {-1.0, 0.0}});
  check_spectrum(rot.eigenvalues, {{0.0, 1.0}, {0.0, -1.0}}, 1e-12);
  CHECK(rot.abscissa == doctest::Approx(0.0).epsilon(1e-12));

  // companion matrix of s^2 + 4s + 4: double root at -2
  Spectrum comp = eigenvalues(Mat{{0.0, 1.0}, {-4.0, -4.0}});
  check_spectrum(comp.eigenvalues, {{-2.0, 0.0}, {-2.0, 0.0}}, 1e-7);
}

TEST_CASE("eigenvalues match a constructed similarity transform") {
  std::mt19937_64 rng(11);
  // D holds real values and one rotation block, T is a mild perturbation of I
  Mat d{{-3.0, 0, 0, 0, 0, 0},
        {0, -1.0, 0, 0, 0, 0},
        {0, 0, 2.5, 0, 0, 0},
        {0, 0, 0, 0.5, 2.0, 0},
        {0, 0, 0, -2.0, 0.5, 0},
        {0, 0, 0, 0, 0, -3.0}};
  Mat t = Mat::identity(6) + 0.2 * random_mat(rng, 6, 6);
  Mat tinv = solve_linear(t, Mat::identity(6));
  Mat a = t * d * tinv;
  std::vector<Complex> want = {{-3, 0}, {-1, 0}, {2.5, 0}, {0.5, 2.0}, {0.5, -2.0}, {-3, 0}};
  check_spectrum(eigenvalues(a).eigenvalues, want, 1e-8);
}

TEST_CASE("eigenvalues: conjugate pairing, trace identity, shift singularity") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 12;
    Mat a = random_mat(rng, n, n, -2.0, 2.0);
    Spectrum sp = eigenvalues(a);
    REQUIRE(sp.eigenvalues.size() == n);

    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
    Complex sum = 0.0;
    for (const auto& ev : sp.eigenvalues) sum += ev;
    CHECK(std::abs(sum.real() - trace) < 1e-8 * std::max(1.0, std::abs(trace)));
    CHECK(std::abs(sum.imag()) < 1e-8);

    // each complex eigenvalue has its exact conjugate in the list
    for (const auto& ev : sp.eigenvalues) {
      if (ev.imag() == 0.0) continue;
      const Complex conj_ev = std::conj(ev);
      const bool found = std::any_of(sp.eigenvalues.begin(), sp.eigenvalues.end(),
                                     [&](const Complex& w) { return w == conj_ev; });
      CHECK(found);
    }

    // A - lambda I must be near singular at every reported eigenvalue
    for (const auto& ev : sp.eigenvalues)
      CHECK(min_pivot_of_shift(a, ev) < 1e-6 * std::max(1.0, a.norm_max()));
  }
}

TEST_CASE("eigenvalues of A^T A are real and nonnegative") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + trial % 8;
    Mat a = random_mat(rng, n, n);
    Mat ata = a.transpose() * a;
    Spectrum sp = eigenvalues(ata);
    for (const auto& ev : sp.eigenvalues) {
      CHECK(std::abs(ev.imag()) < 1e-8);
      CHECK(ev.real() > -1e-8);
    }
  }
}

TEST_CASE("numerical_rank basics") {
  CHECK(numerical_rank(Mat(3, 3)) == 0);
  CHECK(numerical_rank(Mat::identity(4)) == 4);

  // Laplacian of the 4-node path graph
  Mat L{{1, -1, 0, 0}, {-1, 2, -1, 0}, {0, -1, 2, -1}, {0, 0, -1, 1}};
  CHECK(numerical_rank(L) == 3);
}

TEST_CASE("numerical_rank is transpose invariant") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 2 + trial % 6, n = 2 + (trial * 3) % 7;
    Mat a = random_mat(rng, m, n);
    if (trial % 3 == 0 && m > 1) {
      // plant a dependent row
      for (std::size_t j = 0; j < n; ++j) a(m - 1, j) = 2.0 * a(0, j);
    }
    CHECK(numerical_rank(a) == numerical_rank(a.transpose()));
  }
}

TEST_CASE("expm closed forms") {
  // zero matrix
  CHECK((expm(Mat(3, 3)) - Mat::identity(3)).norm_max() < 1e-14);

  // diagonal
  Mat d{{1.0, 0.0}, {0.0, -2.0}};
  Mat ed = expm(d);
  CHECK(ed(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-13));
  CHECK(ed(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-13));
  CHECK(std::abs(ed(0, 1)) < 1e-14);

  // nilpotent
  Mat nil{{0.0, 1.0}, {0.0, 0.0}};
  Mat en = expm(nil);
  CHECK(en(0, 1) == doctest::Approx(1.0).epsilon(1e-14));

  // rotation
  const double th = 0.7;
  Mat rot{{0.0, -th}, {th, 0.0}};
  Mat er = expm(rot);
  CHECK(er(0, 0) == doctest::Approx(std::cos(th)).epsilon(1e-13));
  CHECK(er(1, 0) == doctest::Approx(std::sin(th)).epsilon(1e-13));

  // semigroup property under scaling for a stiff-ish matrix
  Mat s{{-8.0, 3.0}, {0.5, -12.0}};
  Mat whole = expm(s);
  Mat half = expm(0.5 * s);
  CHECK((half * half - whole).norm_max() < 1e-12);
}

TEST_CASE("kron and stacking") {
  Mat a{{1.0, 2.0}, {3.0, 4.0}};
  Mat b{{0.0, 1.0}, {1.0, 0.0}};
  Mat k = kron(a, b);
  CHECK(k.rows() == 4);
  CHECK(k(0, 1) == 1.0);
  CHECK(k(0, 3) == 2.0);
  CHECK(k(3, 0) == 3.0);

  Mat h = hstack(a, b);
  CHECK(h.cols() == 4);
  CHECK(h(0, 2) == 0.0);
  Mat v = vstack(a, b);
  CHECK(v.rows() == 4);
  CHECK(v(2, 1) == 1.0);
}

TEST_CASE("empty dimensions flow through products") {
  Mat e(2, 0);
  Mat w(0, 1);
  Mat p = e * w;  // 2x1 of zeros
  CHECK(p.rows() == 2);
  CHECK(p.cols() == 1);
  CHECK(p.norm_max() == 0.0);
  Vec y = e * Vec{};
  CHECK(y.size() == 2);
  CHECK(eigenvalues(Mat(0, 0)).eigenvalues.empty());
  CHECK(expm(Mat(0, 0)).rows() == 0);
}
