#include "ossr/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ossr/errors.hpp"

namespace ossr {

namespace {

// column-major vec / unvec
Vec vec_of(const Mat& m) {
  Vec v(m.rows() * m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) v[j * m.rows() + i] = m(i, j);
  return v;
}

Mat unvec(const Vec& v, std::size_t rows, std::size_t cols) {
  Mat m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = v[j * rows + i];
  return m;
}

// real coefficients of prod (s - p_i), ascending order, leading 1 dropped
Vec poly_from_poles(const std::vector<Complex>& poles) {
  std::vector<Complex> coeff{1.0};
  for (const Complex& p : poles) {
    std::vector<Complex> next(coeff.size() + 1, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      next[k + 1] += coeff[k];
      next[k] -= p * coeff[k];
    }
    coeff = std::move(next);
  }
  Vec out(poles.size());
  for (std::size_t k = 0; k < poles.size(); ++k) {
    if (std::abs(coeff[k].imag()) > 1e-9 * (1.0 + std::abs(coeff[k])))
      throw AssignmentFailure("pole set is not self-conjugate");
    out[k] = coeff[k].real();
  }
  return out;
}

// p(A) by Horner for a monic polynomial with ascending coefficients c
Mat poly_eval(const Mat& A, const Vec& c) {
  const std::size_t n = A.rows();
  Mat P = Mat::identity(n);
  for (std::size_t k = c.size(); k-- > 0;) {
    P = P * A;
    P = P + c[k] * Mat::identity(n);
  }
  return P;
}

Mat controllability_matrix(const Mat& A, const Mat& B) {
  const std::size_t n = A.rows();
  Mat cm(n, n);
  Mat col = B;
  for (std::size_t k = 0; k < n; ++k) {
    cm.set_block(0, k, col);
    col = A * col;
  }
  return cm;
}

bool spectrum_matches(const Mat& M, std::vector<Complex> want, double tol) {
  std::vector<Complex> got = eigenvalues(M).eigenvalues;
  if (got.size() != want.size()) return false;
  auto cmp = [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  };
  std::sort(got.begin(), got.end(), cmp);
  std::sort(want.begin(), want.end(), cmp);
  for (std::size_t i = 0; i < got.size(); ++i)
    if (std::abs(got[i] - want[i]) > tol) return false;
  return true;
}

// K with sigma(A + B K) = poles, via Ackermann on the controllability matrix
Mat place_single_input(const Mat& A, const Mat& B, const std::vector<Complex>& poles) {
  const std::size_t n = A.rows();
  if (poles.size() != n) throw AssignmentFailure("pole count must equal the state dimension");
  const Mat cm = controllability_matrix(A, B);
  Vec en(n, 0.0);
  en[n - 1] = 1.0;
  Vec w;
  try {
    w = solve_vec(cm.transpose(), en);
  } catch (const SingularMatrix&) {
    throw Uncontrollable("pole placement: (A, B) not controllable");
  }
  const Mat pA = poly_eval(A, poly_from_poles(poles));
  Mat K = -1.0 * (Mat::row(w) * pA);

  double pole_scale = 1.0;
  for (const Complex& p : poles) pole_scale = std::max(pole_scale, std::abs(p));
  if (!spectrum_matches(A + B * K, poles, 1e-6 * pole_scale))
    throw AssignmentFailure("pole placement verification failed");
  return K;
}

std::vector<Complex> to_complex(const Vec& re) {
  std::vector<Complex> out;
  out.reserve(re.size());
  for (double r : re) out.emplace_back(r, 0.0);
  return out;
}

}  // namespace

RegulatorSolution solve_regulator_equations(const AgentPlant& p, const Mat& S) {
  p.validate();
  const std::size_t n = p.n();
  const std::size_t q = p.q();
  if (S.rows() != q || S.cols() != q)
    throw Error("solve_regulator_equations: S shape does not match E");

  RegulatorSolution sol;

  // block 1, vectorized over the unknowns (X1, U1):
  //   [(S^T (x) I_n) - (I_q (x) A)] vec(X1) - (I_q (x) B) vec(U1) = vec(E)
  //   (I_q (x) C) vec(X1) = 0
  if (q > 0) {
    const Mat Iq = Mat::identity(q);
    const Mat lhs_x = kron(S.transpose(), Mat::identity(n)) - kron(Iq, p.A);
    const Mat lhs_u = -1.0 * kron(Iq, p.B);
    const Mat lhs_c = kron(Iq, p.C);
    const std::size_t m = n * q + q;
    Mat M(m, m);
    M.set_block(0, 0, lhs_x);
    M.set_block(0, n * q, lhs_u);
    M.set_block(n * q, 0, lhs_c);
    Vec rhs(m, 0.0);
    const Vec ve = vec_of(p.E);
    std::copy(ve.begin(), ve.end(), rhs.begin());
    Vec x;
    try {
      x = solve_vec(M, rhs);
    } catch (const SingularMatrix&) {
      throw Unsolvable("regulator equations: block 1 singular (rank condition violated)");
    }
    sol.X1 = unvec(Vec(x.begin(), x.begin() + n * q), n, q);
    sol.U1 = Mat::row(Vec(x.begin() + n * q, x.end()));
  } else {
    sol.X1 = Mat(n, 0);
    sol.U1 = Mat(1, 0);
  }

  // block 2: [A, B; C, 0] [X2; U2] = [0; 1]
  {
    Mat M(n + 1, n + 1);
    M.set_block(0, 0, p.A);
    M.set_block(0, n, p.B);
    M.set_block(n, 0, p.C);
    Vec rhs(n + 1, 0.0);
    rhs[n] = 1.0;
    Vec x;
    try {
      x = solve_vec(M, rhs);
    } catch (const SingularMatrix&) {
      throw Unsolvable("regulator equations: block 2 singular (rank condition violated at 0)");
    }
    sol.X2 = Mat::column(Vec(x.begin(), x.begin() + n));
    sol.U2 = x[n];
  }

  // residuals
  if (q > 0) {
    const Mat r1 = sol.X1 * S - p.A * sol.X1 - p.B * sol.U1 - p.E;
    const Mat r1c = p.C * sol.X1;
    sol.residual_block1 = std::max(r1.norm_max(), r1c.norm_max());
  }
  {
    Mat r2 = p.A * sol.X2 + sol.U2 * p.B;
    const Mat r2c = p.C * sol.X2;
    sol.residual_block2 = std::max(r2.norm_max(), std::abs(r2c(0, 0) - 1.0));
  }
  if (sol.residual_block1 > 1e-10 || sol.residual_block2 > 1e-10)
    throw Unsolvable("regulator equations: residual above 1e-10");
  return sol;
}

Mat stabilizing_gain(const Mat& A, const Mat& B, const std::vector<Complex>& poles) {
  return place_single_input(A, B, poles);
}

Mat observer_gain(const Mat& Cobs, const Mat& S, const std::vector<Complex>& poles) {
  const std::size_t q = S.rows();
  const std::size_t m = Cobs.rows();
  if (Cobs.cols() != q || S.cols() != q) throw Error("observer_gain: shape mismatch");
  if (q == 0) return Mat(0, m);
  if (!check_observable(Cobs, S)) throw Unobservable("observer_gain: (Cobs, S) not observable");
  if (poles.size() != q) throw AssignmentFailure("observer_gain: pole count must equal q");

  if (m == 1) {
    // dual Ackermann: place sigma(S^T - Cobs^T K), then L = -(-K)^T
    const Mat K = place_single_input(S.transpose(), Cobs.transpose(),
                                     poles);  // sigma(S^T + Cobs^T K) = poles
    Mat L = -1.0 * K.transpose();
    const double absc = eigenvalues(S - L * Cobs).abscissa;
    if (!(absc < 0.0)) throw AssignmentFailure("observer_gain: placement not Hurwitz");
    return L;
  }

  // multi-row observation: Sylvester assignment S^T X - X F = Cobs^T G,
  // L = (G X^-1)^T, spectrum of S - L Cobs equals spectrum of F
  Mat F(q, q);
  {
    std::size_t k = 0;
    std::vector<Complex> sorted = poles;
    std::sort(sorted.begin(), sorted.end(), [](const Complex& a, const Complex& b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() > b.imag();
    });
    while (k < q) {
      if (sorted[k].imag() == 0.0) {
        F(k, k) = sorted[k].real();
        ++k;
      } else {
        if (k + 1 >= q) throw AssignmentFailure("observer_gain: unpaired complex pole");
        F(k, k) = sorted[k].real();
        F(k + 1, k + 1) = sorted[k].real();
        F(k, k + 1) = sorted[k].imag();
        F(k + 1, k) = -sorted[k].imag();
        k += 2;
      }
    }
  }
  // shared modes between F and S would make the Sylvester operator singular
  for (const Complex& fs : eigenvalues(F).eigenvalues)
    for (const Complex& ss : eigenvalues(S).eigenvalues)
      if (std::abs(fs - ss) < 1e-9)
        throw AssignmentFailure("observer_gain: requested pole collides with an exosystem mode");

  const Mat lift = kron(Mat::identity(q), S.transpose()) - kron(F.transpose(), Mat::identity(q));
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int attempt = 0; attempt < 10; ++attempt) {
    Mat G(m, q);
    for (double& g : G.data()) g = u(rng);
    try {
      const Vec xv = solve_vec(lift, vec_of(Cobs.transpose() * G));
      const Mat X = unvec(xv, q, q);
      const Mat L = solve_linear(X.transpose(), G.transpose());  // X^-T G^T
      const double absc = eigenvalues(S - L * Cobs).abscissa;
      if (absc < 0.0) return L;
    } catch (const SingularMatrix&) {
      // retry with a fresh G
    }
  }
  throw AssignmentFailure("observer_gain: Sylvester assignment failed after retries");
}

std::pair<Mat, double> composite_gains(const RegulatorSolution& reg, const Mat& K1) {
  Mat K2 = reg.U1 - K1 * reg.X1;
  const Mat k3 = K1 * reg.X2;
  return {K2, reg.U2 - k3(0, 0)};
}

Mat companion(const Vec& c) {
  const std::size_t r = c.size();
  Mat m(r, r);
  for (std::size_t i = 0; i + 1 < r; ++i) m(i, i + 1) = 1.0;
  for (std::size_t j = 0; j < r; ++j) m(r - 1, j) = -c[j];
  return m;
}

HighGainSet high_gain_synthesis(const AgentPlant& p, const Mat& S, const Vec& c, double eps) {
  p.validate();
  const std::size_t q = p.q();
  if (S.rows() != q || S.cols() != q) throw Error("high_gain_synthesis: S shape mismatch");
  const std::size_t r = relative_degree(p);
  if (c.size() != r)
    throw Error("high_gain_synthesis: need exactly r polynomial coefficients");
  if (!(eps > 0.0 && eps <= 1.0)) throw Error("high_gain_synthesis: eps must be in (0, 1]");
  if (eigenvalues(companion(c)).abscissa >= 0.0)
    throw Error("high_gain_synthesis: feedback polynomial is not Hurwitz");
  if (!is_minimum_phase(p))
    throw NotMinimumPhase("high_gain_synthesis: zero dynamics not Hurwitz");

  HighGainSet hg;
  hg.eps = eps;
  hg.c = c;

  // chain rows C A^(k-1) and the tail C A^r
  hg.Xhat = Mat(r, p.n());
  Mat row = p.C;
  for (std::size_t k = 0; k < r; ++k) {
    hg.Xhat.set_block(k, 0, row);
    row = row * p.A;
  }
  hg.CAr = row;

  const Mat g = hg.Xhat.block(r - 1, 0, 1, p.n()) * p.B;  // C A^(r-1) B
  hg.hf_gain = g(0, 0);
  if (std::abs(hg.hf_gain) < 1e-12)
    throw ZeroHighFrequencyGain("high_gain_synthesis: C A^(r-1) B vanishes");

  // steady-state chain recursion
  hg.Xbar1 = Mat(r, q);
  for (std::size_t j = 1; j < r; ++j) {
    const Mat prev = hg.Xbar1.block(j - 1, 0, 1, q);
    const Mat caE = hg.Xhat.block(j - 1, 0, 1, p.n()) * p.E;  // C A^(j-1) E
    hg.Xbar1.set_block(j, 0, prev * S - caE);
  }
  {
    const Mat last = hg.Xbar1.block(r - 1, 0, 1, q);
    const Mat caE = hg.Xhat.block(r - 1, 0, 1, p.n()) * p.E;
    hg.Ubar1 = (1.0 / hg.hf_gain) * (last * S - caE);
  }

  hg.Xbar2.assign(r, 0.0);
  hg.Xbar2[0] = 1.0;
  hg.Ubar2 = 0.0;

  hg.Kbar1 = Mat(1, r);
  double ek = 1.0;
  const double er = std::pow(eps, static_cast<double>(r));
  for (std::size_t k = 0; k < r; ++k) {
    hg.Kbar1(0, k) = -c[k] * ek / (hg.hf_gain * er);
    ek *= eps;
  }

  hg.Kbar2 = hg.Ubar1 - hg.Kbar1 * hg.Xbar1;
  double k1x2 = 0.0;
  for (std::size_t k = 0; k < r; ++k) k1x2 += hg.Kbar1(0, k) * hg.Xbar2[k];
  hg.Kbar3 = hg.Ubar2 - k1x2;
  return hg;
}

Vec default_k1_poles(std::size_t n) {
  Vec p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = -2.0 - 0.5 * static_cast<double>(k);
  return p;
}

Vec default_observer_poles(std::size_t q) {
  Vec p(q);
  for (std::size_t k = 0; k < q; ++k) p[k] = -5.0 * (1.0 + 0.2 * static_cast<double>(k));
  return p;
}

AgentGains synthesize_agent(const AgentPlant& p, const Mat& S, ControlLaw law,
                            const Vec& k1_poles, const Vec& lbar_poles, const Vec& lhat_poles,
                            const Vec& c, double eps) {
  AgentGains g;
  g.reg = solve_regulator_equations(p, S);
  const std::size_t q = p.q();
  g.Lbar = (q > 0) ? observer_gain(p.E, S, to_complex(lbar_poles.empty() ? default_observer_poles(q) : lbar_poles))
                   : Mat(0, p.n());

  if (law == ControlLaw::RealtimeGradient) {
    Vec cc = c;
    if (cc.empty()) {
      // default polynomial (s+2)^r
      const std::size_t r = relative_degree(p);
      Vec acc{1.0};
      for (std::size_t i = 0; i < r; ++i) {
        Vec next(acc.size() + 1, 0.0);
        for (std::size_t k = 0; k < acc.size(); ++k) {
          next[k + 1] += acc[k];
          next[k] += 2.0 * acc[k];
        }
        acc = std::move(next);
      }
      cc.assign(acc.begin(), acc.end() - 1);  // drop the leading 1
    }
    g.hg = high_gain_synthesis(p, S, cc, eps);
  } else {
    FeedbackGains fb;
    fb.K1 = stabilizing_gain(p.A, p.B,
                             to_complex(k1_poles.empty() ? default_k1_poles(p.n()) : k1_poles));
    auto [K2, K3] = composite_gains(g.reg, fb.K1);
    fb.K2 = K2;
    fb.K3 = K3;
    fb.Lbar = g.Lbar;
    // output observer: A + Lhat C Hurwitz via the dual placement
    const Mat K = stabilizing_gain(
        p.A.transpose(), p.C.transpose(),
        to_complex(lhat_poles.empty() ? default_observer_poles(p.n()) : lhat_poles));
    fb.Lhat = K.transpose();
    g.fb = fb;
  }
  return g;
}

}  // namespace ossr
