#include "ossr/generator.hpp"

#include <algorithm>
#include <cmath>

#include "ossr/errors.hpp"

namespace ossr {

namespace {

GeneratorState rhs_impl(const GeneratorState& s, const Vec& grad_at, const AllocationProblem& p,
                        const Mat& L) {
  const std::size_t n = p.n();
  if (s.z.size() != n || s.lam.size() != n || s.v.size() != n || grad_at.size() != n)
    throw Error("generator_rhs: dimension mismatch");
  const Vec lam0 = L * s.lam;
  const Vec v0 = L * s.v;
  GeneratorState d;
  d.z.resize(n);
  d.lam.resize(n);
  d.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.z[i] = -p.costs[i].grad(grad_at[i]) + s.lam[i];
    d.lam[i] = -lam0[i] - v0[i] + p.costs[i].d - s.z[i];
    d.v[i] = lam0[i];
  }
  return d;
}

// Solve grad f(y) = theta for the unique root of a strongly convex cost.
double invert_gradient(const LocalCost& c, double theta) {
  // expand a sign-changing bracket
  double lo = -1.0, hi = 1.0;
  double glo = c.grad(lo) - theta;
  double ghi = c.grad(hi) - theta;
  int guard = 0;
  while (glo > 0.0 && guard++ < 80) {
    lo *= 2.0;
    glo = c.grad(lo) - theta;
  }
  guard = 0;
  while (ghi < 0.0 && guard++ < 80) {
    hi *= 2.0;
    ghi = c.grad(hi) - theta;
  }
  if (glo > 0.0 || ghi < 0.0) throw BracketFailure("invert_gradient: no sign change");

  double y = 0.5 * (lo + hi);
  const double gtol = 1e-13 * std::max(1.0, std::abs(theta));
  for (int it = 0; it < 200; ++it) {
    const double g = c.grad(y) - theta;
    if (std::abs(g) <= gtol) return y;
    if (g > 0.0)
      hi = y;
    else
      lo = y;
    // Newton with curvature from central differencing of the gradient
    const double step = 1e-6 * std::max(1.0, std::abs(y));
    const double curv = (c.grad(y + step) - c.grad(y - step)) / (2.0 * step);
    double ynext = (curv > 0.0) ? y - g / curv : y;
    if (!(ynext > lo && ynext < hi)) ynext = 0.5 * (lo + hi);  // bisect fallback
    if (ynext == y) ynext = 0.5 * (lo + hi);
    y = ynext;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(y))) break;
  }
  return y;
}

}  // namespace

GeneratorState generator_rhs(const GeneratorState& s, const AllocationProblem& p, const Mat& L) {
  return rhs_impl(s, s.z, p, L);
}

GeneratorState generator_rhs_measured(const GeneratorState& s, const Vec& y,
                                      const AllocationProblem& p, const Mat& L) {
  return rhs_impl(s, y, p, L);
}

AllocationSolution solve_allocation_oracle(const AllocationProblem& p) {
  if (p.n() == 0) throw Error("solve_allocation_oracle: empty problem");
  const double target = p.total_resource();

  auto mismatch = [&](double theta, Vec* y_out) {
    double s = 0.0;
    if (y_out) y_out->resize(p.n());
    for (std::size_t i = 0; i < p.n(); ++i) {
      const double yi = invert_gradient(p.costs[i], theta);
      if (y_out) (*y_out)[i] = yi;
      s += yi;
    }
    return s - target;
  };

  double lo = -1e6, hi = 1e6;
  double glo = mismatch(lo, nullptr);
  double ghi = mismatch(hi, nullptr);
  if (glo > 0.0 || ghi < 0.0)
    throw BracketFailure("solve_allocation_oracle: theta not bracketed in [-1e6, 1e6]");

  AllocationSolution sol;
  double g = 0.0;
  for (int it = 0; it < 200; ++it) {
    sol.theta = 0.5 * (lo + hi);
    g = mismatch(sol.theta, &sol.y);
    if (std::abs(g) <= 1e-10) return sol;
    if (g > 0.0)
      hi = sol.theta;
    else
      lo = sol.theta;
  }
  if (std::abs(g) > 1e-10)
    throw NoConvergence("solve_allocation_oracle: bisection stalled above tolerance");
  return sol;
}

KktCertificate kkt_check(const Vec& z, const AllocationProblem& p) {
  if (z.size() != p.n()) throw Error("kkt_check: dimension mismatch");
  KktCertificate cert{0.0, 0.0, 0.0};
  double zsum = 0.0;
  Vec grads(p.n());
  for (std::size_t i = 0; i < p.n(); ++i) {
    grads[i] = p.costs[i].grad(z[i]);
    cert.theta += grads[i];
    zsum += z[i];
  }
  cert.theta /= static_cast<double>(p.n());
  for (double gi : grads) cert.grad_spread = std::max(cert.grad_spread, std::abs(gi - cert.theta));
  cert.constraint_residual = std::abs(zsum - p.total_resource());
  return cert;
}

}  // namespace ossr
