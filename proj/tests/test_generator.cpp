#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "ossr/generator.hpp"

using namespace ossr;

namespace {

SharingGraph demo_graph() {
  return SharingGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}});
}

AllocationProblem inventory_problem() {
  AllocationProblem p;
  for (int i = 1; i <= 4; ++i)
    p.costs.push_back(LocalCost::quadratic(0.1 * i, -0.05 * i, static_cast<double>(i), i));
  return p;
}

AllocationProblem mixed_problem() {
  AllocationProblem p;
  p.costs = {LocalCost::quadratic(0.5, 2.0, 2.0, 1.0), LocalCost::quad_log(1.0, 2.0),
             LocalCost::log_sum_exp2(-0.1, 0.3, 3.0), LocalCost::sqrt_frac(25.0, 3.0, 4.0)};
  return p;
}

// classical RK4 over the generator dynamics alone
GeneratorState integrate_generator(GeneratorState s, const AllocationProblem& p, const Mat& L,
                                   double dt, double t_end,
                                   const std::function<void(double, const GeneratorState&)>& probe = {}) {
  const auto axpy = [](GeneratorState& a, double h, const GeneratorState& b) {
    for (std::size_t i = 0; i < a.z.size(); ++i) {
      a.z[i] += h * b.z[i];
      a.lam[i] += h * b.lam[i];
      a.v[i] += h * b.v[i];
    }
  };
  const long steps = std::lround(t_end / dt);
  for (long k = 0; k < steps; ++k) {
    if (probe) probe(k * dt, s);
    GeneratorState k1 = generator_rhs(s, p, L);
    GeneratorState s2 = s;
    axpy(s2, dt / 2, k1);
    GeneratorState k2 = generator_rhs(s2, p, L);
    GeneratorState s3 = s;
    axpy(s3, dt / 2, k2);
    GeneratorState k3 = generator_rhs(s3, p, L);
    GeneratorState s4 = s;
    axpy(s4, dt, k3);
    GeneratorState k4 = generator_rhs(s4, p, L);
    axpy(s, dt / 6, k1);
    axpy(s, dt / 3, k2);
    axpy(s, dt / 3, k3);
    axpy(s, dt / 6, k4);
  }
  if (probe) probe(steps * dt, s);
  return s;
}

double mean(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("single-agent equilibrium has zero derivative") {
  AllocationProblem p{{LocalCost::quadratic(0.5, 0.0, 0.0, 1.0)}};
  Mat L(1, 1);
  GeneratorState s{{1.0}, {1.0}, {0.0}};
  GeneratorState d = generator_rhs(s, p, L);
  CHECK(norm_inf(d.z) == 0.0);
  CHECK(norm_inf(d.lam) == 0.0);
  CHECK(norm_inf(d.v) == 0.0);
}

TEST_CASE("oracle reproduces the inventory optimum") {
  AllocationSolution sol = solve_allocation_oracle(inventory_problem());
  CHECK(sol.theta == doctest::Approx(0.864).epsilon(1e-9));
  CHECK(sol.y[0] == doctest::Approx(4.57).epsilon(1e-9));
  CHECK(sol.y[1] == doctest::Approx(2.41).epsilon(1e-9));
  CHECK(sol.y[2] == doctest::Approx(1.69).epsilon(1e-9));
  CHECK(sol.y[3] == doctest::Approx(1.33).epsilon(1e-9));
}

TEST_CASE("oracle splits symmetric problems evenly") {
  AllocationProblem p;
  for (int i = 0; i < 5; ++i) p.costs.push_back(LocalCost::quadratic(0.5, 0.0, 0.0, 2.0));
  AllocationSolution sol = solve_allocation_oracle(p);
  for (double yi : sol.y) CHECK(yi == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("oracle on the mixed cost set") {
  AllocationSolution sol = solve_allocation_oracle(mixed_problem());
  CHECK(std::abs(sol.y[0] - 2.2) < 0.1);
  CHECK(std::abs(sol.y[1] - 0.7) < 0.1);
  CHECK(std::abs(sol.y[2] - 2.0) < 0.1);
  CHECK(std::abs(sol.y[3] - 5.1) < 0.1);
  // constraint and stationarity at the reported point
  KktCertificate cert = kkt_check(sol.y, mixed_problem());
  CHECK(cert.grad_spread < 1e-8);
  CHECK(cert.constraint_residual < 1e-8);
}

TEST_CASE("generator derivative vanishes at the oracle equilibrium") {
  AllocationProblem p = inventory_problem();
  LaplacianBundle b = laplacian(demo_graph());
  AllocationSolution sol = solve_allocation_oracle(p);

  // lambda uniform at theta; v solves L v = d - z with zero mean
  Vec rhs = vsub(p.resource_data(), sol.y);
  Mat LrrT = b.L;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) LrrT(i, j) += b.r[i] * b.r[j];
  Vec vstar = solve_vec(LrrT, rhs);

  GeneratorState s{sol.y, Vec(4, sol.theta), vstar};
  GeneratorState d = generator_rhs(s, p, b.L);
  CHECK(norm_inf(d.z) < 1e-9);
  CHECK(norm_inf(d.lam) < 1e-9);
  CHECK(norm_inf(d.v) < 1e-9);
}

TEST_CASE("quadratic consensus case reaches the average") {
  // f_i = y^2/2 and d_i = y_i(0): optimum is the initial mean
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  AllocationProblem p;
  Vec y0(4);
  for (auto& y : y0) y = u(rng);
  for (int i = 0; i < 4; ++i) p.costs.push_back(LocalCost::quadratic(0.5, 0.0, 0.0, y0[i]));
  AllocationSolution sol = solve_allocation_oracle(p);
  for (double yi : sol.y) CHECK(yi == doctest::Approx(mean(y0)).epsilon(1e-9));

  LaplacianBundle b = laplacian(demo_graph());
  GeneratorState s{y0, Vec(4, 0.0), Vec(4, 0.0)};
  s = integrate_generator(s, p, b.L, 1e-3, 40.0);
  for (double zi : s.z) CHECK(std::abs(zi - mean(y0)) < 1e-6);
}

TEST_CASE("kkt_check flags feasible but unoptimized points") {
  AllocationProblem p = inventory_problem();
  KktCertificate at_d = kkt_check(p.resource_data(), p);
  CHECK(at_d.constraint_residual < 1e-12);
  CHECK(at_d.grad_spread > 0.1);

  KktCertificate at_zero = kkt_check(Vec(4, 0.0), p);
  CHECK(at_zero.constraint_residual == doctest::Approx(10.0));
}

TEST_CASE("mean of v is invariant along trajectories") {
  AllocationProblem p = inventory_problem();
  LaplacianBundle b = laplacian(demo_graph());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  GeneratorState s;
  s.z.resize(4);
  s.lam.resize(4);
  s.v.resize(4);
  for (auto* vec : {&s.z, &s.lam, &s.v})
    for (double& x : *vec) x = u(rng);
  const double v_mean0 = mean(s.v);
  GeneratorState end = integrate_generator(s, p, b.L, 1e-3, 10.0);
  CHECK(std::abs(mean(end.v) - v_mean0) <= 1e-8);
}

TEST_CASE("generator converges to the oracle optimum with exponential decay") {
  AllocationProblem p = inventory_problem();
  LaplacianBundle b = laplacian(demo_graph());
  AllocationSolution sol = solve_allocation_oracle(p);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  GeneratorState s{p.resource_data(), Vec(4, 0.0), Vec(4, 0.0)};
  for (double& z : s.z) z = u(rng);

  std::vector<double> ts, errs;
  GeneratorState end = integrate_generator(
      s, p, b.L, 1e-3, 100.0, [&](double t, const GeneratorState& cur) {
        double e = 0.0;
        for (std::size_t i = 0; i < 4; ++i) e += (cur.z[i] - sol.y[i]) * (cur.z[i] - sol.y[i]);
        ts.push_back(t);
        errs.push_back(std::sqrt(e));
      });
  double final_err = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    final_err = std::max(final_err, std::abs(end.z[i] - sol.y[i]));
  CHECK(final_err <= 1e-6);

  // least-squares slope of ln(err) inside the [1e-6, 1e-2] window
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (errs[k] > 1e-2 || errs[k] < 1e-6) continue;
    const double x = ts[k], y = std::log(errs[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++m;
  }
  REQUIRE(m > 100);
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double ss_tot = syy - sy * sy / m;
  const double ss_res = ss_tot - slope * (sxy - sx * sy / m);
  const double r2 = 1.0 - ss_res / ss_tot;
  CHECK(slope < 0.0);
  CHECK(r2 >= 0.99);
}
