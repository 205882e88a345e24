#include <cmath>
#include <random>

#include "doctest.h"
#include "ossr/costs.hpp"

using namespace ossr;

namespace {

std::vector<LocalCost> all_kinds() {
  return {LocalCost::quadratic(0.5, 2.0, 2.0, 1.0), LocalCost::quad_log(1.0, 2.0),
          LocalCost::log_sum_exp2(-0.1, 0.3, 3.0), LocalCost::sqrt_frac(25.0, 3.0, 4.0)};
}

}  // namespace

TEST_CASE("quadratic gradient fixed points") {
  LocalCost half = LocalCost::quadratic(0.5, 0.0, 0.0, 0.0);
  CHECK(half.grad(3.0) == doctest::Approx(3.0));

  // storage cost family: a=0.1i, b=-0.05i
  for (int i = 1; i <= 4; ++i) {
    LocalCost c = LocalCost::quadratic(0.1 * i, -0.05 * i, static_cast<double>(i), i);
    const double I = 2.7;
    CHECK(c.grad(I) == doctest::Approx(0.2 * i * I - 0.05 * i).epsilon(1e-14));
  }
}

TEST_CASE("quadlog gradient value") {
  LocalCost c = LocalCost::quad_log(1.0, 0.0);
  const double y = 0.7;
  const double want = 2 * y * std::log1p(y * y) + 2 * y * y * y / (1 + y * y) + 2 * (y + 1);
  CHECK(c.grad(y) == doctest::Approx(want).epsilon(1e-14));
  CHECK(c.grad(0.7) == doctest::Approx(4.41869).epsilon(1e-5));
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const double h = 1e-5;
  for (const LocalCost& c : all_kinds()) {
    for (int k = 0; k < 100; ++k) {
      const double y = u(rng);
      const double fd = (c.value(y + h) - c.value(y - h)) / (2.0 * h);
      const double g = c.grad(y);
      CHECK(std::abs(g - fd) <= 1e-6 * std::max(1.0, std::abs(g)));
    }
  }
}

TEST_CASE("gradients are strictly increasing") {
  for (const LocalCost& c : all_kinds()) {
    REQUIRE(c.h_lo > 0.0);
    double prev = c.grad(-10.0);
    for (int k = 1; k <= 400; ++k) {
      const double y = -10.0 + 20.0 * k / 400.0;
      const double g = c.grad(y);
      CHECK(g > prev);
      prev = g;
    }
  }
}

TEST_CASE("validate_bounds") {
  LocalCost quad = LocalCost::quadratic(1.0, 0.0, 0.0, 0.0);
  CHECK(validate_bounds(quad, -7.0, 7.0, 101).ok);

  LocalCost sf = LocalCost::sqrt_frac(25.0, 3.0, 0.0);
  sf.h_lo = 1.8;
  sf.h_hi = 2.2;
  CHECK(validate_bounds(sf, -10.0, 10.0, 201).ok);

  LocalCost ql = LocalCost::quad_log(1.0, 0.0);
  ql.h_hi = 2.0;  // too tight: curvature at y=10 far exceeds 2
  BoundCheck bc = validate_bounds(ql, -10.0, 10.0, 201);
  CHECK_FALSE(bc.ok);
  CHECK(bc.measured > 2.0);
}

TEST_CASE("default curvature bounds hold on the operating interval") {
  for (const LocalCost& c : all_kinds()) {
    BoundCheck bc = validate_bounds(c, c.op_lo, c.op_hi, 501);
    CHECK(bc.ok);
  }
}

TEST_CASE("allocation problem totals") {
  AllocationProblem p{all_kinds()};
  CHECK(p.n() == 4);
  CHECK(p.total_resource() == doctest::Approx(10.0));
  CHECK(p.resource_data()[2] == doctest::Approx(3.0));
}
