#pragma once

#include "ossr/costs.hpp"
#include "ossr/graph.hpp"
#include "ossr/mat.hpp"

namespace ossr {

/// Per-network state of the distributed optimal signal generator: primal
/// estimates z, multipliers lambda, integral states v (one scalar each per
/// agent).
struct GeneratorState {
  Vec z, lam, v;

  std::size_t n() const { return z.size(); }
};

/// Primal-dual generator dynamics:
///   dz_i      = -grad f_i(z_i) + lambda_i
///   dlambda_i = -(L lambda)_i - (L v)_i + d_i - z_i
///   dv_i      = (L lambda)_i
GeneratorState generator_rhs(const GeneratorState& s, const AllocationProblem& p, const Mat& L);

/// Same dynamics but the gradient is evaluated at the measured outputs y
/// instead of z (real-time gradient variant).
GeneratorState generator_rhs_measured(const GeneratorState& s, const Vec& y,
                                      const AllocationProblem& p, const Mat& L);

struct AllocationSolution {
  Vec y;         // optimizer, one entry per agent
  double theta;  // common multiplier at the optimum
};

/// Independent optimality-condition solver: bisection on the monotone
/// resource mismatch g(theta) = sum_i y_i(theta) - sum_i d_i, where each
/// y_i(theta) solves grad f_i(y) = theta by safeguarded Newton. Serves as
/// the oracle the generator dynamics are tested against.
AllocationSolution solve_allocation_oracle(const AllocationProblem& p);

struct KktCertificate {
  double theta;                // mean of local gradients
  double grad_spread;          // max_i |grad f_i(z_i) - theta|
  double constraint_residual;  // |sum z - sum d|
};

KktCertificate kkt_check(const Vec& z, const AllocationProblem& p);

}  // namespace ossr
