#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ossr/mat.hpp"

namespace ossr {

enum class CostKind { Quadratic, QuadLog, LogSumExp2, SqrtFrac };

/// A registered strongly convex scalar cost with analytic gradient, curvature
/// bounds [h_lo, h_hi] valid on the declared operating interval, and the
/// local resource datum d.
///
/// Kinds:
///   Quadratic(a,b,c)   a*y^2 + b*y + c, a > 0
///   QuadLog(delta)     y^2*ln(1+y^2) + (y+delta)^2
///   LogSumExp2(p,q)    ln(e^(p*y) + e^(q*y)) + y^2
///   SqrtFrac(s,c)      y^2/(s*sqrt(y^2+1)) + (y-c)^2
struct LocalCost {
  CostKind kind = CostKind::Quadratic;
  double p1 = 0.5, p2 = 0.0, p3 = 0.0;
  double h_lo = 1.0, h_hi = 1.0;
  double d = 0.0;
  double op_lo = -20.0, op_hi = 20.0;  // interval the curvature bounds refer to

  static LocalCost quadratic(double a, double b, double c, double d);
  static LocalCost quad_log(double delta, double d);
  static LocalCost log_sum_exp2(double p, double q, double d);
  static LocalCost sqrt_frac(double s, double c, double d);

  double value(double y) const;
  double grad(double y) const;
  std::string kind_name() const;
};

struct BoundCheck {
  bool ok = true;
  double y = 0.0;        // offending sample when !ok
  double measured = 0.0; // sampled curvature there
};

/// Samples the curvature (central difference of grad) on [lo, hi] and checks
/// it stays within [h_lo*(1-1e-3), h_hi*(1+1e-3)].
BoundCheck validate_bounds(const LocalCost& c, double lo, double hi, std::size_t samples);

struct AllocationProblem {
  std::vector<LocalCost> costs;

  std::size_t n() const { return costs.size(); }
  double total_resource() const;
  Vec resource_data() const;
};

}  // namespace ossr
