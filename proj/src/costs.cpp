#include "ossr/costs.hpp"

#include <algorithm>
#include <cmath>

#include "ossr/errors.hpp"

namespace ossr {

LocalCost LocalCost::quadratic(double a, double b, double c, double d) {
  if (!(a > 0.0)) throw ScenarioError("quadratic cost needs a > 0");
  LocalCost lc;
  lc.kind = CostKind::Quadratic;
  lc.p1 = a;
  lc.p2 = b;
  lc.p3 = c;
  lc.h_lo = lc.h_hi = 2.0 * a;
  lc.d = d;
  return lc;
}

LocalCost LocalCost::quad_log(double delta, double d) {
  LocalCost lc;
  lc.kind = CostKind::QuadLog;
  lc.p1 = delta;
  lc.d = d;
  // curvature 2*ln(1+y^2) + 4y^2/(1+y^2) + (6y^2+2y^4)/(1+y^2)^2 + 2:
  // minimum 2 at y = 0, maximum at the interval edge.
  lc.h_lo = 2.0;
  const double y = std::max(std::abs(lc.op_lo), std::abs(lc.op_hi));
  const double y2 = y * y;
  lc.h_hi = 2.0 * std::log1p(y2) + 4.0 * y2 / (1.0 + y2) +
            (6.0 * y2 + 2.0 * y2 * y2) / ((1.0 + y2) * (1.0 + y2)) + 2.0;
  return lc;
}

LocalCost LocalCost::log_sum_exp2(double p, double q, double d) {
  LocalCost lc;
  lc.kind = CostKind::LogSumExp2;
  lc.p1 = p;
  lc.p2 = q;
  lc.d = d;
  // lse curvature is a Bernoulli variance scaled by (q-p)^2, in (0, (q-p)^2/4]
  lc.h_lo = 2.0;
  lc.h_hi = 2.0 + 0.25 * (q - p) * (q - p);
  return lc;
}

LocalCost LocalCost::sqrt_frac(double s, double c, double d) {
  if (s == 0.0) throw ScenarioError("sqrt_frac cost needs s != 0");
  LocalCost lc;
  lc.kind = CostKind::SqrtFrac;
  lc.p1 = s;
  lc.p2 = c;
  lc.d = d;
  // d2/dy2 of y^2/sqrt(y^2+1) is (2-y^2)(y^2+1)^(-5/2): range [-2/5^2.5, 2]
  lc.h_lo = 2.0 - 0.035778 / std::abs(s) - 1e-9;
  lc.h_hi = 2.0 + 2.0 / std::abs(s);
  if (lc.h_lo <= 0.0) throw ScenarioError("sqrt_frac cost not strongly convex for this s");
  return lc;
}

double LocalCost::value(double y) const {
  switch (kind) {
    case CostKind::Quadratic:
      return p1 * y * y + p2 * y + p3;
    case CostKind::QuadLog: {
      const double t = y + p1;
      return y * y * std::log1p(y * y) + t * t;
    }
    case CostKind::LogSumExp2: {
      const double a = p1 * y, b = p2 * y;
      const double m = std::max(a, b);
      return m + std::log(std::exp(a - m) + std::exp(b - m)) + y * y;
    }
    case CostKind::SqrtFrac: {
      const double t = y - p2;
      return y * y / (p1 * std::sqrt(y * y + 1.0)) + t * t;
    }
  }
  return 0.0;
}

double LocalCost::grad(double y) const {
  switch (kind) {
    case CostKind::Quadratic:
      return 2.0 * p1 * y + p2;
    case CostKind::QuadLog:
      return 2.0 * y * std::log1p(y * y) + 2.0 * y * y * y / (1.0 + y * y) + 2.0 * (y + p1);
    case CostKind::LogSumExp2: {
      const double a = p1 * y, b = p2 * y;
      const double m = std::max(a, b);
      const double ea = std::exp(a - m), eb = std::exp(b - m);
      return (p1 * ea + p2 * eb) / (ea + eb) + 2.0 * y;
    }
    case CostKind::SqrtFrac: {
      const double w = y * y + 1.0;
      const double rw = std::sqrt(w);
      return (2.0 * y / rw - y * y * y / (w * rw)) / p1 + 2.0 * (y - p2);
    }
  }
  return 0.0;
}

std::string LocalCost::kind_name() const {
  switch (kind) {
    case CostKind::Quadratic: return "quadratic";
    case CostKind::QuadLog: return "quadlog";
    case CostKind::LogSumExp2: return "logsumexp2";
    case CostKind::SqrtFrac: return "sqrtfrac";
  }
  return "?";
}

BoundCheck validate_bounds(const LocalCost& c, double lo, double hi, std::size_t samples) {
  if (!(lo < hi) || samples < 2) throw Error("validate_bounds: bad interval or sample count");
  BoundCheck res;
  const double h = 1e-5;
  for (std::size_t k = 0; k < samples; ++k) {
    const double y = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples - 1);
    const double curv = (c.grad(y + h) - c.grad(y - h)) / (2.0 * h);
    if (curv < c.h_lo * (1.0 - 1e-3) || curv > c.h_hi * (1.0 + 1e-3)) {
      res.ok = false;
      res.y = y;
      res.measured = curv;
      return res;
    }
  }
  return res;
}

double AllocationProblem::total_resource() const {
  double s = 0.0;
  for (const auto& c : costs) s += c.d;
  return s;
}

Vec AllocationProblem::resource_data() const {
  Vec d(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) d[i] = costs[i].d;
  return d;
}

}  // namespace ossr
