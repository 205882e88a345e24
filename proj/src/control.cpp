#include "ossr/control.hpp"

namespace ossr {

Vec observer_estimate(const Mat& Lbar, const Vec& x_or_xi, const Vec& eta_bar) {
  Vec eta = Lbar * x_or_xi;
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] += eta_bar[i];
  return eta;
}

ObserverOut reduced_observer_rhs(const Mat& S, const Mat& Lbar, const AgentPlant& p,
                                 const Vec& x_or_xi, double u, const Vec& eta_bar) {
  ObserverOut out;
  out.eta = observer_estimate(Lbar, x_or_xi, eta_bar);

  const Mat LE = Lbar * p.E;
  const Mat S_LE = S - LE;
  const Mat drive = S * Lbar - LE * Lbar - Lbar * p.A;
  const Mat LB = Lbar * p.B;

  out.eta_bar_dot = S_LE * eta_bar;
  const Vec dx = drive * x_or_xi;
  for (std::size_t i = 0; i < out.eta_bar_dot.size(); ++i)
    out.eta_bar_dot[i] += dx[i] - LB(i, 0) * u;
  return out;
}

double state_feedback_control(const FeedbackGains& g, const Vec& x, const Vec& eta, double z,
                              bool rejection_enabled) {
  double u = g.K3 * z;
  for (std::size_t j = 0; j < x.size(); ++j) u += g.K1(0, j) * x[j];
  if (rejection_enabled)
    for (std::size_t j = 0; j < eta.size(); ++j) u += g.K2(0, j) * eta[j];
  return u;
}

Vec output_feedback_rhs(const FeedbackGains& g, const AgentPlant& p, double y_meas, double u,
                        const Vec& xi) {
  Vec dxi = p.A * xi;
  double cxi = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) cxi += p.C(0, j) * xi[j];
  const double innovation = cxi - y_meas;
  for (std::size_t i = 0; i < dxi.size(); ++i)
    dxi[i] += p.B(i, 0) * u + g.Lhat(i, 0) * innovation;
  return dxi;
}

double realtime_gradient_control(const HighGainSet& hg, const Vec& x, const Vec& eta, double z,
                                 bool rejection_enabled) {
  double u = hg.Kbar3 * z;
  const Vec chain = hg.Xhat * x;  // (C x, C A x, ..., C A^(r-1) x)
  for (std::size_t k = 0; k < chain.size(); ++k) u += hg.Kbar1(0, k) * chain[k];
  for (std::size_t j = 0; j < x.size(); ++j) u -= hg.CAr(0, j) * x[j] / hg.hf_gain;
  if (rejection_enabled)
    for (std::size_t j = 0; j < eta.size(); ++j) u += hg.Kbar2(0, j) * eta[j];
  return u;
}

}  // namespace ossr
