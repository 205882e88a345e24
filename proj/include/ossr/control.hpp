#pragma once

#include "ossr/mat.hpp"
#include "ossr/plant.hpp"
#include "ossr/synthesis.hpp"

namespace ossr {

/// Reduced-order disturbance observer
///   deta_bar = (S - Lbar E) eta_bar + (S Lbar - Lbar E Lbar - Lbar A) x - Lbar B u
///   eta      = eta_bar + Lbar x
/// Under output feedback, x is the Luenberger estimate xi.
struct ObserverOut {
  Vec eta_bar_dot;
  Vec eta;
};

ObserverOut reduced_observer_rhs(const Mat& S, const Mat& Lbar, const AgentPlant& p,
                                 const Vec& x_or_xi, double u, const Vec& eta_bar);

/// Reconstructed disturbance estimate eta = eta_bar + Lbar x.
Vec observer_estimate(const Mat& Lbar, const Vec& x_or_xi, const Vec& eta_bar);

/// u = K1 x + [rejection] K2 eta + K3 z. The gate reproduces staged
/// disturbance-rejection experiments; it defaults to on.
double state_feedback_control(const FeedbackGains& g, const Vec& x, const Vec& eta, double z,
                              bool rejection_enabled);

/// Luenberger state estimate: dxi = A xi + B u + Lhat (C xi - y).
Vec output_feedback_rhs(const FeedbackGains& g, const AgentPlant& p, double y_meas, double u,
                        const Vec& xi);

/// Real-time-gradient law:
///   u = -(C A^r / C A^(r-1) B) x + Kbar1 Xhat x + [rejection] Kbar2 eta + Kbar3 z.
/// eta is the reconstructed estimate eta_bar + Lbar x; the accompanying
/// generator replaces grad f(z) with grad f(y).
double realtime_gradient_control(const HighGainSet& hg, const Vec& x, const Vec& eta, double z,
                                 bool rejection_enabled);

}  // namespace ossr
