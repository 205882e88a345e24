#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ossr/control.hpp"
#include "ossr/costs.hpp"
#include "ossr/generator.hpp"
#include "ossr/graph.hpp"
#include "ossr/plant.hpp"
#include "ossr/synthesis.hpp"

namespace ossr {

struct AgentSpec {
  AgentPlant plant;
  DisturbanceModel dist;  // q = 0 when the agent has no disturbance channel
  LocalCost cost;
  std::optional<Vec> x0;
  std::optional<double> z0, lam0, v0;
  double disturb_from = 0.0;  // time the exosystem starts driving the plant
};

/// Closed-loop experiment description. 2-D output problems (the rendezvous
/// case) are expressed as `axes` independent scalar copies sharing graph,
/// plants and costs but drawing their own initial outputs.
struct Scenario {
  std::string name;
  SharingGraph graph;
  std::vector<AgentSpec> agents;

  ControlLaw law = ControlLaw::StateFeedback;
  double eps = 0.1;  // real-time law time-scale parameter
  Vec c;             // feedback polynomial coefficients; empty = (s+2)^r

  Vec poles_k1, poles_lbar, poles_lhat;  // empty = library defaults

  double t_end = 10.0;
  double dt = 1e-3;
  std::size_t decimate = 10;
  std::uint64_t seed = 1;
  std::size_t axes = 1;

  bool sample_initial_outputs = false;
  double y_range_lo = 0.0, y_range_hi = 0.0;
  bool resource_from_initial_output = false;

  double reject_time = 0.0;  // K2 term gated on from here

  void validate() const;
};

struct SynthesisReportEntry {
  std::size_t agent = 0;
  double reg_residual1 = 0.0;
  double reg_residual2 = 0.0;
  // label -> spectral abscissa of each synthesized closed-loop matrix
  std::vector<std::pair<std::string, double>> abscissas;
};

struct SynthesizedScenario {
  std::vector<AgentGains> gains;
  std::vector<SynthesisReportEntry> report;
  std::vector<std::string> notes;
};

SynthesizedScenario synthesize_scenario(const Scenario& s);

struct TrajectoryRecord {
  std::vector<double> times;
  std::size_t axes = 1;
  std::size_t n = 0;            // agents per axis
  std::size_t agents_flat = 0;  // axes * n; flat id = axis * n + agent
  // [sample][flat agent]
  std::vector<std::vector<double>> y, z, lam, u, eta_err;
  std::vector<double> v_mean_drift;  // per sample, max over axes
  Vec d_flat;                        // resource data in effect per flat agent
};

/// Fixed-step classical RK4 over the assembled closed loop. Event gates are
/// sampled at the start of each step (piecewise-constant switching). Throws
/// NonFiniteState on divergence.
TrajectoryRecord integrate(const Scenario& s, const SynthesizedScenario& syn);

struct RateFit {
  double slope = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (t, ln err) restricted to err in [lo, hi].
RateFit fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& err,
                             double lo, double hi);

struct Metrics {
  double tracking_error = 0.0;       // max_i |y_i - z_i|, final window
  double optimality_gap = 0.0;       // l2 of y - y* over all flat agents
  double max_abs_gap = 0.0;          // max_i |y_i - y*_i|
  double constraint_residual = 0.0;  // |sum y - sum d|, max over axes
  double grad_spread = 0.0;
  double v_mean_drift = 0.0;  // max over the whole run
  RateFit rate;
  Vec y_final;  // final-window mean per flat agent
  Vec y_star;   // oracle optimum per flat agent
  double theta = 0.0;
};

Metrics evaluate(const TrajectoryRecord& rec, const Scenario& s);

void write_csv(const TrajectoryRecord& rec, const std::string& path);
void write_metrics_json(const Metrics& m, const Scenario& s, double runtime_s,
                        const std::string& path);

}  // namespace ossr
