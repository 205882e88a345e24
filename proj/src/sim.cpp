#include "ossr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "json.hpp"
#include "ossr/errors.hpp"

namespace ossr {

void Scenario::validate() const {
  graph.validate();
  if (graph.n == 0) throw ScenarioError("scenario: empty graph");
  if (agents.size() != graph.n) throw ScenarioError("scenario: agent count must match graph size");
  if (!(dt > 0.0)) throw ScenarioError("scenario: dt must be positive");
  if (!(t_end >= dt)) throw ScenarioError("scenario: t_end must be at least dt");
  if (decimate == 0) throw ScenarioError("scenario: decimate must be >= 1");
  if (axes == 0) throw ScenarioError("scenario: axes must be >= 1");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentSpec& a = agents[i];
    a.plant.validate();
    const std::size_t q = a.plant.q();
    if (a.dist.S.rows() != q || a.dist.S.cols() != q)
      throw ScenarioError("scenario: exosystem S shape must match E columns");
    if (a.dist.w0.size() != q) throw ScenarioError("scenario: w0 length must match E columns");
    if (a.x0 && a.x0->size() != a.plant.n())
      throw ScenarioError("scenario: x0 length must match plant order");
    if (!a.x0 && !sample_initial_outputs)
      throw ScenarioError("scenario: agent needs x0 or sampled initial outputs");
  }
  if (sample_initial_outputs && !(y_range_lo < y_range_hi))
    throw ScenarioError("scenario: initial output range must be nonempty");
  if (law == ControlLaw::RealtimeGradient) {
    if (!(eps > 0.0 && eps <= 1.0)) throw ScenarioError("scenario: eps must be in (0, 1]");
    if (dt > eps / 50.0 + 1e-15)
      throw ScenarioError("scenario: real-time law needs dt <= eps/50");
  }
}

SynthesizedScenario synthesize_scenario(const Scenario& s) {
  s.validate();
  SynthesizedScenario out;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const AgentSpec& a = s.agents[i];
    AgentGains g = synthesize_agent(a.plant, a.dist.S, s.law, s.poles_k1, s.poles_lbar,
                                    s.poles_lhat, s.c, s.eps);

    SynthesisReportEntry entry;
    entry.agent = i;
    entry.reg_residual1 = g.reg.residual_block1;
    entry.reg_residual2 = g.reg.residual_block2;
    if (g.fb) {
      entry.abscissas.emplace_back("A+B*K1", eigenvalues(a.plant.A + a.plant.B * g.fb->K1).abscissa);
      entry.abscissas.emplace_back("A+Lhat*C",
                                   eigenvalues(a.plant.A + g.fb->Lhat * a.plant.C).abscissa);
    }
    if (a.plant.q() > 0)
      entry.abscissas.emplace_back("S-Lbar*E",
                                   eigenvalues(a.dist.S - g.Lbar * a.plant.E).abscissa);
    if (g.hg)
      entry.abscissas.emplace_back("companion(c)", eigenvalues(companion(g.hg->c)).abscissa);
    for (const auto& [label, absc] : entry.abscissas)
      if (!(absc < 0.0))
        throw AssignmentFailure("synthesis produced a non-Hurwitz closed-loop matrix: " + label);
    out.report.push_back(std::move(entry));
    out.gains.push_back(std::move(g));
  }
  if (s.law == ControlLaw::RealtimeGradient)
    out.notes.push_back(
        "real-time law uses the reconstructed estimate eta = eta_bar + Lbar*x in the "
        "compensation term");
  return out;
}

namespace {

struct Slice {
  std::size_t x = 0;
  std::size_t xi = 0;  // valid only under output feedback
  std::size_t eta = 0;
  std::size_t w = 0;
  std::size_t gen = 0;  // z, lam, v
};

struct Layout {
  std::vector<Slice> slices;  // axis-major, axes * n entries
  std::size_t total = 0;
  bool has_xi = false;
};

Layout make_layout(const Scenario& s) {
  Layout lay;
  lay.has_xi = (s.law == ControlLaw::OutputFeedback);
  std::size_t off = 0;
  for (std::size_t a = 0; a < s.axes; ++a)
    for (const AgentSpec& ag : s.agents) {
      Slice sl;
      const std::size_t n = ag.plant.n(), q = ag.plant.q();
      sl.x = off;
      off += n;
      if (lay.has_xi) {
        sl.xi = off;
        off += n;
      }
      sl.eta = off;
      off += q;
      sl.w = off;
      off += q;
      sl.gen = off;
      off += 3;
      lay.slices.push_back(sl);
    }
  lay.total = off;
  return lay;
}

Vec slice_vec(const Vec& state, std::size_t off, std::size_t len) {
  return Vec(state.begin() + off, state.begin() + off + len);
}

struct StepGates {
  std::vector<bool> disturb;  // per agent
  bool reject = false;
};

// One agent's contribution to the global derivative. The agent sees its own
// slice plus the aggregated neighbor mismatches lam0, v0; it cannot read any
// other agent's state. d_eff is the axis-local resource datum.
void agent_derivative(const Scenario& s, const SynthesizedScenario& syn, std::size_t i,
                      const Vec& state, const Slice& sl, double lam0, double v0, double d_eff,
                      bool disturb_on, bool reject_on, Vec& deriv, double* u_out) {
  const AgentSpec& ag = s.agents[i];
  const AgentGains& g = syn.gains[i];
  const std::size_t n = ag.plant.n(), q = ag.plant.q();

  const Vec x = slice_vec(state, sl.x, n);
  const Vec eta_bar = slice_vec(state, sl.eta, q);
  const Vec w = slice_vec(state, sl.w, q);
  const double z = state[sl.gen];
  const double lam = state[sl.gen + 1];

  double y = 0.0;
  for (std::size_t j = 0; j < n; ++j) y += ag.plant.C(0, j) * x[j];

  const Vec obs_src = (s.law == ControlLaw::OutputFeedback) ? slice_vec(state, sl.xi, n) : x;
  const Vec eta = observer_estimate(g.Lbar, obs_src, eta_bar);

  double u = 0.0;
  switch (s.law) {
    case ControlLaw::StateFeedback:
      u = state_feedback_control(*g.fb, x, eta, z, reject_on);
      break;
    case ControlLaw::OutputFeedback:
      u = state_feedback_control(*g.fb, obs_src, eta, z, reject_on);
      break;
    case ControlLaw::RealtimeGradient:
      u = realtime_gradient_control(*g.hg, x, eta, z, reject_on);
      break;
  }
  if (u_out) *u_out = u;

  // plant
  const Vec dx = plant_rhs(ag.plant, x, u, disturb_on ? w : Vec(q, 0.0));
  for (std::size_t j = 0; j < n; ++j) deriv[sl.x + j] = dx[j];

  // Luenberger estimate
  if (s.law == ControlLaw::OutputFeedback) {
    const Vec dxi = output_feedback_rhs(*g.fb, ag.plant, y, u, obs_src);
    for (std::size_t j = 0; j < n; ++j) deriv[sl.xi + j] = dxi[j];
  }

  // disturbance observer
  if (q > 0) {
    const ObserverOut oo = reduced_observer_rhs(ag.dist.S, g.Lbar, ag.plant, obs_src, u, eta_bar);
    for (std::size_t j = 0; j < q; ++j) deriv[sl.eta + j] = oo.eta_bar_dot[j];
    // exosystem held at w0 until its gate opens
    if (disturb_on) {
      const Vec dw = ag.dist.S * w;
      for (std::size_t j = 0; j < q; ++j) deriv[sl.w + j] = dw[j];
    } else {
      for (std::size_t j = 0; j < q; ++j) deriv[sl.w + j] = 0.0;
    }
  }

  // embedded generator
  const double grad_arg = (s.law == ControlLaw::RealtimeGradient) ? y : z;
  deriv[sl.gen] = -ag.cost.grad(grad_arg) + lam;
  deriv[sl.gen + 1] = -lam0 - v0 + d_eff - z;
  deriv[sl.gen + 2] = lam0;
}

}  // namespace

TrajectoryRecord integrate(const Scenario& s, const SynthesizedScenario& syn) {
  s.validate();
  if (syn.gains.size() != s.agents.size()) throw Error("integrate: gains/agents mismatch");

  const std::size_t n = s.agents.size();
  const Layout lay = make_layout(s);

  // initial outputs and the resource data in effect
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> udist(s.y_range_lo, s.y_range_hi);
  Vec d_flat(s.axes * n);
  Vec state(lay.total, 0.0);
  for (std::size_t a = 0; a < s.axes; ++a)
    for (std::size_t i = 0; i < n; ++i) {
      const AgentSpec& ag = s.agents[i];
      const Slice& sl = lay.slices[a * n + i];
      Vec x0;
      if (s.sample_initial_outputs) {
        const double y0 = udist(rng);
        // minimum-norm state with C x = y0
        double cc = 0.0;
        for (std::size_t j = 0; j < ag.plant.n(); ++j) cc += ag.plant.C(0, j) * ag.plant.C(0, j);
        if (cc == 0.0) throw ScenarioError("integrate: C is zero, cannot seed output");
        x0.assign(ag.plant.n(), 0.0);
        for (std::size_t j = 0; j < ag.plant.n(); ++j) x0[j] = ag.plant.C(0, j) * y0 / cc;
      } else {
        x0 = *ag.x0;
      }
      for (std::size_t j = 0; j < ag.plant.n(); ++j) state[sl.x + j] = x0[j];
      // xi starts at zero; eta_bar starts at zero
      for (std::size_t j = 0; j < ag.plant.q(); ++j) state[sl.w + j] = ag.dist.w0[j];

      double y0_actual = 0.0;
      for (std::size_t j = 0; j < ag.plant.n(); ++j) y0_actual += ag.plant.C(0, j) * x0[j];
      const double d = s.resource_from_initial_output ? y0_actual : ag.cost.d;
      d_flat[a * n + i] = d;

      state[sl.gen] = ag.z0.value_or(d);
      state[sl.gen + 1] = ag.lam0.value_or(0.0);
      state[sl.gen + 2] = ag.v0.value_or(0.0);
    }

  const long steps = static_cast<long>(std::floor(s.t_end / s.dt + 1e-9));
  auto gate_step = [&](double t_gate) -> long {
    if (!(t_gate > 0.0)) return 0;
    if (t_gate > s.t_end) return steps + 1;
    return static_cast<long>(std::ceil(t_gate / s.dt - 1e-9));
  };
  std::vector<long> disturb_at(n);
  for (std::size_t i = 0; i < n; ++i) disturb_at[i] = gate_step(s.agents[i].disturb_from);
  const long reject_at = gate_step(s.reject_time);

  Vec v_mean0(s.axes, 0.0);
  for (std::size_t a = 0; a < s.axes; ++a) {
    for (std::size_t i = 0; i < n; ++i) v_mean0[a] += state[lay.slices[a * n + i].gen + 2];
    v_mean0[a] /= static_cast<double>(n);
  }

  auto rhs = [&](const Vec& st, long step_idx, Vec& deriv, std::vector<double>* u_probe) {
    const bool reject_on = step_idx >= reject_at;
    for (std::size_t a = 0; a < s.axes; ++a) {
      for (std::size_t i = 0; i < n; ++i) {
        const Slice& sl = lay.slices[a * n + i];
        // neighbor mismatch sums (the only cross-agent reads)
        double lam0 = 0.0, v0 = 0.0;
        const double lam_i = st[sl.gen + 1];
        const double v_i = st[sl.gen + 2];
        for (std::size_t j = 0; j < n; ++j) {
          const double w = s.graph.weights(i, j);
          if (w <= 0.0) continue;
          const Slice& sj = lay.slices[a * n + j];
          lam0 += w * (lam_i - st[sj.gen + 1]);
          v0 += w * (v_i - st[sj.gen + 2]);
        }
        double u = 0.0;
        agent_derivative(s, syn, i, st, sl, lam0, v0, d_flat[a * n + i],
                         step_idx >= disturb_at[i], reject_on, deriv, &u);
        if (u_probe) (*u_probe)[a * n + i] = u;
      }
    }
  };

  TrajectoryRecord rec;
  rec.axes = s.axes;
  rec.n = n;
  rec.agents_flat = s.axes * n;
  rec.d_flat = d_flat;

  auto record = [&](long step_idx, const Vec& st) {
    std::vector<double> u_now(rec.agents_flat, 0.0);
    Vec scratch(lay.total, 0.0);
    rhs(st, step_idx, scratch, &u_now);

    rec.times.push_back(static_cast<double>(step_idx) * s.dt);
    std::vector<double> yrow(rec.agents_flat), zrow(rec.agents_flat), lrow(rec.agents_flat),
        erow(rec.agents_flat);
    double drift = 0.0;
    for (std::size_t a = 0; a < s.axes; ++a) {
      double v_mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const AgentSpec& ag = s.agents[i];
        const Slice& sl = lay.slices[a * n + i];
        const std::size_t flat = a * n + i;
        double y = 0.0;
        for (std::size_t j = 0; j < ag.plant.n(); ++j)
          y += ag.plant.C(0, j) * st[sl.x + j];
        yrow[flat] = y;
        zrow[flat] = st[sl.gen];
        lrow[flat] = st[sl.gen + 1];
        v_mean += st[sl.gen + 2];

        const std::size_t q = ag.plant.q();
        const Vec obs_src =
            (s.law == ControlLaw::OutputFeedback) ? slice_vec(st, sl.xi, ag.plant.n())
                                                  : slice_vec(st, sl.x, ag.plant.n());
        const Vec eta = observer_estimate(syn.gains[i].Lbar, obs_src, slice_vec(st, sl.eta, q));
        double err2 = 0.0;
        const bool disturb_on = step_idx >= disturb_at[i];
        for (std::size_t j = 0; j < q; ++j) {
          const double w_eff = disturb_on ? st[sl.w + j] : 0.0;
          err2 += (eta[j] - w_eff) * (eta[j] - w_eff);
        }
        erow[flat] = std::sqrt(err2);
      }
      v_mean /= static_cast<double>(n);
      drift = std::max(drift, std::abs(v_mean - v_mean0[a]));
    }
    rec.y.push_back(std::move(yrow));
    rec.z.push_back(std::move(zrow));
    rec.lam.push_back(std::move(lrow));
    rec.u.push_back(std::move(u_now));
    rec.eta_err.push_back(std::move(erow));
    rec.v_mean_drift.push_back(drift);
  };

  record(0, state);

  Vec k1(lay.total), k2(lay.total), k3(lay.total), k4(lay.total), tmp(lay.total);
  for (long k = 0; k < steps; ++k) {
    rhs(state, k, k1, nullptr);
    for (std::size_t j = 0; j < lay.total; ++j) tmp[j] = state[j] + 0.5 * s.dt * k1[j];
    rhs(tmp, k, k2, nullptr);
    for (std::size_t j = 0; j < lay.total; ++j) tmp[j] = state[j] + 0.5 * s.dt * k2[j];
    rhs(tmp, k, k3, nullptr);
    for (std::size_t j = 0; j < lay.total; ++j) tmp[j] = state[j] + s.dt * k3[j];
    rhs(tmp, k, k4, nullptr);
    for (std::size_t j = 0; j < lay.total; ++j)
      state[j] += s.dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

    double mx = 0.0;
    for (double v : state) mx = std::max(mx, std::abs(v));
    if (!(mx < 1e12) || !std::isfinite(mx)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "integrate: non-finite state at t=%.6f",
                    static_cast<double>(k + 1) * s.dt);
      throw NonFiniteState(buf);
    }
    if ((k + 1) % static_cast<long>(s.decimate) == 0) record(k + 1, state);
  }
  return rec;
}

RateFit fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& err,
                             double lo, double hi) {
  RateFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t m = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(err[k] >= lo && err[k] <= hi) || err[k] <= 0.0) continue;
    const double x = t[k], y = std::log(err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++m;
  }
  fit.points = m;
  if (m < 3) return fit;
  const double dm = static_cast<double>(m);
  const double denom = dm * sxx - sx * sx;
  if (denom == 0.0) return fit;
  fit.slope = (dm * sxy - sx * sy) / denom;
  const double ss_tot = syy - sy * sy / dm;
  const double ss_res = ss_tot - fit.slope * (sxy - sx * sy / dm);
  fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

Metrics evaluate(const TrajectoryRecord& rec, const Scenario& s) {
  if (rec.times.empty()) throw Error("evaluate: empty record");
  Metrics m;
  const std::size_t n = rec.n;

  // oracle per axis
  m.y_star.resize(rec.agents_flat);
  for (std::size_t a = 0; a < rec.axes; ++a) {
    AllocationProblem p;
    for (std::size_t i = 0; i < n; ++i) {
      LocalCost c = s.agents[i].cost;
      c.d = rec.d_flat[a * n + i];
      p.costs.push_back(c);
    }
    const AllocationSolution sol = solve_allocation_oracle(p);
    for (std::size_t i = 0; i < n; ++i) m.y_star[a * n + i] = sol.y[i];
    if (a == 0) m.theta = sol.theta;
  }

  // optimality-gap series for the rate fit
  std::vector<double> gap_series(rec.times.size());
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    double g2 = 0.0;
    for (std::size_t f = 0; f < rec.agents_flat; ++f) {
      const double e = rec.y[k][f] - m.y_star[f];
      g2 += e * e;
    }
    gap_series[k] = std::sqrt(g2);
  }
  m.rate = fit_exponential_rate(rec.times, gap_series, 1e-6, 1e-2);

  const std::size_t window = std::max<std::size_t>(1, rec.times.size() / 20);
  const std::size_t first = rec.times.size() - window;

  m.y_final.assign(rec.agents_flat, 0.0);
  double track = 0.0, gap = 0.0, maxgap = 0.0, cres = 0.0, gspread = 0.0;
  for (std::size_t k = first; k < rec.times.size(); ++k) {
    double tr = 0.0;
    for (std::size_t f = 0; f < rec.agents_flat; ++f) {
      tr = std::max(tr, std::abs(rec.y[k][f] - rec.z[k][f]));
      m.y_final[f] += rec.y[k][f];
    }
    track += tr;
    gap += gap_series[k];
    double mg = 0.0;
    for (std::size_t f = 0; f < rec.agents_flat; ++f)
      mg = std::max(mg, std::abs(rec.y[k][f] - m.y_star[f]));
    maxgap += mg;

    double cr = 0.0, gs = 0.0;
    for (std::size_t a = 0; a < rec.axes; ++a) {
      AllocationProblem p;
      Vec ya(n);
      for (std::size_t i = 0; i < n; ++i) {
        LocalCost c = s.agents[i].cost;
        c.d = rec.d_flat[a * n + i];
        p.costs.push_back(c);
        ya[i] = rec.y[k][a * n + i];
      }
      const KktCertificate cert = kkt_check(ya, p);
      cr = std::max(cr, cert.constraint_residual);
      gs = std::max(gs, cert.grad_spread);
    }
    cres += cr;
    gspread += gs;
  }
  const double wd = static_cast<double>(window);
  m.tracking_error = track / wd;
  m.optimality_gap = gap / wd;
  m.max_abs_gap = maxgap / wd;
  m.constraint_residual = cres / wd;
  m.grad_spread = gspread / wd;
  for (double& v : m.y_final) v /= wd;

  m.v_mean_drift = 0.0;
  for (double v : rec.v_mean_drift) m.v_mean_drift = std::max(m.v_mean_drift, v);
  return m;
}

void write_csv(const TrajectoryRecord& rec, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error("write_csv: cannot open " + path);
  std::fputs("t,agent,y,z,lambda,u,eta_err\n", f);
  for (std::size_t k = 0; k < rec.times.size(); ++k)
    for (std::size_t a = 0; a < rec.agents_flat; ++a)
      std::fprintf(f, "%.10e,%zu,%.10e,%.10e,%.10e,%.10e,%.10e\n", rec.times[k], a + 1,
                   rec.y[k][a], rec.z[k][a], rec.lam[k][a], rec.u[k][a], rec.eta_err[k][a]);
  std::fclose(f);
}

void write_metrics_json(const Metrics& m, const Scenario& s, double runtime_s,
                        const std::string& path) {
  nlohmann::json j;
  j["scenario"] = s.name;
  j["tracking_error"] = m.tracking_error;
  j["optimality_gap"] = m.optimality_gap;
  j["max_abs_gap"] = m.max_abs_gap;
  j["constraint_residual"] = m.constraint_residual;
  j["grad_spread"] = m.grad_spread;
  j["v_mean_drift"] = m.v_mean_drift;
  j["rate"] = {{"slope", m.rate.slope}, {"r2", m.rate.r2}, {"points", m.rate.points}};
  j["y_final"] = m.y_final;
  j["y_star"] = m.y_star;
  j["theta"] = m.theta;
  j["runtime_s"] = runtime_s;
  std::ofstream out(path);
  if (!out) throw Error("write_metrics_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace ossr
