#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ossr/mat.hpp"
#include "ossr/plant.hpp"

namespace ossr {

enum class ControlLaw { StateFeedback, OutputFeedback, RealtimeGradient };

/// Solution of the two regulator-equation blocks
///   X1 S = A X1 + B U1 + E,  0 = C X1
///   0 = A X2 + B U2,         1 = C X2
/// with stored max-norm residuals.
struct RegulatorSolution {
  Mat X1;        // n x q
  Mat U1;        // 1 x q
  Mat X2;        // n x 1
  double U2 = 0.0;
  double residual_block1 = 0.0;
  double residual_block2 = 0.0;
};

RegulatorSolution solve_regulator_equations(const AgentPlant& p, const Mat& S);

/// Single-input pole placement (Ackermann): K with A + B K having the
/// requested self-conjugate spectrum. Placement is verified against the
/// computed eigenvalues.
Mat stabilizing_gain(const Mat& A, const Mat& B, const std::vector<Complex>& poles);

/// Gain L (q x m) making S - L Cobs Hurwitz. Single-row Cobs goes through
/// dual Ackermann; multi-row observation is assigned through a Sylvester
/// equation with retries over random right-hand sides, verified a posteriori.
Mat observer_gain(const Mat& Cobs, const Mat& S, const std::vector<Complex>& poles);

/// K2 = U1 - K1 X1, K3 = U2 - K1 X2.
std::pair<Mat, double> composite_gains(const RegulatorSolution& reg, const Mat& K1);

struct FeedbackGains {
  Mat K1;    // 1 x n
  Mat K2;    // 1 x q
  double K3 = 0.0;
  Mat Lbar;  // q x n
  Mat Lhat;  // n x 1
};

/// Gains of the real-time-gradient law: steady-state chain data from the
/// X1bar recursion, the eps-scaled feedback row, and the output-chain map.
struct HighGainSet {
  Mat Xbar1;         // r x q
  Mat Ubar1;         // 1 x q
  Vec Xbar2;         // length r, (1, 0, ..., 0)
  double Ubar2 = 0.0;
  Mat Kbar1;         // 1 x r
  Mat Kbar2;         // 1 x q
  double Kbar3 = 0.0;
  Mat Xhat;          // r x n, rows C A^(k-1)
  double eps = 0.1;
  Vec c;             // c_0 .. c_(r-1), s^r + sum c_k s^k Hurwitz
  // cached plant data used by the control law
  Mat CAr;           // 1 x n, C A^r
  double hf_gain = 0.0;  // C A^(r-1) B
};

HighGainSet high_gain_synthesis(const AgentPlant& p, const Mat& S, const Vec& c, double eps);

/// Companion matrix of s^r + c_(r-1) s^(r-1) + ... + c_0.
Mat companion(const Vec& c);

Vec default_k1_poles(std::size_t n);
Vec default_observer_poles(std::size_t q);

/// Everything the runtime needs for one agent. reg is always present; fb is
/// built for the state/output-feedback laws, hg for the real-time law. Lbar
/// is the disturbance-observer gain (empty when q = 0).
struct AgentGains {
  RegulatorSolution reg;
  std::optional<FeedbackGains> fb;
  std::optional<HighGainSet> hg;
  Mat Lbar;  // q x n
};

AgentGains synthesize_agent(const AgentPlant& p, const Mat& S, ControlLaw law,
                            const Vec& k1_poles, const Vec& lbar_poles, const Vec& lhat_poles,
                            const Vec& c, double eps);

}  // namespace ossr
