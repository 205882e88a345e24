#pragma once

#include <cstddef>

#include "ossr/mat.hpp"

namespace ossr {

/// One agent's linear dynamics xdot = A x + B u + E w, y = C x with scalar
/// input and output. E has q columns; q = 0 means no disturbance channel.
struct AgentPlant {
  Mat A;  // n x n
  Mat B;  // n x 1
  Mat C;  // 1 x n
  Mat E;  // n x q

  std::size_t n() const { return A.rows(); }
  std::size_t q() const { return E.cols(); }
  void validate() const;
};

/// Autonomous exosystem wdot = S w generating the disturbance.
struct DisturbanceModel {
  Mat S;   // q x q
  Vec w0;  // initial state when the disturbance is switched on

  std::size_t q() const { return S.rows(); }
};

Vec plant_rhs(const AgentPlant& p, const Vec& x, double u, const Vec& w);

/// Smallest k >= 1 with C A^(k-1) B != 0. Throws NoRelativeDegree when the
/// whole chain vanishes.
std::size_t relative_degree(const AgentPlant& p);

/// Kalman rank tests for controllability of (A,B) and observability of (C,A).
bool check_minimal(const AgentPlant& p);

/// Observability of the pair (E, S): E read as the measurement matrix mapping
/// the exosystem state into the plant, stack [E; ES; ...; ES^(q-1)] full rank.
/// This is the condition under which S - Lbar E can be made Hurwitz.
bool check_observable(const Mat& E, const Mat& S);

/// Rank of [A - lambda I, B; C, 0] equals n+1 at every eigenvalue of S and at
/// zero. Complex lambdas are handled through the real 2n+2 representation.
bool regulator_rank_check(const AgentPlant& p, const Mat& S);

/// Chain/zero-dynamics coordinates: chain_map rows are C A^(k-1) for k=1..r,
/// zero_map W is an orthonormal completion with W B = 0, and the stacked
/// transform [chain_map; W] is invertible. A0 governs the zero dynamics.
struct NormalForm {
  std::size_t r = 0;
  Mat chain_map;  // r x n
  Mat zero_map;   // (n-r) x n
  Mat A0;         // (n-r) x (n-r)
  Mat Bz;         // (n-r) x r, coupling from the chain states
  Mat Ez;         // (n-r) x q
};

NormalForm normal_form(const AgentPlant& p);

/// Zero dynamics Hurwitz (vacuously true when r = n).
bool is_minimum_phase(const AgentPlant& p);

}  // namespace ossr
