#include "ossr/graph.hpp"

#include <cmath>
#include <tuple>

#include "ossr/errors.hpp"

namespace ossr {

SharingGraph SharingGraph::from_edges(
    std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
  SharingGraph g;
  g.n = n;
  g.weights = Mat(n, n);
  for (const auto& [i, j, w] : edges) {
    if (i >= n || j >= n) throw ScenarioError("graph edge endpoint out of range");
    if (i == j) throw ScenarioError("graph self-loop not allowed");
    if (w < 0.0) throw ScenarioError("graph edge weight must be nonnegative");
    g.weights(i, j) = w;
    g.weights(j, i) = w;
  }
  return g;
}

void SharingGraph::validate() const {
  if (weights.rows() != n || weights.cols() != n)
    throw ScenarioError("graph adjacency has wrong shape");
  for (std::size_t i = 0; i < n; ++i) {
    if (weights(i, i) != 0.0) throw ScenarioError("graph adjacency diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      if (weights(i, j) < 0.0) throw ScenarioError("graph weights must be nonnegative");
      if (weights(i, j) != weights(j, i)) throw ScenarioError("graph adjacency must be symmetric");
    }
  }
}

LaplacianBundle laplacian(const SharingGraph& g) {
  g.validate();
  const std::size_t n = g.n;
  LaplacianBundle b;
  b.L = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      b.L(i, j) = -g.weights(i, j);
      deg += g.weights(i, j);
    }
    b.L(i, i) = deg;
  }

  b.r.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));

  // Gram-Schmidt completion of {r}: sweep the coordinate basis, keep the
  // n-1 directions that survive projection, re-orthogonalize once.
  if (n == 0) return b;
  b.R = Mat(n, n - 1);
  std::vector<Vec> basis;
  basis.push_back(b.r);
  std::size_t col = 0;
  for (std::size_t i = 0; i < n && col < n - 1; ++i) {
    Vec v(n, 0.0);
    v[i] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& u : basis) {
        const double c = dot(u, v);
        for (std::size_t k = 0; k < n; ++k) v[k] -= c * u[k];
      }
    const double nv = norm2(v);
    if (nv > 1e-8) {
      for (std::size_t k = 0; k < n; ++k) v[k] /= nv;
      basis.push_back(v);
      for (std::size_t k = 0; k < n; ++k) b.R(k, col) = v[k];
      ++col;
    }
  }
  if (n > 0 && col != n - 1) throw Error("laplacian: failed to complete orthonormal basis");
  return b;
}

bool is_connected(const SharingGraph& g) {
  g.validate();
  if (g.n <= 1) return true;
  std::vector<bool> seen(g.n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < g.n; ++j) {
      if (!seen[j] && g.weights(i, j) > 0.0) {
        seen[j] = true;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == g.n;
}

}  // namespace ossr
