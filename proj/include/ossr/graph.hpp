#pragma once

#include <cstddef>
#include <tuple>
#include <vector>

#include "ossr/mat.hpp"

namespace ossr {

/// Undirected weighted information-sharing graph: symmetric nonnegative
/// adjacency with zero diagonal.
struct SharingGraph {
  std::size_t n = 0;
  Mat weights;  // n x n

  // edges are (i, j, w) with 0-based endpoints
  static SharingGraph from_edges(std::size_t n,
                                 const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges);
  void validate() const;
};

/// Laplacian together with the unit all-ones direction r and an orthonormal
/// basis R of its complement (R^T r = 0, R^T R = I).
struct LaplacianBundle {
  Mat L;  // n x n
  Vec r;  // length n
  Mat R;  // n x (n-1)
};

LaplacianBundle laplacian(const SharingGraph& g);

/// Breadth-first reachability over positive weights.
bool is_connected(const SharingGraph& g);

}  // namespace ossr
