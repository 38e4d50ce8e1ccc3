#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kgcn/numcore.hpp"

namespace kgcn {

/// Node-attributed graph with a class label. `signals` is n x D (one row per
/// node), `adjacency` is n x n, nonnegative and row-stochastic.
struct LabeledGraph {
  Matrix signals;
  Matrix adjacency;
  int label = 0;
  std::vector<std::string> node_names;

  std::size_t node_count() const { return signals.rows(); }
  std::size_t signal_dim() const { return signals.cols(); }

  /// Checks shape consistency, finiteness, nonnegativity and unit row sums
  /// (within 1e-10).
  void validate() const;
};

/// Adds 1.0 to every diagonal entry of a raw (unnormalized) edge matrix.
Matrix add_self_loops(const Matrix& adjacency);

/// Scales each row to sum to one. A row that sums to zero raises
/// "graph/isolated-node" since averaging over an empty neighborhood is
/// undefined.
Matrix row_normalize(const Matrix& adjacency);

/// Matrix power A^r for r >= 1. Row-stochastic input stays row-stochastic.
Matrix hop_adjacency(const Matrix& adjacency, int hops);

/// Sorted node indices u' with (A^r)[node, u'] > 0.
std::vector<std::size_t> neighborhood(const Matrix& adjacency,
                                      std::size_t node, int hops);

/// Relabels nodes: new index i holds what old index perm[i] held. perm must
/// be a permutation of 0..n-1.
LabeledGraph permute(const LabeledGraph& g,
                     const std::vector<std::size_t>& perm);

}  // namespace kgcn
