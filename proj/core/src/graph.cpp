#include "kgcn/graph.hpp"

#include <cmath>

namespace kgcn {

void LabeledGraph::validate() const {
  std::size_t n = signals.rows();
  if (adjacency.rows() != n || adjacency.cols() != n) {
    throw Error(ErrorKind::Data, "graph/shape-mismatch",
                "adjacency " + std::to_string(adjacency.rows()) + "x" +
                    std::to_string(adjacency.cols()) + " for " +
                    std::to_string(n) + " signal rows");
  }
  if (!node_names.empty() && node_names.size() != n) {
    throw Error(ErrorKind::Data, "graph/shape-mismatch",
                std::to_string(node_names.size()) + " node names for " +
                    std::to_string(n) + " nodes");
  }
  signals.ensure_finite("graph signals");
  adjacency.ensure_finite("graph adjacency");
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency(i, j) < 0.0) {
        throw Error(ErrorKind::Data, "graph/negative-weight",
                    "adjacency(" + std::to_string(i) + "," +
                        std::to_string(j) + ") = " +
                        std::to_string(adjacency(i, j)));
      }
      sum += adjacency(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-10) {
      throw Error(ErrorKind::Data, "graph/not-stochastic",
                  "row " + std::to_string(i) + " sums to " +
                      std::to_string(sum));
    }
  }
  if (label < 0) {
    throw Error(ErrorKind::Data, "graph/bad-label",
                "negative label " + std::to_string(label));
  }
}

Matrix add_self_loops(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw Error(ErrorKind::Data, "graph/shape-mismatch",
                "adjacency must be square");
  }
  Matrix out = adjacency;
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += 1.0;
  return out;
}

Matrix row_normalize(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw Error(ErrorKind::Data, "graph/shape-mismatch",
                "adjacency must be square");
  }
  Matrix out(adjacency.rows(), adjacency.cols());
  for (std::size_t i = 0; i < adjacency.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < adjacency.cols(); ++j) {
      if (adjacency(i, j) < 0.0) {
        throw Error(ErrorKind::Data, "graph/negative-weight",
                    "adjacency(" + std::to_string(i) + "," +
                        std::to_string(j) + ") = " +
                        std::to_string(adjacency(i, j)));
      }
      sum += adjacency(i, j);
    }
    if (sum <= 0.0) {
      throw Error(ErrorKind::Data, "graph/isolated-node",
                  "row " + std::to_string(i) + " sums to zero");
    }
    for (std::size_t j = 0; j < adjacency.cols(); ++j) {
      out(i, j) = adjacency(i, j) / sum;
    }
  }
  return out;
}

Matrix hop_adjacency(const Matrix& adjacency, int hops) {
  if (adjacency.rows() != adjacency.cols()) {
    throw Error(ErrorKind::Data, "graph/shape-mismatch",
                "adjacency must be square");
  }
  if (hops < 1) {
    throw Error(ErrorKind::Data, "graph/bad-hop",
                "hop count " + std::to_string(hops) + " must be >= 1");
  }
  Matrix out = adjacency;
  for (int r = 1; r < hops; ++r) out = matmul(out, adjacency);
  return out;
}

std::vector<std::size_t> neighborhood(const Matrix& adjacency,
                                      std::size_t node, int hops) {
  if (node >= adjacency.rows()) {
    throw Error(ErrorKind::Data, "graph/bad-node",
                "node " + std::to_string(node) + " in a graph of " +
                    std::to_string(adjacency.rows()));
  }
  Matrix reach = hop_adjacency(adjacency, hops);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < reach.cols(); ++j) {
    if (reach(node, j) > 0.0) out.push_back(j);
  }
  return out;
}

LabeledGraph permute(const LabeledGraph& g,
                     const std::vector<std::size_t>& perm) {
  const std::size_t n = g.node_count();
  if (perm.size() != n) {
    throw Error(ErrorKind::Data, "graph/bad-permutation",
                std::to_string(perm.size()) + " indices for " +
                    std::to_string(n) + " nodes");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t idx : perm) {
    if (idx >= n || seen[idx]) {
      throw Error(ErrorKind::Data, "graph/bad-permutation",
                  "indices are not a permutation of 0.." +
                      std::to_string(n ? n - 1 : 0));
    }
    seen[idx] = true;
  }
  LabeledGraph out;
  out.label = g.label;
  out.signals = Matrix(n, g.signal_dim());
  out.adjacency = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < g.signal_dim(); ++d) {
      out.signals(i, d) = g.signals(perm[i], d);
    }
    for (std::size_t j = 0; j < n; ++j) {
      out.adjacency(i, j) = g.adjacency(perm[i], perm[j]);
    }
  }
  if (!g.node_names.empty()) {
    out.node_names.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.node_names[i] = g.node_names[perm[i]];
    }
  }
  return out;
}

}  // namespace kgcn
