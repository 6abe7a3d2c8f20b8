// Copyright 2026 The recwatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RECWATCH_GRAPH_HPP_
#define RECWATCH_GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace recwatch {

using NodeId = std::uint32_t;

/// An undirected edge stored with `first < second`.
using Edge = std::pair<NodeId, NodeId>;

/// Immutable undirected simple graph over dense node ids [0, node_count).
///
/// Adjacency lists are sorted ascending. Construction rejects self-loops and
/// out-of-range ids; duplicate edges (in either orientation) are merged.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an arbitrary edge list. Throws std::invalid_argument
  /// on self-loops or ids >= node_count.
  static Graph FromEdges(std::size_t node_count, std::span<const Edge> edges);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  std::span<const NodeId> neighbors(NodeId u) const { return adjacency_[u]; }
  std::size_t degree(NodeId u) const { return adjacency_[u].size(); }
  bool has_edge(NodeId u, NodeId v) const;

  /// All edges as (min, max) pairs, lexicographically sorted.
  std::vector<Edge> edges() const;

  std::vector<std::size_t> degrees() const;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Parameters of the generalized linear preference (GLP) growth model.
struct GlpParams {
  std::size_t target_nodes = 8000;
  std::size_t initial_clique = 40;
  std::size_t edges_per_step = 8;
  double p_add_edges = 0.0857;
  double beta = -6.6;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the violated constraint.
  void Validate() const;
};

/// Grows a scale-free graph. Each step either (with probability
/// p_add_edges) links `edges_per_step` pairs of existing nodes, or adds a new
/// node with `edges_per_step` links. Endpoints are drawn with weight
/// degree + beta; collisions with existing edges are re-drawn.
Graph GenerateGlp(const GlpParams& params);

/// Chooses p_add_edges so that the expected edge count is close to
/// `target_edges` for the given node count and edges_per_step.
double PAddEdgesFor(std::size_t target_nodes, std::size_t target_edges,
                    std::size_t edges_per_step);

/// Mean local clustering coefficient; nodes of degree < 2 contribute 0.
double ClusteringCoefficient(const Graph& g);

struct DegreeFit {
  double exponent_gamma = 0.0;
  std::size_t xmin = 1;
  double ks_statistic = 0.0;
  std::size_t tail_size = 0;
};

class DegenerateDegreesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discrete maximum-likelihood power-law fit with xmin chosen by minimum
/// Kolmogorov-Smirnov distance. Zero values are ignored.
DegreeFit FitPowerLaw(std::span<const std::size_t> values);

/// Fits the degree sequence of `g`. Requires at least 100 nodes.
DegreeFit FitPowerLaw(const Graph& g);

/// Edge-list text format: `# nodes=<n> edges=<m>` header followed by sorted
/// `u v` lines with u < v.
void WriteEdgeList(const Graph& g, std::ostream& out);
void WriteEdgeList(const Graph& g, const std::string& path);

}  // namespace recwatch

#endif  // RECWATCH_GRAPH_HPP_
