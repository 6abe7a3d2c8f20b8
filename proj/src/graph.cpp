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

#include "recwatch/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <unordered_set>

#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

namespace recwatch {

namespace {

std::uint64_t EdgeKey(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

}  // namespace

Graph Graph::FromEdges(std::size_t node_count, std::span<const Edge> edges) {
  Graph g;
  g.adjacency_.assign(node_count, {});
  for (const auto& [u, v] : edges) {
    if (u >= node_count || v >= node_count) {
      throw std::invalid_argument("edge (" + std::to_string(u) + ", " +
                                  std::to_string(v) +
                                  ") references a node outside [0, " +
                                  std::to_string(node_count) + ")");
    }
    if (u == v) {
      throw std::invalid_argument("self-loop at node " + std::to_string(u));
    }
    g.adjacency_[u].push_back(v);
    g.adjacency_[v].push_back(u);
  }
  std::size_t endpoints = 0;
  for (auto& nbrs : g.adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    nbrs.shrink_to_fit();
    endpoints += nbrs.size();
  }
  g.edge_count_ = endpoints / 2;
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= adjacency_.size() || v >= adjacency_.size()) return false;
  const auto& a = adjacency_[u];
  return std::binary_search(a.begin(), a.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> out(adjacency_.size());
  for (std::size_t u = 0; u < adjacency_.size(); ++u) {
    out[u] = adjacency_[u].size();
  }
  return out;
}

void GlpParams::Validate() const {
  if (edges_per_step < 1) {
    throw std::invalid_argument("edges_per_step must be >= 1");
  }
  if (initial_clique < edges_per_step) {
    throw std::invalid_argument("initial_clique must be >= edges_per_step");
  }
  if (initial_clique < 2) {
    throw std::invalid_argument("initial_clique must be >= 2");
  }
  if (target_nodes <= initial_clique) {
    throw std::invalid_argument("target_nodes must exceed initial_clique");
  }
  if (!(p_add_edges >= 0.0 && p_add_edges < 1.0)) {
    throw std::invalid_argument("p_add_edges must lie in [0, 1)");
  }
  // Reachable degrees never drop below min(edges_per_step, initial_clique - 1).
  const auto min_degree =
      static_cast<double>(std::min(edges_per_step, initial_clique - 1));
  if (!std::isfinite(beta) || !(beta > -min_degree)) {
    throw std::invalid_argument(
        "beta must be finite and > -min(edges_per_step, initial_clique - 1)");
  }
}

namespace {

// Degree-proportional sampler over a growing graph; weight(i) = deg(i) + beta.
class PreferentialSampler {
 public:
  PreferentialSampler(double beta, std::mt19937_64& rng)
      : beta_(beta), rng_(rng) {}

  void AddNode() { degree_.push_back(0); }

  void AddEdge(NodeId u, NodeId v) {
    endpoints_.push_back(u);
    endpoints_.push_back(v);
    ++degree_[u];
    ++degree_[v];
  }

  NodeId Draw() {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = degree_.size();
    if (beta_ >= 0.0) {
      const double stub_mass = static_cast<double>(endpoints_.size());
      const double total = stub_mass + beta_ * static_cast<double>(n);
      const double r = unit(rng_) * total;
      if (r < stub_mass) {
        return endpoints_[std::min<std::size_t>(static_cast<std::size_t>(r),
                                                endpoints_.size() - 1)];
      }
      std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
      return pick(rng_);
    }
    // Negative shift: thin a degree-proportional draw by (d + beta) / d.
    std::uniform_int_distribution<std::size_t> pick(0, endpoints_.size() - 1);
    for (;;) {
      const NodeId c = endpoints_[pick(rng_)];
      const double d = static_cast<double>(degree_[c]);
      if (unit(rng_) * d < d + beta_) return c;
    }
  }

  std::size_t degree(NodeId u) const { return degree_[u]; }
  std::size_t node_count() const { return degree_.size(); }
  std::size_t edge_count() const { return endpoints_.size() / 2; }

 private:
  double beta_;
  std::mt19937_64& rng_;
  std::vector<NodeId> endpoints_;
  std::vector<std::size_t> degree_;
};

}  // namespace

Graph GenerateGlp(const GlpParams& params) {
  params.Validate();
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PreferentialSampler sampler(params.beta, rng);

  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> present;
  edges.reserve(params.target_nodes * (params.edges_per_step + 2));
  present.reserve(edges.capacity() * 2);

  auto add = [&](NodeId u, NodeId v) {
    edges.emplace_back(std::min(u, v), std::max(u, v));
    present.insert(EdgeKey(u, v));
    sampler.AddEdge(u, v);
  };

  const auto m0 = static_cast<NodeId>(params.initial_clique);
  for (NodeId u = 0; u < m0; ++u) sampler.AddNode();
  for (NodeId u = 0; u < m0; ++u) {
    for (NodeId v = u + 1; v < m0; ++v) add(u, v);
  }

  const std::size_t m = params.edges_per_step;
  while (sampler.node_count() < params.target_nodes) {
    const std::size_t n = sampler.node_count();
    const std::size_t max_edges = n * (n - 1) / 2;
    const bool link_existing = unit(rng) < params.p_add_edges &&
                               sampler.edge_count() + m <= max_edges;
    if (link_existing) {
      for (std::size_t k = 0; k < m; ++k) {
        for (;;) {
          const NodeId a = sampler.Draw();
          const NodeId b = sampler.Draw();
          if (a != b && !present.contains(EdgeKey(a, b))) {
            add(a, b);
            break;
          }
        }
      }
    } else {
      const auto fresh = static_cast<NodeId>(n);
      std::vector<NodeId> targets;
      targets.reserve(m);
      while (targets.size() < m) {
        const NodeId t = sampler.Draw();
        if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
          targets.push_back(t);
        }
      }
      sampler.AddNode();
      for (NodeId t : targets) add(fresh, t);
    }
  }
  return Graph::FromEdges(params.target_nodes, edges);
}

double PAddEdgesFor(std::size_t target_nodes, std::size_t target_edges,
                    std::size_t edges_per_step) {
  // Expected edges ~= m * nodes / (1 - p).
  const double ratio = static_cast<double>(edges_per_step) *
                       static_cast<double>(target_nodes) /
                       static_cast<double>(target_edges);
  return std::clamp(1.0 - ratio, 0.0, 0.95);
}

double ClusteringCoefficient(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) return 0.0;
  std::vector<char> mark(n, 0);
  double sum = 0.0;
  for (NodeId u = 0; u < n; ++u) {
    const auto nbrs = g.neighbors(u);
    const std::size_t d = nbrs.size();
    if (d < 2) continue;
    for (NodeId v : nbrs) mark[v] = 1;
    std::size_t links = 0;
    for (NodeId v : nbrs) {
      for (NodeId w : g.neighbors(v)) {
        if (w > v && mark[w]) ++links;
      }
    }
    for (NodeId v : nbrs) mark[v] = 0;
    sum += 2.0 * static_cast<double>(links) /
           (static_cast<double>(d) * static_cast<double>(d - 1));
  }
  return sum / static_cast<double>(n);
}

namespace {

double HurwitzZeta(double s, double q) {
  gsl_sf_result result;
  const int status = gsl_sf_hzeta_e(s, q, &result);
  if (status != GSL_SUCCESS) return std::numeric_limits<double>::quiet_NaN();
  return result.val;
}

struct TailFit {
  double alpha;
  double ks;
};

// `counts` maps each distinct value >= xmin to its multiplicity.
TailFit FitTail(const std::map<std::size_t, std::size_t>& counts,
                std::size_t xmin, std::size_t tail_n, double sum_log) {
  const double n = static_cast<double>(tail_n);
  const double q = static_cast<double>(xmin);
  auto neg_log_lik = [&](double alpha) {
    return n * std::log(HurwitzZeta(alpha, q)) + alpha * sum_log;
  };
  const auto [alpha, unused] = boost::math::tools::brent_find_minima(
      neg_log_lik, 1.0001, 8.0, std::numeric_limits<double>::digits / 2);
  (void)unused;

  const double norm = HurwitzZeta(alpha, q);
  double cum = 0.0;
  double ks = 0.0;
  for (const auto& [value, count] : counts) {
    // Compare CDFs just below and at each support point.
    const double model_below =
        1.0 - HurwitzZeta(alpha, static_cast<double>(value)) / norm;
    ks = std::max(ks, std::abs(cum / n - model_below));
    cum += static_cast<double>(count);
    const double model_at =
        1.0 - HurwitzZeta(alpha, static_cast<double>(value) + 1.0) / norm;
    ks = std::max(ks, std::abs(cum / n - model_at));
  }
  return {alpha, ks};
}

}  // namespace

DegreeFit FitPowerLaw(std::span<const std::size_t> values) {
  gsl_set_error_handler_off();
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t v : values) {
    if (v > 0) ++counts[v];
  }
  if (counts.size() < 2) {
    throw DegenerateDegreesError(
        "degree sequence has fewer than two distinct positive values");
  }

  // Suffix sizes and log-sums let each candidate xmin be fitted in one pass
  // over its tail.
  std::vector<std::pair<std::size_t, std::size_t>> support(counts.begin(),
                                                           counts.end());
  const std::size_t k = support.size();
  std::vector<std::size_t> tail_n(k + 1, 0);
  std::vector<double> tail_log(k + 1, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    tail_n[i] = tail_n[i + 1] + support[i].second;
    tail_log[i] = tail_log[i + 1] + static_cast<double>(support[i].second) *
                                        std::log(static_cast<double>(support[i].first));
  }

  constexpr std::size_t kMinTail = 50;
  DegreeFit best;
  best.ks_statistic = std::numeric_limits<double>::infinity();
  std::map<std::size_t, std::size_t> tail(counts);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (tail_n[i] < kMinTail) break;
    const TailFit fit =
        FitTail(tail, support[i].first, tail_n[i], tail_log[i]);
    if (std::isfinite(fit.alpha) && fit.ks < best.ks_statistic) {
      best.exponent_gamma = fit.alpha;
      best.xmin = support[i].first;
      best.ks_statistic = fit.ks;
      best.tail_size = tail_n[i];
    }
    tail.erase(support[i].first);
  }
  if (!std::isfinite(best.ks_statistic)) {
    throw DegenerateDegreesError("no candidate xmin leaves a fittable tail");
  }
  return best;
}

DegreeFit FitPowerLaw(const Graph& g) {
  if (g.node_count() < 100) {
    throw std::invalid_argument("power-law fit needs at least 100 nodes");
  }
  const auto degs = g.degrees();
  return FitPowerLaw(degs);
}

void WriteEdgeList(const Graph& g, std::ostream& out) {
  out << "# nodes=" << g.node_count() << " edges=" << g.edge_count() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

void WriteEdgeList(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  WriteEdgeList(g, out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace recwatch
