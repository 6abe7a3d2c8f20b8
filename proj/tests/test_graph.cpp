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


#include <algorithm>
#include <numeric>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>

#include "doctest.h"
#include "recwatch/graph.hpp"

using namespace recwatch;

namespace {

Graph Complete(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) e.emplace_back(u, v);
  }
  return Graph::FromEdges(n, e);
}

bool Connected(const Graph& g) {
  std::vector<char> seen(g.node_count(), 0);
  std::queue<NodeId> q;
  q.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count == g.node_count();
}

// Least-squares slope of log CCDF against log degree, for degrees >= xmin.
double RegressionExponent(const std::vector<std::size_t>& degrees,
                          std::size_t xmin) {
  std::vector<std::size_t> tail;
  for (auto d : degrees) {
    if (d >= xmin) tail.push_back(d);
  }
  std::sort(tail.begin(), tail.end());
  std::vector<double> xs, ys;
  const double n = static_cast<double>(tail.size());
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (i > 0 && tail[i] == tail[i - 1]) continue;
    const double ccdf = static_cast<double>(tail.size() - i) / n;
    xs.push_back(std::log(static_cast<double>(tail[i])));
    ys.push_back(std::log(ccdf));
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return 1.0 - sxy / sxx;
}

GlpParams Medium(std::uint64_t seed) {
  GlpParams p;
  p.target_nodes = 2000;
  p.initial_clique = 20;
  p.edges_per_step = 5;
  p.beta = -3.0;
  p.p_add_edges = PAddEdgesFor(2000, 15000, 5);
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("FromEdges merges duplicates and rejects bad edges") {
  const std::vector<Edge> e{{0, 1}, {1, 0}, {1, 2}};
  const Graph g = Graph::FromEdges(3, e);
  CHECK(g.edge_count() == 2);
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(0, 2));
  const std::vector<Edge> loop{{1, 1}};
  CHECK_THROWS_AS(Graph::FromEdges(3, loop), std::invalid_argument);
  const std::vector<Edge> out{{0, 3}};
  CHECK_THROWS_AS(Graph::FromEdges(3, out), std::invalid_argument);
}

TEST_CASE("clustering coefficient of small graphs") {
  CHECK(ClusteringCoefficient(Complete(3)) == doctest::Approx(1.0));
  const std::vector<Edge> star{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  CHECK(ClusteringCoefficient(Graph::FromEdges(5, star)) == 0.0);
  CHECK(ClusteringCoefficient(Graph()) == 0.0);
  // Triangle plus a pendant: (1/3 + 1 + 1 + 0) / 4.
  const std::vector<Edge> paw{{0, 1}, {1, 2}, {0, 2}, {0, 3}};
  CHECK(ClusteringCoefficient(Graph::FromEdges(4, paw)) ==
        doctest::Approx((1.0 / 3.0 + 2.0) / 4.0));
}

TEST_CASE("minimal GLP growth") {
  GlpParams p;
  p.target_nodes = 4;
  p.initial_clique = 3;
  p.edges_per_step = 1;
  p.beta = 0.0;
  p.p_add_edges = 0.2;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    p.seed = seed;
    const Graph g = GenerateGlp(p);
    CHECK(g.node_count() == 4);
    CHECK(g.edge_count() >= 4);
    CHECK(Connected(g));
  }
}

TEST_CASE("GLP parameter validation") {
  GlpParams p = Medium(1);
  p.target_nodes = p.initial_clique;
  CHECK_THROWS_AS(GenerateGlp(p), std::invalid_argument);
  p = Medium(1);
  p.initial_clique = 3;
  CHECK_THROWS_AS(GenerateGlp(p), std::invalid_argument);
  p = Medium(1);
  p.beta = -5.0;
  CHECK_THROWS_AS(GenerateGlp(p), std::invalid_argument);
  p = Medium(1);
  p.edges_per_step = 0;
  CHECK_THROWS_AS(GenerateGlp(p), std::invalid_argument);
  p = Medium(1);
  p.p_add_edges = 1.0;
  CHECK_THROWS_AS(GenerateGlp(p), std::invalid_argument);
}

TEST_CASE("GLP is deterministic, symmetric and within the edge envelope") {
  const Graph a = GenerateGlp(Medium(7));
  const Graph b = GenerateGlp(Medium(7));
  const Graph c = GenerateGlp(Medium(8));
  CHECK(a.edges() == b.edges());
  CHECK(a.edges() != c.edges());
  CHECK(a.node_count() == 2000);
  for (NodeId u = 0; u < a.node_count(); ++u) {
    const auto nb = a.neighbors(u);
    CHECK(std::is_sorted(nb.begin(), nb.end()));
    CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
    for (NodeId v : nb) {
      REQUIRE(v != u);
      REQUIRE(a.has_edge(v, u));
    }
  }
  const double m = 5.0, n = 2000.0;
  CHECK(a.edge_count() >= n * m * 0.5);
  CHECK(a.edge_count() <= n * (m + 2.0) * 2.0);
}

TEST_CASE("degree exponent of a medium GLP graph lies in (2, 3)") {
  const Graph g = GenerateGlp(Medium(3));
  const DegreeFit fit = FitPowerLaw(g);
  CHECK(fit.exponent_gamma > 2.0);
  CHECK(fit.exponent_gamma < 3.0);
  CHECK(fit.xmin >= 1);
  // Independent cross-check on the same tail.
  const double reg = RegressionExponent(g.degrees(), fit.xmin);
  CHECK(reg > 2.0);
  CHECK(reg < 3.0);
  CHECK(std::fabs(reg - fit.exponent_gamma) < 0.4);
}

TEST_CASE("power-law fit recovers a known exponent") {
  // Exact discrete power law p(k) ~ k^-2.5 for k >= 1, truncated where the
  // remaining mass is negligible.
  std::vector<double> w(1000000);
  for (std::size_t k = 1; k <= w.size(); ++k) w[k - 1] = std::pow(k, -2.5);
  std::discrete_distribution<std::size_t> law(w.begin(), w.end());
  std::mt19937_64 rng(2024);
  std::vector<std::size_t> sample(100000);
  for (auto& s : sample) s = law(rng) + 1;
  const DegreeFit fit = FitPowerLaw(sample);
  CHECK(fit.exponent_gamma == doctest::Approx(2.5).epsilon(0.02));
  CHECK(std::fabs(fit.exponent_gamma - 2.5) <= 0.05);
}

TEST_CASE("power-law fit rejects degenerate degree sequences") {
  std::vector<Edge> ring;
  const std::size_t n = 200;
  for (NodeId u = 0; u < n; ++u) {
    ring.emplace_back(u, (u + 1) % n);
    ring.emplace_back(u, (u + 2) % n);
  }
  const Graph g = Graph::FromEdges(n, ring);
  CHECK_THROWS_AS(FitPowerLaw(g), DegenerateDegreesError);
  CHECK_THROWS(FitPowerLaw(Complete(10)));  // too small
}

TEST_CASE("edge list output is sorted with a header") {
  const std::vector<Edge> e{{2, 1}, {0, 2}, {0, 1}};
  std::ostringstream out;
  WriteEdgeList(Graph::FromEdges(3, e), out);
  CHECK(out.str() == "# nodes=3 edges=3\n0 1\n0 2\n1 2\n");
}
