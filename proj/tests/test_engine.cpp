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


#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "recwatch/engine.hpp"

using namespace recwatch;

namespace {

ValuationProfile TwoProducts() {
  ProductCatalog c;
  c.num_products = 2;
  return ValuationProfile::Synthetic(c);
}

std::vector<AgentPolicy> AllHonest(std::size_t n) {
  return std::vector<AgentPolicy>(n, AgentPolicy::Honest());
}

Graph Star(std::size_t leaves) {
  std::vector<Edge> e;
  for (NodeId v = 1; v <= leaves; ++v) e.emplace_back(0, v);
  return Graph::FromEdges(leaves + 1, e);
}

// Fixed point of "emit once the strict majority of all neighbors has
// emitted", starting from `seeds`.
std::set<NodeId> MajorityClosure(const Graph& g, std::set<NodeId> emitted) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      if (emitted.count(u)) continue;
      std::size_t heard = 0;
      for (NodeId v : g.neighbors(u)) heard += emitted.count(v);
      if (2 * heard > g.degree(u)) {
        emitted.insert(u);
        changed = true;
      }
    }
  }
  return emitted;
}

GlpParams Small(std::size_t nodes, std::uint64_t seed) {
  GlpParams p;
  p.target_nodes = nodes;
  p.initial_clique = 6;
  p.edges_per_step = 3;
  p.beta = -1.0;
  p.p_add_edges = 0.2;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("cascade on a path stops at the first relay") {
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  Simulation sim(Graph::FromEdges(3, e), AllHonest(3), TwoProducts(), 1);
  sim.BeginRound();
  CHECK(sim.PropagateCascade(0, 1, Polarity::kPositive) == 1);
  CHECK(sim.positive_received(1, 1) == 1);
  CHECK(sim.positive_received(2, 1) == 0);
  CHECK_FALSE(sim.has_emitted(1, 1));
  CHECK_THROWS_AS(sim.PropagateCascade(0, 1, Polarity::kPositive),
                  std::logic_error);
}

TEST_CASE("cascade on a triangle emits once") {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
  Simulation sim(Graph::FromEdges(3, e), AllHonest(3), TwoProducts(), 1);
  sim.BeginRound();
  CHECK(sim.PropagateCascade(0, 1, Polarity::kNegative) == 1);
  CHECK(sim.emissions_this_round() == 1);
}

TEST_CASE("star center relays once the leaves agree") {
  const Graph g = Star(3);
  Simulation sim(g, AllHonest(4), TwoProducts(), 1);
  sim.BeginRound();
  for (NodeId leaf = 1; leaf <= 3; ++leaf) {
    if (!sim.has_emitted(leaf, 1)) sim.PropagateCascade(leaf, 1, Polarity::kPositive);
  }
  const auto expected = MajorityClosure(g, {1, 2, 3});
  for (NodeId u = 0; u < 4; ++u) {
    CHECK(sim.has_emitted(u, 1) == (expected.count(u) == 1));
  }
  CHECK(sim.has_emitted(0, 1));
  // Each node emitted exactly once.
  CHECK(sim.emissions_this_round() == 4);
}

TEST_CASE("cascades reach the majority fixed point on random graphs") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Graph g = GenerateGlp(Small(60, seed));
    Simulation sim(g, AllHonest(g.node_count()), TwoProducts(), seed);
    sim.BeginRound();
    Rng rng(seed);
    std::set<NodeId> origins;
    for (int i = 0; i < 25; ++i) {
      const NodeId u = std::uniform_int_distribution<NodeId>(0, 59)(rng);
      if (sim.has_emitted(u, 1)) continue;
      origins.insert(u);
      sim.PropagateCascade(u, 1, Polarity::kPositive);
    }
    const auto expected = MajorityClosure(g, origins);
    for (NodeId u = 0; u < g.node_count(); ++u) {
      REQUIRE(sim.has_emitted(u, 1) == (expected.count(u) == 1));
    }
    CHECK(sim.emissions_this_round() == expected.size());
  }
}

TEST_CASE("a round logs the purchases plus one per detector") {
  const Graph g = GenerateGlp(Small(100, 4));
  Simulation sim(g, AllHonest(100), ValuationProfile::Synthetic({}), 9);
  sim.RegisterDetector(5);
  const auto obs = sim.RunRound(10);
  CHECK(sim.purchase_log().size() == 11);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].detector == 5);
  CHECK(obs[0].observation.Partitions(sim.neighbor_set(5)));
  sim.RunRound(10);
  CHECK(sim.purchase_log().size() == 22);
  CHECK(sim.round_index() == 2);
}

TEST_CASE("all-honest markets only produce correct recommendations") {
  const Graph g = GenerateGlp(Small(200, 2));
  Simulation sim(g, AllHonest(200), ValuationProfile::Synthetic({}), 3);
  sim.SeedUniformOwnership();
  sim.RegisterDetector(0);
  sim.RegisterDetector(17);
  std::size_t classified = 0;
  for (int t = 0; t < 20; ++t) {
    for (const auto& [det, obs] : sim.RunRound(20)) {
      CHECK(obs.wrong.empty());
      classified += obs.correct.size();
    }
  }
  CHECK(classified > 0);
}

TEST_CASE("perfect attackers are always wrong on trustworthy purchases") {
  // 20-node fixture: a detector with four dishonest and six honest neighbors.
  std::vector<Edge> e;
  for (NodeId v = 1; v <= 10; ++v) e.emplace_back(0, v);
  for (NodeId v = 11; v < 20; ++v) {
    e.emplace_back(v, v - 10);
    e.emplace_back(v, (v - 9) % 10 + 1);
  }
  const Graph g = Graph::FromEdges(20, e);
  std::vector<AgentPolicy> policies = AllHonest(20);
  for (NodeId v : {1u, 2u, 3u, 4u}) policies[v] = AgentPolicy::Dishonest(0, 0.0);
  Simulation sim(g, policies, ValuationProfile::Synthetic({}), 11);
  sim.SeedUniformOwnership();
  sim.RegisterDetector(0);
  int trustworthy = 0;
  for (int t = 0; t < 200; ++t) {
    const auto obs = sim.RunRound(5)[0].observation;
    if (obs.product_type != 1) continue;
    ++trustworthy;
    for (NodeId v : {1u, 2u, 3u, 4u}) REQUIRE(Contains(obs.wrong, v));
  }
  CHECK(trustworthy > 50);
}

TEST_CASE("received counts equal the number of emitting neighbors") {
  const Graph g = GenerateGlp(Small(300, 6));
  std::vector<AgentPolicy> policies = AllHonest(300);
  for (NodeId v = 0; v < 300; v += 20) policies[v] = AgentPolicy::Dishonest(0, 0.1);
  Simulation sim(g, policies, ValuationProfile::Synthetic({}), 8);
  sim.SeedUniformOwnership();
  for (int t = 0; t < 3; ++t) {
    sim.RunRound(30);
    CHECK(sim.emissions_this_round() <= sim.node_count() * sim.num_products());
    for (NodeId u = 0; u < sim.node_count(); ++u) {
      for (ProductId j = 0; j < sim.num_products(); ++j) {
        std::uint32_t emitters = 0;
        for (NodeId v : sim.neighbors(u)) emitters += sim.has_emitted(v, j);
        REQUIRE(sim.positive_received(u, j) + sim.negative_received(u, j) ==
                emitters);
      }
    }
  }
}

TEST_CASE("simulation is deterministic for a fixed seed") {
  const Graph g = GenerateGlp(Small(300, 1));
  std::vector<AgentPolicy> policies = AllHonest(300);
  for (NodeId v = 0; v < 300; v += 15) policies[v] = AgentPolicy::Dishonest(0, 0.1);
  auto run = [&] {
    Simulation sim(g, policies, ValuationProfile::Synthetic({}), 77);
    sim.SeedUniformOwnership();
    sim.RegisterDetector(1);
    std::ostringstream log, observations;
    for (std::uint32_t t = 1; t <= 5; ++t) {
      WriteObservationCsv(t, sim.RunRound(30), observations, t == 1);
    }
    WritePurchaseLogCsv(sim.purchase_log(), log);
    return log.str() + observations.str();
  };
  const std::string a = run();
  CHECK(a == run());
  CHECK(a.rfind("round,buyer,product\n", 0) == 0);
}

TEST_CASE("churn at the detector") {
  const Graph g = GenerateGlp(Small(100, 3));
  Simulation sim(g, AllHonest(100), ValuationProfile::Synthetic({}), 5);
  sim.RegisterDetector(0);
  const AgentPolicy bad = AgentPolicy::Dishonest(0, 0.1);

  const ChurnEvent none = sim.ApplyChurn(0, {0.0, 0.0}, 0.1, bad);
  CHECK(none.arrived.empty());
  CHECK(none.departed.empty());

  std::size_t arrivals = 0;
  const int rounds = 10000;
  for (int t = 0; t < rounds; ++t) {
    const ChurnEvent ev = sim.ApplyChurn(0, {0.3, 0.0}, 0.1, bad);
    CHECK(IntersectionSize(ev.arrived, ev.departed) == 0);
    arrivals += ev.arrived.size();
  }
  CHECK(std::abs(static_cast<double>(arrivals) / rounds - 0.3) < 0.02);
  CHECK(sim.node_count() == 100 + arrivals);

  const NodeSet before = sim.neighbor_set(0);
  const ChurnEvent all = sim.ApplyChurn(0, {0.0, 1.0}, 0.1, bad);
  CHECK(all.departed == before);
  CHECK(sim.neighbor_set(0).empty());
  CHECK_THROWS_AS(sim.ApplyChurn(0, {1.5, 0.0}, 0.1, bad), std::invalid_argument);
}
