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
#include <cmath>
#include <queue>
#include <sstream>

#include "doctest.h"
#include "recwatch/dataset.hpp"
#include "recwatch/detect.hpp"
#include "recwatch/experiment.hpp"
#include "recwatch/metrics.hpp"

using namespace recwatch;

namespace {

ExperimentConfig Small(std::uint64_t seed, double delta) {
  ExperimentConfig c;
  c.graph.target_nodes = 250;
  c.graph.initial_clique = 8;
  c.graph.edges_per_step = 4;
  c.graph.beta = -2.0;
  c.target_edges = 1500;
  c.dishonest_fraction = 0.1;
  c.delta = delta;
  c.seed = seed;
  return c;
}

const RoundObservation& Mine(const std::vector<DetectorObservation>& obs,
                             NodeId detector) {
  for (const auto& o : obs) {
    if (o.detector == detector) return o.observation;
  }
  throw std::logic_error("detector missing from round");
}

struct World {
  Scenario scenario;
  Simulation sim;

  explicit World(const ExperimentConfig& c)
      : scenario(MakeScenario(c, c.seed)),
        sim(scenario.graph, scenario.policies,
            ValuationProfile::Synthetic({c.num_products, c.promoted_products, {}}),
            DeriveSeed(c.seed, 3)) {
    sim.SeedUniformOwnership();
    sim.RegisterDetector(scenario.detector);
  }
};

bool IsConnected(const Graph& g) {
  std::vector<char> seen(g.node_count(), 0);
  std::queue<NodeId> q;
  q.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        q.push(v);
      }
    }
  }
  return reached == g.node_count();
}

}  // namespace

TEST_CASE("suspicious sets only shrink and estimates stay in range") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    for (double delta : {0.0, 0.1, 0.5}) {
      World w(Small(seed, delta));
      const NodeId d = w.scenario.detector;
      const NodeSet neighbors = w.sim.neighbor_set(d);
      const GroundTruth truth = GroundTruth::Of(w.sim, neighbors);
      DetectorState state(neighbors, 0.8, delta);
      Rng rng(seed);
      double last_pfp = 1.0;
      for (int t = 0; t < 25; ++t) {
        const NodeSet before = state.suspicious();
        DetectRoundBaseline(state, Mine(w.sim.RunRound(25), d), rng);
        REQUIRE(std::includes(before.begin(), before.end(),
                              state.suspicious().begin(), state.suspicious().end()));
        REQUIRE(state.pfp_theoretic() <= last_pfp);
        REQUIRE(state.pfp_theoretic() >= 0.0);
        REQUIRE(state.pfn_theoretic() >= 0.0);
        REQUIRE(state.pfn_theoretic() <= 1.0);
        last_pfp = state.pfp_theoretic();
        const double fp = EmpiricalPfp(state.suspicious(), truth);
        REQUIRE(fp >= 0.0);
        REQUIRE(fp <= 1.0);
        if (delta == 0.0) REQUIRE(EmpiricalPfn(state.suspicious(), truth) == 0.0);
      }
    }
  }
}

TEST_CASE("every neighbor is classified exactly once per round") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    World w(Small(seed, 0.1));
    const NodeSet neighbors = w.sim.neighbor_set(w.scenario.detector);
    for (int t = 0; t < 10; ++t) {
      const auto round = w.sim.RunRound(25);
      const auto& obs = Mine(round, w.scenario.detector);
      REQUIRE(obs.Partitions(neighbors));
      REQUIRE(obs.product < w.sim.num_products());
    }
    const auto share = MarketShare(w.sim.purchase_log(), w.sim.num_products());
    double total = 0.0;
    for (double s : share) total += s;
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("cooperation never raises the theoretic false positive rate") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    ExperimentConfig c = Small(seed, 0.1);
    c.kind = ExperimentKind::kCooperative;
    c.rounds = 20;
    c.replicates = 4;
    const auto out = RunCooperative(c);
    for (std::size_t i = 0; i < out.baseline.size(); ++i) {
      const auto& b = out.baseline[i].pfp_theoretic;
      const auto& k = out.cooperative[i].pfp_theoretic;
      REQUIRE(b.size() == k.size());
      for (std::size_t t = 0; t < b.size(); ++t) REQUIRE(k[t] <= b[t] + 1e-12);
    }
  }
}

TEST_CASE("churn without arrivals or departures reproduces the cooperative run") {
  ExperimentConfig c = Small(3, 0.1);
  c.rounds = 15;
  c.replicates = 3;
  c.churn = {};
  const auto coop = RunCooperative(c);
  const auto churn = RunChurn(c);
  CHECK(churn.arrivals == 0);
  CHECK(churn.departures == 0);
  for (std::size_t i = 0; i < coop.cooperative.size(); ++i) {
    CHECK(coop.cooperative[i].pfp_theoretic == churn.cooperative[i].pfp_theoretic);
    CHECK(coop.cooperative[i].pfp_empirical == churn.cooperative[i].pfp_empirical);
    CHECK(coop.baseline[i].pfp_theoretic == churn.baseline[i].pfp_theoretic);
  }
}

TEST_CASE("churn keeps the detector's view consistent with the graph") {
  ExperimentConfig c = Small(5, 0.1);
  c.rounds = 30;
  c.replicates = 3;
  c.churn.p_new_neighbor = 0.5;
  c.churn.p_leave = 0.05;
  const auto out = RunChurn(c);
  CHECK(out.arrivals > 0);
  CHECK(out.departures > 0);
  for (const auto& r : out.cooperative) {
    for (double v : r.pfp_theoretic) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
}

TEST_CASE("generated graphs are simple, symmetric and connected") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GlpParams p;
    p.target_nodes = 200 + 30 * seed;
    p.initial_clique = 3 + seed % 5;
    p.edges_per_step = 1 + seed % 3;
    p.beta = -0.5 * static_cast<double>(p.edges_per_step) + 0.3;
    p.p_add_edges = 0.1 * static_cast<double>(seed % 4);
    p.seed = seed;
    const Graph g = GenerateGlp(p);
    REQUIRE(g.node_count() == p.target_nodes);
    std::size_t stubs = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      const auto nb = g.neighbors(u);
      stubs += nb.size();
      REQUIRE(std::find(nb.begin(), nb.end(), u) == nb.end());
      for (NodeId v : nb) {
        const auto back = g.neighbors(v);
        REQUIRE(std::find(back.begin(), back.end(), u) != back.end());
      }
    }
    CHECK(stubs == 2 * g.edge_count());
    CHECK(IsConnected(g));
  }
}

TEST_CASE("replayed false positive rates never increase") {
  SampleParams params;
  params.users = 200;
  params.target_edges = 1500;
  params.items = 120;
  params.detector_ratings = 80;
  const auto sample = GenerateSample(params);
  std::ostringstream edges;
  WriteEdgeList(sample.graph, edges);
  std::istringstream in(edges.str());
  const LoadedGraph graph = LoadGraph(in);
  const BinaryRatings data = Binarize(sample.ratings);
  ReplayConfig cfg;
  cfg.detector = sample.detector;
  cfg.min_neighbors = 2;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const auto r = InjectAndReplay(graph, data, cfg, rng);
    double last_emp = 1.0, last_th = 1.0;
    for (const auto& pt : r.trajectory) {
      REQUIRE(pt.pfp_empirical <= last_emp);
      REQUIRE(pt.pfp_theoretic <= last_th);
      last_emp = pt.pfp_empirical;
      last_th = pt.pfp_theoretic;
    }
  }
}
