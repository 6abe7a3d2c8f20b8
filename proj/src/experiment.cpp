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
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "recwatch/experiment.hpp"
#include "recwatch/format.hpp"

namespace recwatch {

namespace {

// Seed streams derived from a replicate seed.
enum Stream : std::uint64_t {
  kGraphStream = 1,
  kPolicyStream = 2,
  kEngineStream = 3,
  kDetectStream = 4,
  kReplayStream = 5,
  kReporterStream = 6,
};

ProductCatalog CatalogOf(const ExperimentConfig& c) {
  ProductCatalog catalog;
  catalog.num_products = c.num_products;
  catalog.promoted_count = c.promoted_products;
  return catalog;
}

EngineOptions EngineOptionsOf(const ExperimentConfig& c) {
  EngineOptions o;
  o.reshare_owned = c.reshare_owned;
  o.detector_uniform_choice = c.detector_uniform_choice;
  return o;
}

std::optional<Graph> SharedGraph(const ExperimentConfig& c) {
  if (c.edge_file.empty()) return std::nullopt;
  return LoadGraph(c.edge_file).graph;
}

AggregateResult Aggregate(const std::vector<ExperimentResult>& results) {
  if (results.size() >= 2) return AggregateReplicates(results);
  const std::vector<ExperimentResult> twice{results.front(), results.front()};
  AggregateResult out = AggregateReplicates(twice);
  for (CurveSummary* c : {&out.pfp_empirical, &out.pfn_empirical,
                          &out.pfp_theoretic, &out.pfn_theoretic,
                          &out.market_share}) {
    c->replicates = 1;
  }
  out.r_censored = results.front().rounds_to_clean ? 0 : 1;
  return out;
}

CurveSummary AggregateAny(const std::vector<std::vector<double>>& curves) {
  if (curves.size() >= 2) return AggregateCurves(curves);
  CurveSummary out = AggregateCurves({curves.front(), curves.front()});
  out.replicates = 1;
  return out;
}

void Record(const DetectorState& state, const GroundTruth& truth,
            ExperimentResult& out) {
  out.pfp_empirical.push_back(EmpiricalPfp(state.suspicious(), truth));
  out.pfn_empirical.push_back(
      truth.k() == 0 ? 0.0 : EmpiricalPfn(state.suspicious(), truth));
  out.pfp_theoretic.push_back(state.pfp_theoretic());
  out.pfn_theoretic.push_back(state.pfn_theoretic());
  if (!out.rounds_to_clean &&
      IntersectionSize(truth.honest, state.suspicious()) == 0) {
    out.rounds_to_clean = state.round();
  }
}

const RoundObservation& ObservationOf(
    const std::vector<DetectorObservation>& all, NodeId detector) {
  for (const auto& o : all) {
    if (o.detector == detector) return o.observation;
  }
  throw std::logic_error("detector produced no observation");
}

std::function<TrustWeights(const DetectorState&)> WeightsOf(
    const ExperimentConfig& c) {
  if (c.trust == TrustStrategy::kSuspicion) return TrustWeightsDefault;
  const double w = c.trust_weight;
  return [w](const DetectorState& state) {
    TrustWeights out;
    for (NodeId v : state.neighbors()) out.emplace_hint(out.end(), v, w);
    return out;
  };
}

std::optional<std::uint32_t> FirstBelow(const std::vector<double>& curve,
                                        double level) {
  for (std::size_t t = 0; t < curve.size(); ++t) {
    if (curve[t] < level) return static_cast<std::uint32_t>(t);
  }
  return std::nullopt;
}

// Honest neighbors of the detector run their own baseline detection and
// share the result; dishonest neighbors claim every honest user of their
// neighborhood is suspicious.
class Reporters {
 public:
  Reporters(Simulation& sim, NodeId detector, const ExperimentConfig& c,
            std::uint64_t seed)
      : sim_(sim) {
    for (NodeId j : sim.neighbor_set(detector)) {
      if (sim.policy(j).dishonest()) continue;
      sim.RegisterDetector(j);
      honest_.push_back(j);
      states_.emplace_back(sim.neighbor_set(j), c.p, c.delta);
      rngs_.emplace_back(DeriveSeed(seed, j));
    }
  }

  void Step(const std::vector<DetectorObservation>& observations) {
    for (std::size_t i = 0; i < honest_.size(); ++i) {
      DetectRoundBaseline(states_[i], ObservationOf(observations, honest_[i]),
                          rngs_[i]);
    }
  }

  /// Stops tracking reporters that left the detector; their own
  /// neighborhood changed and they never report again.
  void Retire(const NodeSet& departed) {
    for (NodeId v : departed) {
      const auto it = std::lower_bound(honest_.begin(), honest_.end(), v);
      if (it == honest_.end() || *it != v) continue;
      const auto idx = it - honest_.begin();
      states_.erase(states_.begin() + idx);
      rngs_.erase(rngs_.begin() + idx);
      honest_.erase(it);
    }
  }

  /// Reports from the members of `current` neighbors that report at all.
  std::vector<NeighborReport> Reports(const NodeSet& current) const {
    std::vector<NeighborReport> out;
    for (NodeId j : current) {
      if (sim_.policy(j).dishonest()) {
        NodeSet nj = sim_.neighbor_set(j);
        NodeSet framed;
        for (NodeId v : nj) {
          if (!sim_.policy(v).dishonest()) framed.push_back(v);
        }
        out.push_back({j, std::move(nj), std::move(framed)});
        continue;
      }
      const auto it = std::lower_bound(honest_.begin(), honest_.end(), j);
      if (it == honest_.end() || *it != j) continue;  // fresh arrival
      const auto& state = states_[it - honest_.begin()];
      out.push_back({j, state.neighbors(), state.suspicious()});
    }
    return out;
  }

 private:
  Simulation& sim_;
  std::vector<NodeId> honest_;  // sorted, since neighbor_set is
  std::vector<DetectorState> states_;
  std::vector<Rng> rngs_;
};

}  // namespace

void ForEachReplicate(std::size_t n, std::size_t workers,
                      const std::function<void(std::size_t)>& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

Scenario MakeScenario(const ExperimentConfig& c, std::uint64_t seed,
                      const Graph* shared_graph) {
  Scenario s;
  if (shared_graph != nullptr) {
    s.graph = *shared_graph;
  } else {
    GlpParams gp = c.ResolvedGraph();
    gp.seed = DeriveSeed(seed, kGraphStream);
    s.graph = GenerateGlp(gp);
  }
  const std::size_t n = s.graph.node_count();
  Rng rng(DeriveSeed(seed, kPolicyStream));
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto k = static_cast<std::size_t>(
      std::llround(c.dishonest_fraction * static_cast<double>(n)));
  s.policies.assign(n, AgentPolicy::Honest());
  std::uniform_int_distribution<ProductId> promoted(
      0, static_cast<ProductId>(c.promoted_products - 1));
  for (std::size_t i = 0; i < k; ++i) {
    s.policies[ids[i]] = AgentPolicy::Dishonest(promoted(rng), c.delta);
  }

  std::vector<NodeId> candidates;
  for (NodeId u = 0; u < n; ++u) {
    if (s.policies[u].dishonest()) continue;
    std::size_t honest = 0, dishonest = 0;
    for (NodeId v : s.graph.neighbors(u)) {
      ++(s.policies[v].dishonest() ? dishonest : honest);
    }
    if (honest >= 2 && (dishonest >= 1 || k == 0)) candidates.push_back(u);
  }
  if (candidates.empty()) {
    throw std::runtime_error("no honest node qualifies as a detector");
  }
  s.detector = candidates[std::uniform_int_distribution<std::size_t>(
      0, candidates.size() - 1)(rng)];
  return s;
}

MarketShareOutcome RunMarketShare(const ExperimentConfig& c) {
  const auto shared = SharedGraph(c);
  std::vector<std::vector<double>> with(c.replicates), without(c.replicates);
  ForEachReplicate(c.replicates, c.workers, [&](std::size_t i) {
    const std::uint64_t seed = c.seed + i;
    Scenario s = MakeScenario(c, seed, shared ? &*shared : nullptr);
    const ValuationProfile valuations = ValuationProfile::Synthetic(CatalogOf(c));
    auto run = [&](std::vector<AgentPolicy> policies) {
      Simulation sim(s.graph, std::move(policies), valuations,
                     DeriveSeed(seed, kEngineStream), EngineOptionsOf(c));
      if (c.uniform_start) sim.SeedUniformOwnership();
      const std::size_t per_round = c.PurchasesPerRound(s.graph.node_count());
      std::size_t done = 0;
      while (done < c.total_purchases) {
        const std::size_t batch = std::min(per_round, c.total_purchases - done);
        sim.RunRound(batch);
        done += batch;
      }
      return MarketShare(sim.purchase_log(), c.num_products);
    };
    with[i] = run(s.policies);
    without[i] = run(std::vector<AgentPolicy>(s.graph.node_count(),
                                              AgentPolicy::Honest()));
  });
  return {AggregateAny(with), AggregateAny(without)};
}

DetectionOutcome RunDetection(const ExperimentConfig& c) {
  const auto shared = SharedGraph(c);
  DetectionOutcome out;
  out.replicates.resize(c.replicates);
  ForEachReplicate(c.replicates, c.workers, [&](std::size_t i) {
    const std::uint64_t seed = c.seed + i;
    Scenario s = MakeScenario(c, seed, shared ? &*shared : nullptr);
    Simulation sim(s.graph, s.policies,
                   ValuationProfile::Synthetic(CatalogOf(c)),
                   DeriveSeed(seed, kEngineStream), EngineOptionsOf(c));
    if (c.uniform_start) sim.SeedUniformOwnership();
    sim.RegisterDetector(s.detector);
    const NodeSet neighbors = sim.neighbor_set(s.detector);
    const GroundTruth truth = GroundTruth::Of(sim, neighbors);
    DetectorState state(neighbors, c.p, c.delta);
    Rng rng(DeriveSeed(seed, kDetectStream));
    ExperimentResult& res = out.replicates[i];
    Record(state, truth, res);
    const std::size_t per_round = c.PurchasesPerRound(s.graph.node_count());
    for (std::uint32_t t = 1; t <= c.rounds; ++t) {
      const auto obs = sim.RunRound(per_round);
      DetectRoundBaseline(state, ObservationOf(obs, s.detector), rng);
      Record(state, truth, res);
    }
    res.market_share = MarketShare(sim.purchase_log(), c.num_products);
  });
  out.aggregate = Aggregate(out.replicates);
  return out;
}

CooperativeOutcome RunCooperative(const ExperimentConfig& c) {
  const auto shared = SharedGraph(c);
  CooperativeOutcome out;
  out.baseline.resize(c.replicates);
  out.cooperative.resize(c.replicates);
  std::vector<std::uint8_t> dominates(c.replicates, 0);
  const auto weights = WeightsOf(c);
  ForEachReplicate(c.replicates, c.workers, [&](std::size_t i) {
    const std::uint64_t seed = c.seed + i;
    Scenario s = MakeScenario(c, seed, shared ? &*shared : nullptr);
    Simulation sim(s.graph, s.policies,
                   ValuationProfile::Synthetic(CatalogOf(c)),
                   DeriveSeed(seed, kEngineStream), EngineOptionsOf(c));
    if (c.uniform_start) sim.SeedUniformOwnership();
    sim.RegisterDetector(s.detector);
    Reporters reporters(sim, s.detector, c, DeriveSeed(seed, kReporterStream));
    const NodeSet neighbors = sim.neighbor_set(s.detector);
    const GroundTruth truth = GroundTruth::Of(sim, neighbors);
    DetectorState base(neighbors, c.p, c.delta), coop(neighbors, c.p, c.delta);
    // Same seed for both, so they see the same detectable rounds.
    Rng base_rng(DeriveSeed(seed, kDetectStream));
    Rng coop_rng(DeriveSeed(seed, kDetectStream));
    Record(base, truth, out.baseline[i]);
    Record(coop, truth, out.cooperative[i]);
    const std::size_t per_round = c.PurchasesPerRound(s.graph.node_count());
    for (std::uint32_t t = 1; t <= c.rounds; ++t) {
      const auto obs = sim.RunRound(per_round);
      reporters.Step(obs);
      const RoundObservation& mine = ObservationOf(obs, s.detector);
      DetectRoundBaseline(base, mine, base_rng);
      const auto reports = reporters.Reports(neighbors);
      DetectRoundCooperative(coop, mine, reports, coop_rng, weights);
      Record(base, truth, out.baseline[i]);
      Record(coop, truth, out.cooperative[i]);
    }
    const auto& b = out.baseline[i].pfp_theoretic;
    const auto& k = out.cooperative[i].pfp_theoretic;
    bool never_above = true;
    for (std::size_t t = 0; t < b.size(); ++t) never_above &= k[t] <= b[t];
    const auto fb = FirstBelow(b, 0.1), fk = FirstBelow(k, 0.1);
    const bool no_later = !fb || (fk && *fk <= *fb);
    dominates[i] = never_above && no_later;
  });
  out.dominates.assign(dominates.begin(), dominates.end());
  out.baseline_aggregate = Aggregate(out.baseline);
  out.cooperative_aggregate = Aggregate(out.cooperative);
  return out;
}

ChurnOutcome RunChurn(const ExperimentConfig& c) {
  const auto shared = SharedGraph(c);
  ChurnOutcome out;
  out.baseline.resize(c.replicates);
  out.cooperative.resize(c.replicates);
  std::vector<std::size_t> arrivals(c.replicates), departures(c.replicates);
  ForEachReplicate(c.replicates, c.workers, [&](std::size_t i) {
    const std::uint64_t seed = c.seed + i;
    Scenario s = MakeScenario(c, seed, shared ? &*shared : nullptr);
    Simulation sim(s.graph, s.policies,
                   ValuationProfile::Synthetic(CatalogOf(c)),
                   DeriveSeed(seed, kEngineStream), EngineOptionsOf(c));
    if (c.uniform_start) sim.SeedUniformOwnership();
    sim.RegisterDetector(s.detector);
    Reporters reporters(sim, s.detector, c, DeriveSeed(seed, kReporterStream));
    const NodeSet neighbors = sim.neighbor_set(s.detector);
    DetectorState base(neighbors, c.p, c.delta), coop(neighbors, c.p, c.delta);
    Rng base_rng(DeriveSeed(seed, kDetectStream));
    Rng coop_rng(DeriveSeed(seed, kDetectStream));
    Record(base, GroundTruth::Of(sim, neighbors), out.baseline[i]);
    Record(coop, GroundTruth::Of(sim, neighbors), out.cooperative[i]);
    const AgentPolicy newcomer = AgentPolicy::Dishonest(0, c.delta);
    const std::size_t per_round = c.PurchasesPerRound(s.graph.node_count());
    for (std::uint32_t t = 1; t <= c.rounds; ++t) {
      const auto obs = sim.RunRound(per_round);
      reporters.Step(obs);
      const RoundObservation& mine = ObservationOf(obs, s.detector);
      const auto reports = reporters.Reports(sim.neighbor_set(s.detector));
      const ChurnEvent churn =
          sim.ApplyChurn(s.detector, c.churn, c.dishonest_fraction, newcomer);
      arrivals[i] += churn.arrived.size();
      departures[i] += churn.departed.size();
      reporters.Retire(churn.departed);
      DetectRoundChurn(base, mine, nullptr, churn.arrived, churn.departed,
                       base_rng);
      DetectRoundChurn(coop, mine, &reports, churn.arrived, churn.departed,
                       coop_rng);
      Record(base, GroundTruth::Of(sim, base.neighbors()), out.baseline[i]);
      Record(coop, GroundTruth::Of(sim, coop.neighbors()), out.cooperative[i]);
    }
  });
  out.arrivals = std::accumulate(arrivals.begin(), arrivals.end(), std::size_t{0});
  out.departures =
      std::accumulate(departures.begin(), departures.end(), std::size_t{0});
  out.baseline_aggregate = Aggregate(out.baseline);
  out.cooperative_aggregate = Aggregate(out.cooperative);
  return out;
}

RDistributionOutcome RunRDistribution(const ExperimentConfig& c) {
  const auto shared = SharedGraph(c);
  const Scenario s = MakeScenario(c, c.seed, shared ? &*shared : nullptr);
  NodeSet neighbors;
  for (NodeId v : s.graph.neighbors(s.detector)) neighbors.push_back(v);
  std::sort(neighbors.begin(), neighbors.end());
  NodeSet honest;
  RDistributionOutcome out;
  out.neighbors = neighbors.size();
  for (NodeId v : neighbors) {
    if (s.policies[v].dishonest()) {
      ++out.dishonest;
    } else {
      honest.push_back(v);
    }
  }

  struct Tally {
    std::optional<std::uint32_t> r;
    std::vector<std::size_t> correct;  // per honest neighbor, trustworthy rounds
    std::size_t trustworthy = 0;
    std::size_t rounds = 0;
  };
  std::vector<Tally> tallies(c.replicates);
  ForEachReplicate(c.replicates, c.workers, [&](std::size_t i) {
    const std::uint64_t seed = c.seed + i;
    Simulation sim(s.graph, s.policies,
                   ValuationProfile::Synthetic(CatalogOf(c)),
                   DeriveSeed(seed, kEngineStream), EngineOptionsOf(c));
    if (c.uniform_start) sim.SeedUniformOwnership();
    sim.RegisterDetector(s.detector);
    DetectorState state(neighbors, c.p, c.delta);
    Rng rng(DeriveSeed(seed, kDetectStream));
    Tally& tally = tallies[i];
    tally.correct.assign(honest.size(), 0);
    const std::size_t per_round = c.PurchasesPerRound(s.graph.node_count());
    for (std::uint32_t t = 1; t <= c.round_cap; ++t) {
      const auto all = sim.RunRound(per_round);
      const RoundObservation& obs = ObservationOf(all, s.detector);
      ++tally.rounds;
      if (obs.product_type == 1) {
        ++tally.trustworthy;
        for (std::size_t h = 0; h < honest.size(); ++h) {
          tally.correct[h] += Contains(obs.correct, honest[h]);
        }
      }
      DetectRoundBaseline(state, obs, rng);
      if (IntersectionSize(honest, state.suspicious()) == 0) {
        tally.r = t;
        break;
      }
    }
  });

  std::vector<std::size_t> correct(honest.size(), 0);
  std::size_t trustworthy = 0, rounds = 0;
  double sum = 0.0;
  for (const Tally& t : tallies) {
    for (std::size_t h = 0; h < honest.size(); ++h) correct[h] += t.correct[h];
    trustworthy += t.trustworthy;
    rounds += t.rounds;
    if (t.r) {
      out.samples.push_back(*t.r);
      sum += *t.r;
    } else {
      ++out.censored;
    }
  }
  if (!out.samples.empty()) {
    out.empirical_mean = sum / static_cast<double>(out.samples.size());
    out.empirical_pmf = EmpiricalPmf(out.samples);
  }
  out.p_hc = trustworthy == 0 ? 0.0 : EstimatePhc(correct, trustworthy);
  out.p_d = c.p * static_cast<double>(trustworthy) / static_cast<double>(rounds);
  const EstimatorInputs inputs{out.p_hc, out.p_d, out.neighbors, out.dishonest,
                               c.delta};
  if (out.p_hc > 0.0 && out.p_d > 0.0) {
    out.closed_form_mean = ExpectedRounds(inputs);
    const std::uint32_t r_max =
        out.samples.empty()
            ? c.round_cap
            : *std::max_element(out.samples.begin(), out.samples.end());
    out.closed_form_pmf = RDistribution(inputs, r_max);
  } else {
    out.closed_form_mean = std::numeric_limits<double>::infinity();
  }
  return out;
}

ReplayOutcome RunReplay(const ExperimentConfig& c) {
  LoadedGraph graph;
  std::vector<RatingRecord> ratings;
  ReplayOutcome out;
  if (c.ratings_file.empty()) {
    SampleDataset sample = GenerateSample(c.sample);
    for (NodeId u = 0; u < sample.graph.node_count(); ++u) {
      graph.ids.Intern(std::to_string(u));
    }
    graph.graph = std::move(sample.graph);
    ratings = std::move(sample.ratings);
    out.detector = sample.detector;
  } else {
    graph = LoadGraph(c.replay_edge_file);
    ratings = LoadRatings(c.ratings_file);
  }
  const BinaryRatings data = Binarize(ratings, c.binarize_threshold);
  if (!c.detector.empty()) {
    out.detector = c.detector;
  } else if (out.detector.empty()) {
    std::size_t best = 0;
    for (NodeId u = 0; u < graph.graph.node_count(); ++u) {
      const std::size_t d = graph.graph.degree(u);
      if (d > best && data.users.Find(graph.ids.Name(u))) {
        best = d;
        out.detector = graph.ids.Name(u);
      }
    }
  }
  out.consensus_fraction = Consensus(data).fraction_above;

  ReplayConfig rc;
  rc.detector = out.detector;
  rc.dishonest_fraction = c.replay_dishonest_fraction;
  rc.promoted_item = c.promoted_item;
  rc.delta = c.delta;
  rc.p = c.p;
  out.replicates.resize(c.replicates);
  ForEachReplicate(c.replicates, c.workers, [&](std::size_t i) {
    Rng rng(DeriveSeed(c.seed + i, kReplayStream));
    out.replicates[i] = InjectAndReplay(graph, data, rc, rng);
  });

  std::vector<std::vector<double>> fp, fn, theo;
  for (const ReplayResult& r : out.replicates) {
    const bool no_dishonest = r.dishonest.empty();
    std::vector<double> a{1.0},
        b{no_dishonest ? std::numeric_limits<double>::quiet_NaN() : 0.0},
        t{1.0};
    for (const ReplayPoint& p : r.trajectory) {
      a.push_back(p.pfp_empirical);
      b.push_back(p.pfn_empirical);
      t.push_back(p.pfp_theoretic);
    }
    fp.push_back(std::move(a));
    fn.push_back(std::move(b));
    theo.push_back(std::move(t));
  }
  out.pfp_empirical = AggregateAny(fp);
  out.pfn_empirical = AggregateAny(fn);
  out.pfp_theoretic = AggregateAny(theo);
  return out;
}

std::string ArtifactName(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kMarketShare: return "fig2_market_share.csv";
    case ExperimentKind::kDetection: return "fig3_pfp_pfn.csv";
    case ExperimentKind::kCooperative: return "fig4_coop_pfp.csv";
    case ExperimentKind::kChurn: return "fig5_churn_pfp.csv";
    case ExperimentKind::kRDistribution: return "fig6_r_pmf.csv";
    case ExperimentKind::kReplay: return "fig7_dataset.csv";
  }
  return "unknown.csv";
}

namespace {

struct Column {
  std::string name;
  const std::vector<double>* values;
};

void WriteColumns(std::ostream& out, const std::string& index_name,
                  const std::vector<Column>& columns) {
  std::size_t rows = std::numeric_limits<std::size_t>::max();
  out << index_name;
  for (const auto& c : columns) {
    out << ',' << c.name;
    rows = std::min(rows, c.values->size());
  }
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    out << r;
    for (const auto& c : columns) out << ',' << FormatDouble((*c.values)[r]);
    out << '\n';
  }
}

void AddCurve(std::vector<Column>& cols, const std::string& name,
              const CurveSummary& s) {
  cols.push_back({name, &s.mean});
  cols.push_back({name + "_se", &s.std_error});
}

std::string Fmt(double v) { return FormatDouble(v); }

std::string Round(std::optional<std::uint32_t> r) {
  return r ? std::to_string(*r) : "never";
}

double MeanAbsGap(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) gap += std::fabs(a[i] - b[i]);
  return n == 0 ? 0.0 : gap / static_cast<double>(n);
}

}  // namespace

SummaryRows RunExperiment(const ExperimentConfig& c) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec || !fs::is_directory(c.output_dir)) {
    throw std::runtime_error("cannot create output directory " + c.output_dir);
  }
  const fs::path csv_path = fs::path(c.output_dir) / ArtifactName(c.kind);
  std::ostringstream csv;
  SummaryRows rows;
  rows.emplace_back("experiment", ToString(c.kind));
  rows.emplace_back("replicates", std::to_string(c.replicates));

  switch (c.kind) {
    case ExperimentKind::kMarketShare: {
      const auto r = RunMarketShare(c);
      csv << "product,share_with_dishonest,share_with_dishonest_se,"
             "share_without_dishonest,share_without_dishonest_se\n";
      for (std::size_t j = 0; j < r.with_dishonest.mean.size(); ++j) {
        csv << 'P' << (j + 1) << ',' << Fmt(r.with_dishonest.mean[j]) << ','
            << Fmt(r.with_dishonest.std_error[j]) << ','
            << Fmt(r.without_dishonest.mean[j]) << ','
            << Fmt(r.without_dishonest.std_error[j]) << '\n';
        rows.emplace_back("share P" + std::to_string(j + 1),
                          Fmt(r.with_dishonest.mean[j]) + " (without dishonest " +
                              Fmt(r.without_dishonest.mean[j]) + ")");
      }
      break;
    }
    case ExperimentKind::kDetection: {
      const auto r = RunDetection(c);
      const auto& a = r.aggregate;
      std::vector<Column> cols;
      AddCurve(cols, "pfp_empirical", a.pfp_empirical);
      AddCurve(cols, "pfp_theoretic", a.pfp_theoretic);
      AddCurve(cols, "pfn_empirical", a.pfn_empirical);
      AddCurve(cols, "pfn_theoretic", a.pfn_theoretic);
      WriteColumns(csv, "round", cols);
      rows.emplace_back("final pfp empirical", Fmt(a.pfp_empirical.mean.back()));
      rows.emplace_back("final pfp theoretic", Fmt(a.pfp_theoretic.mean.back()));
      rows.emplace_back("final pfn empirical", Fmt(a.pfn_empirical.mean.back()));
      rows.emplace_back("final pfn theoretic", Fmt(a.pfn_theoretic.mean.back()));
      rows.emplace_back("mean |pfp theoretic - empirical|",
                        Fmt(MeanAbsGap(a.pfp_theoretic.mean, a.pfp_empirical.mean)));
      rows.emplace_back("first round pfp empirical <= pfp_star",
                        Round(FirstBelow(a.pfp_empirical.mean,
                                         std::nextafter(c.pfp_star, 2.0))));
      rows.emplace_back("mean R (clean replicates)", Fmt(a.r_mean));
      rows.emplace_back("replicates never clean", std::to_string(a.r_censored));
      break;
    }
    case ExperimentKind::kCooperative:
    case ExperimentKind::kChurn: {
      const bool churn = c.kind == ExperimentKind::kChurn;
      CooperativeOutcome coop;
      ChurnOutcome ch;
      const AggregateResult* b;
      const AggregateResult* k;
      if (churn) {
        ch = RunChurn(c);
        b = &ch.baseline_aggregate;
        k = &ch.cooperative_aggregate;
      } else {
        coop = RunCooperative(c);
        b = &coop.baseline_aggregate;
        k = &coop.cooperative_aggregate;
      }
      std::vector<Column> cols;
      AddCurve(cols, "pfp_theoretic_baseline", b->pfp_theoretic);
      AddCurve(cols, "pfp_theoretic_cooperative", k->pfp_theoretic);
      AddCurve(cols, "pfp_empirical_baseline", b->pfp_empirical);
      AddCurve(cols, "pfp_empirical_cooperative", k->pfp_empirical);
      WriteColumns(csv, "round", cols);
      rows.emplace_back("final pfp theoretic baseline",
                        Fmt(b->pfp_theoretic.mean.back()));
      rows.emplace_back("final pfp theoretic cooperative",
                        Fmt(k->pfp_theoretic.mean.back()));
      const double level = churn ? c.pfp_star : 0.1;
      rows.emplace_back("first round pfp theoretic < " + Fmt(level) + " baseline",
                        Round(FirstBelow(b->pfp_theoretic.mean, level)));
      rows.emplace_back("first round pfp theoretic < " + Fmt(level) + " cooperative",
                        Round(FirstBelow(k->pfp_theoretic.mean, level)));
      if (churn) {
        rows.emplace_back("arrivals", std::to_string(ch.arrivals));
        rows.emplace_back("departures", std::to_string(ch.departures));
      } else {
        const auto wins = std::count(coop.dominates.begin(), coop.dominates.end(), true);
        rows.emplace_back("replicates where cooperative dominates",
                          std::to_string(wins) + "/" +
                              std::to_string(coop.dominates.size()));
      }
      break;
    }
    case ExperimentKind::kRDistribution: {
      const auto r = RunRDistribution(c);
      csv << "rounds,empirical_pmf,closed_form_pmf\n";
      for (std::size_t i = 0; i < r.closed_form_pmf.pmf.size(); ++i) {
        const auto it = r.empirical_pmf.find(static_cast<std::uint32_t>(i + 1));
        csv << (i + 1) << ','
            << Fmt(it == r.empirical_pmf.end() ? 0.0 : it->second) << ','
            << Fmt(r.closed_form_pmf.pmf[i]) << '\n';
      }
      rows.emplace_back("neighbors", std::to_string(r.neighbors));
      rows.emplace_back("dishonest neighbors", std::to_string(r.dishonest));
      rows.emplace_back("p_hc", Fmt(r.p_hc));
      rows.emplace_back("p_d", Fmt(r.p_d));
      rows.emplace_back("E[R] empirical", Fmt(r.empirical_mean));
      rows.emplace_back("E[R] closed form", Fmt(r.closed_form_mean));
      rows.emplace_back("relative gap",
                        Fmt(std::fabs(r.closed_form_mean - r.empirical_mean) /
                            r.empirical_mean));
      rows.emplace_back("censored replicates", std::to_string(r.censored));
      break;
    }
    case ExperimentKind::kReplay: {
      const auto r = RunReplay(c);
      std::vector<Column> cols;
      AddCurve(cols, "pfp_empirical", r.pfp_empirical);
      AddCurve(cols, "pfn_empirical", r.pfn_empirical);
      AddCurve(cols, "pfp_theoretic", r.pfp_theoretic);
      WriteColumns(csv, "round", cols);
      rows.emplace_back("detector", r.detector);
      rows.emplace_back("usable neighbors",
                        std::to_string(r.replicates.front().neighbors.size()));
      rows.emplace_back("items with agreement > 0.75", Fmt(r.consensus_fraction));
      const auto first = FirstBelow(r.pfp_empirical.mean, 0.1);
      rows.emplace_back("first round pfp empirical < 0.1", Round(first));
      if (first) {
        rows.emplace_back("pfn empirical at that round",
                          Fmt(r.pfn_empirical.mean[*first]));
      }
      rows.emplace_back("final pfp empirical", Fmt(r.pfp_empirical.mean.back()));
      rows.emplace_back("final pfn empirical", Fmt(r.pfn_empirical.mean.back()));
      break;
    }
  }

  {
    std::ofstream f(csv_path, std::ios::binary);
    f << csv.str();
    if (!f) throw std::runtime_error("cannot write " + csv_path.string());
  }
  {
    fs::path summary = csv_path;
    summary.replace_filename(csv_path.stem().string() + "_summary.csv");
    std::ofstream f(summary, std::ios::binary);
    f << "key,value\n";
    for (const auto& [key, value] : rows) f << key << ',' << value << '\n';
    if (!f) throw std::runtime_error("cannot write " + summary.string());
  }
  if (c.svg) {
    fs::path svg = csv_path;
    svg.replace_extension(".svg");
    RenderCsvChart(csv_path.string(), svg.string());
  }
  return rows;
}

void RenderCsvChart(const std::string& csv_path, const std::string& svg_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot read " + csv_path);
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
  };
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(csv_path + " is empty");
  const auto header = split(line);
  if (header.size() < 2) throw std::runtime_error(csv_path + " has no series");
  std::vector<std::string> x_labels;
  std::vector<std::vector<double>> values(header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(csv_path + ": ragged row '" + line + "'");
    }
    x_labels.push_back(fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      values[i].push_back(std::strtod(fields[i].c_str(), nullptr));
    }
  }
  std::vector<ChartSeries> series;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string& name = header[i];
    if (name.size() > 3 && name.compare(name.size() - 3, 3, "_se") == 0) continue;
    series.push_back({name, values[i]});
  }
  const std::string title = std::filesystem::path(csv_path).stem().string();
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + svg_path);
  bool numeric = !x_labels.empty();
  std::vector<double> x;
  for (const auto& label : x_labels) {
    char* end = nullptr;
    x.push_back(std::strtod(label.c_str(), &end));
    numeric &= end != label.c_str() && *end == '\0';
  }
  if (numeric) {
    WriteLineChartSvg(title, header[0], "value", x, series, out);
  } else {
    WriteBarChartSvg(title, "value", x_labels, series, out);
  }
}

}  // namespace recwatch
