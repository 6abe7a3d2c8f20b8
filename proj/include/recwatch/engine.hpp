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


#ifndef RECWATCH_ENGINE_HPP_
#define RECWATCH_ENGINE_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "recwatch/graph.hpp"
#include "recwatch/market.hpp"
#include "recwatch/observation.hpp"
#include "recwatch/rng.hpp"

namespace recwatch {

struct ChurnModel {
  double p_new_neighbor = 0.0;  // at most one arrival per round
  double p_leave = 0.0;         // per existing neighbor per round

  void Validate() const;
};

struct ChurnEvent {
  NodeSet arrived;   // NU(t)
  NodeSet departed;  // L(t)
};

struct PurchaseRecord {
  std::uint32_t round = 0;
  NodeId buyer = 0;
  ProductId product = 0;
};

struct DetectorObservation {
  NodeId detector = 0;
  RoundObservation observation;
};

struct EngineOptions {
  /// Owners of a product restate their valuation of it at the start of every
  /// round, before any purchase.
  bool reshare_owned = true;
  /// Detectors pick uniformly at random instead of following carried counts.
  bool detector_uniform_choice = false;
};

/// Round-based market simulation over a social graph.
///
/// Each round clears the received counts and emission flags, lets every
/// dishonest user broadcast its strategy on every product, lets owners
/// restate their valuations, then executes the purchases. Every emission runs
/// a breadth-first majority-rule cascade to quiescence before the next one.
/// Registered detectors buy exactly once per round at a random slot and get
/// a classification of every neighbor's latest recommendation on the product
/// they bought. A detector picks its product from the effective counts it
/// held at the end of the previous round, so the choice does not depend on
/// the recommendations it is about to classify.
///
/// The social graph is copied into a mutable ego-network so churn can attach
/// fresh leaves to a detector or drop its links; the source Graph is untouched.
class Simulation {
 public:
  Simulation(const Graph& graph, std::vector<AgentPolicy> policies,
             ValuationProfile valuations, std::uint64_t seed,
             EngineOptions options = {});

  void RegisterDetector(NodeId node);

  /// Gives every honest user one product drawn uniformly, so the market
  /// starts with equal shares instead of no purchases at all. Not logged as
  /// purchases.
  void SeedUniformOwnership();

  /// One round: `purchases` buys by honest non-detector users sampled
  /// uniformly, plus one buy per registered detector.
  std::vector<DetectorObservation> RunRound(std::size_t purchases);

  /// Emits `polarity` on `product` from `origin` and runs the cascade to
  /// quiescence. Returns the number of emissions, origin included. Throws
  /// std::logic_error if origin already emitted on `product` this round.
  std::size_t PropagateCascade(NodeId origin, ProductId product,
                               Polarity polarity);

  /// Draws NU(t) and L(t) for `detector` and applies them to the ego-network.
  /// Fresh arrivals are dishonest with probability `dishonest_fraction`.
  ChurnEvent ApplyChurn(NodeId detector, const ChurnModel& model,
                        double dishonest_fraction,
                        const AgentPolicy& dishonest_policy);

  /// Clears per-round counters and flags; RunRound calls this itself.
  void BeginRound();

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t num_products() const { return num_products_; }
  std::span<const NodeId> neighbors(NodeId u) const { return adjacency_[u]; }
  NodeSet neighbor_set(NodeId u) const;
  const AgentPolicy& policy(NodeId u) const { return policies_[u]; }
  const ValuationProfile& valuations() const { return valuations_; }
  std::uint32_t round_index() const { return round_; }

  std::uint32_t positive_received(NodeId u, ProductId j) const {
    return pos_[Index(u, j)];
  }
  std::uint32_t negative_received(NodeId u, ProductId j) const {
    return neg_[Index(u, j)];
  }
  bool has_emitted(NodeId u, ProductId j) const {
    return emitted_[Index(u, j)] != 0;
  }
  bool owns(NodeId u, ProductId j) const { return owned_[Index(u, j)] != 0; }

  const std::vector<PurchaseRecord>& purchase_log() const { return log_; }
  std::size_t emissions_this_round() const { return emissions_this_round_; }

  /// Latest recommendation `issuer` sent to detector `d` on `product` this
  /// round, if any.
  const Polarity* LatestTo(NodeId d, NodeId issuer, ProductId product) const;

 private:
  std::size_t Index(NodeId u, ProductId j) const {
    return static_cast<std::size_t>(u) * num_products_ + j;
  }
  NodeId AddNode(const AgentPolicy& policy);
  void Link(NodeId u, NodeId v);
  void Unlink(NodeId u, NodeId v);
  ProductId Purchase(NodeId buyer, const std::vector<int>& effective);
  std::vector<int> Effective(NodeId u) const;
  RoundObservation Observe(NodeId detector, ProductId bought) const;

  std::size_t num_products_;
  ValuationProfile valuations_;
  EngineOptions options_;
  Rng rng_;

  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<AgentPolicy> policies_;
  std::vector<std::uint32_t> pos_;
  std::vector<std::uint32_t> neg_;
  std::vector<std::uint8_t> emitted_;
  std::vector<std::uint8_t> owned_;

  std::vector<NodeId> detectors_;
  std::vector<int> detector_slot_;
  // Per detector: (issuer * num_products + product) -> latest polarity.
  std::vector<std::unordered_map<std::uint64_t, Polarity>> inbox_;
  // Per detector: effective counts at the end of the previous round.
  std::vector<std::vector<int>> carried_;

  std::vector<NodeId> dishonest_;
  std::vector<NodeId> buyers_;  // honest, not a detector
  std::vector<PurchaseRecord> log_;
  std::uint32_t round_ = 0;
  std::size_t emissions_this_round_ = 0;
};

void WritePurchaseLogCsv(std::span<const PurchaseRecord> log,
                         std::ostream& out);

/// One row per (round, detector, neighbor).
void WriteObservationCsv(std::uint32_t round,
                         std::span<const DetectorObservation> observations,
                         std::ostream& out, bool header);

}  // namespace recwatch

#endif  // RECWATCH_ENGINE_HPP_
