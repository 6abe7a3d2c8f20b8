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


#include "recwatch/engine.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <stdexcept>
#include <string>

namespace recwatch {

void ChurnModel::Validate() const {
  if (!(p_new_neighbor >= 0.0 && p_new_neighbor <= 1.0)) {
    throw std::invalid_argument("p_new_neighbor must lie in [0, 1]");
  }
  if (!(p_leave >= 0.0 && p_leave <= 1.0)) {
    throw std::invalid_argument("p_leave must lie in [0, 1]");
  }
}

Simulation::Simulation(const Graph& graph, std::vector<AgentPolicy> policies,
                       ValuationProfile valuations, std::uint64_t seed,
                       EngineOptions options)
    : num_products_(valuations.num_products()),
      valuations_(std::move(valuations)),
      options_(options),
      rng_(seed),
      policies_(std::move(policies)) {
  const std::size_t n = graph.node_count();
  if (policies_.size() != n) {
    throw std::invalid_argument("need exactly one policy per node");
  }
  if (num_products_ == 0) {
    throw std::invalid_argument("valuation profile has no products");
  }
  adjacency_.resize(n);
  for (NodeId u = 0; u < n; ++u) {
    const auto nbrs = graph.neighbors(u);
    adjacency_[u].assign(nbrs.begin(), nbrs.end());
  }
  pos_.assign(n * num_products_, 0);
  neg_.assign(n * num_products_, 0);
  emitted_.assign(n * num_products_, 0);
  owned_.assign(n * num_products_, 0);
  detector_slot_.assign(n, -1);
  for (NodeId u = 0; u < n; ++u) {
    const AgentPolicy& p = policies_[u];
    if (p.dishonest()) {
      if (p.promoted >= num_products_) {
        throw std::invalid_argument("dishonest policy promotes unknown product");
      }
      dishonest_.push_back(u);
    } else {
      buyers_.push_back(u);
    }
  }
}

void Simulation::RegisterDetector(NodeId node) {
  if (node >= node_count()) throw std::out_of_range("detector id out of range");
  if (policies_[node].dishonest()) {
    throw std::invalid_argument("detectors must be honest");
  }
  if (detector_slot_[node] >= 0) return;
  detector_slot_[node] = static_cast<int>(detectors_.size());
  detectors_.push_back(node);
  inbox_.emplace_back();
  carried_.emplace_back(num_products_, 0);
  buyers_.erase(std::remove(buyers_.begin(), buyers_.end(), node),
                buyers_.end());
}

void Simulation::SeedUniformOwnership() {
  std::uniform_int_distribution<ProductId> pick(
      0, static_cast<ProductId>(num_products_ - 1));
  for (NodeId u = 0; u < node_count(); ++u) {
    if (policies_[u].dishonest()) continue;
    owned_[Index(u, pick(rng_))] = 1;
  }
}

NodeSet Simulation::neighbor_set(NodeId u) const {
  return MakeSet(adjacency_[u]);
}

const Polarity* Simulation::LatestTo(NodeId d, NodeId issuer,
                                     ProductId product) const {
  const int slot = detector_slot_[d];
  if (slot < 0) return nullptr;
  const auto& box = inbox_[static_cast<std::size_t>(slot)];
  const auto it = box.find(static_cast<std::uint64_t>(issuer) * num_products_ +
                           product);
  return it == box.end() ? nullptr : &it->second;
}

void Simulation::BeginRound() {
  std::fill(pos_.begin(), pos_.end(), 0);
  std::fill(neg_.begin(), neg_.end(), 0);
  std::fill(emitted_.begin(), emitted_.end(), 0);
  for (auto& box : inbox_) box.clear();
  emissions_this_round_ = 0;
}

std::size_t Simulation::PropagateCascade(NodeId origin, ProductId product,
                                         Polarity polarity) {
  if (emitted_[Index(origin, product)]) {
    throw std::logic_error("node " + std::to_string(origin) +
                           " already emitted on product " +
                           std::to_string(product) + " this round");
  }
  std::deque<std::pair<NodeId, Polarity>> wavefront;
  emitted_[Index(origin, product)] = 1;
  wavefront.emplace_back(origin, polarity);
  std::size_t emissions = 0;
  while (!wavefront.empty()) {
    const auto [u, pol] = wavefront.front();
    wavefront.pop_front();
    ++emissions;
    for (NodeId v : adjacency_[u]) {
      const std::size_t idx = Index(v, product);
      auto& counter = pol == Polarity::kPositive ? pos_ : neg_;
      ++counter[idx];
      if (const int slot = detector_slot_[v]; slot >= 0) {
        inbox_[static_cast<std::size_t>(slot)]
              [static_cast<std::uint64_t>(u) * num_products_ + product] = pol;
      }
      // Dishonest users never relay; owners speak from their own valuation.
      if (emitted_[idx] || owned_[idx] || policies_[v].dishonest()) continue;
      const ForwardDecision decision =
          HonestForwardDecision(pos_[idx], neg_[idx], adjacency_[v].size());
      if (decision == ForwardDecision::kSilent) continue;
      emitted_[idx] = 1;
      wavefront.emplace_back(v, decision == ForwardDecision::kPositive
                                    ? Polarity::kPositive
                                    : Polarity::kNegative);
    }
  }
  if (emissions > node_count()) {
    throw std::logic_error("cascade emitted more than once per node");
  }
  emissions_this_round_ += emissions;
  return emissions;
}

std::vector<int> Simulation::Effective(NodeId u) const {
  std::vector<int> effective(num_products_);
  for (ProductId j = 0; j < num_products_; ++j) {
    const std::size_t idx = Index(u, j);
    effective[j] = static_cast<int>(pos_[idx]) - static_cast<int>(neg_[idx]);
  }
  return effective;
}

ProductId Simulation::Purchase(NodeId buyer,
                               const std::vector<int>& effective) {
  const ProductId chosen = ChoosePurchase(effective, rng_);
  owned_[Index(buyer, chosen)] = 1;
  log_.push_back({round_, buyer, chosen});
  if (!emitted_[Index(buyer, chosen)]) {
    PropagateCascade(buyer, chosen, CorrectPolarity(valuations_.type(chosen)));
  }
  return chosen;
}

RoundObservation Simulation::Observe(NodeId detector, ProductId bought) const {
  RoundObservation obs;
  obs.product = bought;
  obs.product_type = valuations_.type(bought);
  for (NodeId v : neighbor_set(detector)) {
    const Polarity* latest = LatestTo(detector, v, bought);
    if (latest == nullptr) {
      obs.silent.push_back(v);
    } else if (Classify(obs.product_type, *latest) ==
               Classification::kCorrect) {
      obs.correct.push_back(v);
    } else {
      obs.wrong.push_back(v);
    }
  }
  return obs;
}

std::vector<DetectorObservation> Simulation::RunRound(std::size_t purchases) {
  ++round_;
  if (round_ > 1) {
    for (std::size_t s = 0; s < detectors_.size(); ++s) {
      carried_[s] = Effective(detectors_[s]);
    }
  }
  BeginRound();

  for (NodeId u : dishonest_) {
    const AgentPolicy& p = policies_[u];
    for (ProductId j = 0; j < num_products_; ++j) {
      const Polarity pol = DishonestRecommend(p, j, valuations_.type(j), rng_);
      PropagateCascade(u, j, pol);
    }
  }
  if (options_.reshare_owned) {
    for (NodeId u = 0; u < node_count(); ++u) {
      if (policies_[u].dishonest()) continue;
      for (ProductId j = 0; j < num_products_; ++j) {
        const std::size_t idx = Index(u, j);
        if (owned_[idx] && !emitted_[idx]) {
          PropagateCascade(u, j, CorrectPolarity(valuations_.type(j)));
        }
      }
    }
  }

  // -1 marks an ordinary buyer slot; detectors land on random slots.
  std::vector<int> schedule(purchases, -1);
  for (std::size_t s = 0; s < detectors_.size(); ++s) {
    schedule.push_back(static_cast<int>(s));
  }
  std::shuffle(schedule.begin(), schedule.end(), rng_);

  std::vector<ProductId> bought(detectors_.size(), 0);
  for (const int slot : schedule) {
    if (slot >= 0) {
      const auto s = static_cast<std::size_t>(slot);
      bought[s] = Purchase(detectors_[s],
                           options_.detector_uniform_choice
                               ? std::vector<int>(num_products_, 0)
                               : carried_[s]);
      continue;
    }
    if (buyers_.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, buyers_.size() - 1);
    const NodeId buyer = buyers_[pick(rng_)];
    Purchase(buyer, Effective(buyer));
  }

  std::vector<DetectorObservation> out;
  out.reserve(detectors_.size());
  for (std::size_t s = 0; s < detectors_.size(); ++s) {
    out.push_back({detectors_[s], Observe(detectors_[s], bought[s])});
  }
  return out;
}

NodeId Simulation::AddNode(const AgentPolicy& policy) {
  const auto id = static_cast<NodeId>(adjacency_.size());
  adjacency_.emplace_back();
  policies_.push_back(policy);
  pos_.resize(pos_.size() + num_products_, 0);
  neg_.resize(neg_.size() + num_products_, 0);
  emitted_.resize(emitted_.size() + num_products_, 0);
  owned_.resize(owned_.size() + num_products_, 0);
  detector_slot_.push_back(-1);
  if (policy.dishonest()) {
    dishonest_.push_back(id);
  } else {
    buyers_.push_back(id);
  }
  return id;
}

void Simulation::Link(NodeId u, NodeId v) {
  adjacency_[u].push_back(v);
  adjacency_[v].push_back(u);
}

void Simulation::Unlink(NodeId u, NodeId v) {
  auto drop = [](std::vector<NodeId>& list, NodeId x) {
    list.erase(std::remove(list.begin(), list.end(), x), list.end());
  };
  drop(adjacency_[u], v);
  drop(adjacency_[v], u);
}

ChurnEvent Simulation::ApplyChurn(NodeId detector, const ChurnModel& model,
                                  double dishonest_fraction,
                                  const AgentPolicy& dishonest_policy) {
  model.Validate();
  ChurnEvent event;
  for (NodeId v : neighbor_set(detector)) {
    if (Bernoulli(rng_, model.p_leave)) event.departed.push_back(v);
  }
  for (NodeId v : event.departed) Unlink(detector, v);
  if (Bernoulli(rng_, model.p_new_neighbor)) {
    const AgentPolicy policy = Bernoulli(rng_, dishonest_fraction)
                                   ? dishonest_policy
                                   : AgentPolicy::Honest();
    const NodeId fresh = AddNode(policy);
    Link(detector, fresh);
    event.arrived.push_back(fresh);
  }
  return event;
}

void WritePurchaseLogCsv(std::span<const PurchaseRecord> log,
                         std::ostream& out) {
  out << "round,buyer,product\n";
  for (const auto& r : log) {
    out << r.round << ',' << r.buyer << ',' << (r.product + 1) << '\n';
  }
}

void WriteObservationCsv(std::uint32_t round,
                         std::span<const DetectorObservation> observations,
                         std::ostream& out, bool header) {
  if (header) out << "round,detector,neighbor,classification\n";
  for (const auto& [detector, obs] : observations) {
    std::vector<std::pair<NodeId, Classification>> rows;
    for (NodeId v : obs.correct) rows.emplace_back(v, Classification::kCorrect);
    for (NodeId v : obs.wrong) rows.emplace_back(v, Classification::kWrong);
    for (NodeId v : obs.silent) rows.emplace_back(v, Classification::kSilent);
    std::sort(rows.begin(), rows.end());
    for (const auto& [v, c] : rows) {
      out << round << ',' << detector << ',' << v << ',' << ToString(c) << '\n';
    }
  }
}

}  // namespace recwatch
