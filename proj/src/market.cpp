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


#include "recwatch/market.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace recwatch {

const char* ToString(Polarity p) {
  return p == Polarity::kPositive ? "positive" : "negative";
}

const char* ToString(Classification c) {
  switch (c) {
    case Classification::kCorrect:
      return "correct";
    case Classification::kWrong:
      return "wrong";
    case Classification::kSilent:
      return "silent";
  }
  return "?";
}

void ProductCatalog::Validate() const {
  if (num_products < 2) {
    throw std::invalid_argument("num_products must be >= 2");
  }
  if (promoted_count < 1 || promoted_count >= num_products) {
    throw std::invalid_argument("promoted_count must lie in [1, num_products)");
  }
  if (!prices.empty()) {
    if (prices.size() != num_products) {
      throw std::invalid_argument("prices must list one entry per product");
    }
    for (double p : prices) {
      if (!(p > 0.0)) throw std::invalid_argument("prices must be positive");
    }
  }
}

ValuationProfile ValuationProfile::Synthetic(const ProductCatalog& catalog) {
  catalog.Validate();
  std::vector<std::uint8_t> types(catalog.num_products, 1);
  for (ProductId j = 0; j < catalog.promoted_count; ++j) types[j] = 0;
  return ValuationProfile(std::move(types));
}

AgentPolicy AgentPolicy::Dishonest(ProductId promoted, double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in [0, 1], got " +
                                std::to_string(delta));
  }
  return {Kind::kDishonest, promoted, delta};
}

Classification Classify(std::uint8_t detector_type, Polarity polarity) {
  const bool positive = polarity == Polarity::kPositive;
  return positive == (detector_type != 0) ? Classification::kCorrect
                                          : Classification::kWrong;
}

Polarity DishonestRecommend(const AgentPolicy& policy, ProductId product,
                            std::uint8_t true_type, Rng& rng) {
  if (!policy.dishonest()) {
    throw std::logic_error("DishonestRecommend called with an honest policy");
  }
  if (product == policy.promoted) return Polarity::kPositive;
  if (Bernoulli(rng, policy.delta)) return CorrectPolarity(true_type);
  return Polarity::kNegative;
}

ForwardDecision HonestForwardDecision(std::size_t pos_count,
                                      std::size_t neg_count,
                                      std::size_t degree) {
  // 2 * count > degree is "count > degree / 2" without rounding.
  if (2 * pos_count > degree) return ForwardDecision::kPositive;
  if (2 * neg_count > degree) return ForwardDecision::kNegative;
  return ForwardDecision::kSilent;
}

ProductId ChoosePurchase(std::span<const int> effective, Rng& rng) {
  if (effective.empty()) {
    throw std::invalid_argument("ChoosePurchase needs at least one product");
  }
  const int best = *std::max_element(effective.begin(), effective.end());
  // Reservoir choice over the tied maxima keeps a single pass.
  ProductId chosen = 0;
  std::size_t ties = 0;
  for (ProductId j = 0; j < effective.size(); ++j) {
    if (effective[j] != best) continue;
    ++ties;
    if (ties == 1 ||
        std::uniform_int_distribution<std::size_t>(0, ties - 1)(rng) == 0) {
      chosen = j;
    }
  }
  return chosen;
}

}  // namespace recwatch
