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


#ifndef RECWATCH_MARKET_HPP_
#define RECWATCH_MARKET_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "recwatch/graph.hpp"
#include "recwatch/rng.hpp"

namespace recwatch {

/// Zero-based product index. Products [0, promoted_count) are the ones
/// promoted by dishonest users.
using ProductId = std::uint32_t;

enum class Polarity : std::uint8_t { kPositive, kNegative };
enum class Classification : std::uint8_t { kCorrect, kWrong, kSilent };
enum class ForwardDecision : std::uint8_t { kPositive, kNegative, kSilent };

const char* ToString(Polarity p);
const char* ToString(Classification c);

struct ProductCatalog {
  std::size_t num_products = 5;
  std::size_t promoted_count = 1;
  std::vector<double> prices;  // empty means unit prices

  void Validate() const;
  bool is_promoted(ProductId j) const { return j < promoted_count; }
};

/// Binary product types as seen by honest users. In synthetic mode every
/// honest user shares one vector; promoted products are untrustworthy.
class ValuationProfile {
 public:
  ValuationProfile() = default;
  explicit ValuationProfile(std::vector<std::uint8_t> shared_types)
      : shared_(std::move(shared_types)) {}

  /// Promoted products get type 0, every other product type 1.
  static ValuationProfile Synthetic(const ProductCatalog& catalog);

  std::uint8_t type(ProductId j) const { return shared_[j]; }
  std::size_t num_products() const { return shared_.size(); }

 private:
  std::vector<std::uint8_t> shared_;
};

struct Recommendation {
  ProductId product = 0;
  Polarity polarity = Polarity::kPositive;
  NodeId issuer = 0;
  std::uint32_t round = 0;
};

struct AgentPolicy {
  enum class Kind : std::uint8_t { kHonest, kDishonest };

  Kind kind = Kind::kHonest;
  ProductId promoted = 0;  // meaningful for dishonest agents only
  double delta = 0.0;      // probability of a correct recommendation

  static AgentPolicy Honest() { return {}; }
  static AgentPolicy Dishonest(ProductId promoted, double delta);

  bool dishonest() const { return kind == Kind::kDishonest; }
};

/// The polarity an honest user with valuation `type` would emit.
inline Polarity CorrectPolarity(std::uint8_t type) {
  return type ? Polarity::kPositive : Polarity::kNegative;
}

Classification Classify(std::uint8_t detector_type, Polarity polarity);
inline Classification Classify(std::uint8_t detector_type,
                               const Recommendation& rec) {
  return Classify(detector_type, rec.polarity);
}

/// Intelligent strategy: always positive on the promoted product; on any
/// other product correct with probability delta, negative otherwise.
Polarity DishonestRecommend(const AgentPolicy& policy, ProductId product,
                            std::uint8_t true_type, Rng& rng);

/// Majority rule over all `degree` neighbors (strictly more than half).
ForwardDecision HonestForwardDecision(std::size_t pos_count,
                                      std::size_t neg_count,
                                      std::size_t degree);

/// Arg-max of effective (positive minus negative) counts with uniform
/// tie-breaking. All-zero input gives a uniform choice over every product.
ProductId ChoosePurchase(std::span<const int> effective, Rng& rng);

}  // namespace recwatch

#endif  // RECWATCH_MARKET_HPP_
