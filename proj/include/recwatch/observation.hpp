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


#ifndef RECWATCH_OBSERVATION_HPP_
#define RECWATCH_OBSERVATION_HPP_

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <vector>

#include "recwatch/graph.hpp"
#include "recwatch/market.hpp"

namespace recwatch {

/// Sorted, duplicate-free set of node ids. Kept as a flat vector because the
/// detection algorithms only need ordered merges.
using NodeSet = std::vector<NodeId>;

NodeSet MakeSet(std::vector<NodeId> ids);
inline NodeSet MakeSet(std::initializer_list<NodeId> ids) {
  return MakeSet(std::vector<NodeId>(ids));
}
/// Set of the integers [first, last].
NodeSet RangeSet(NodeId first, NodeId last);

NodeSet Union(const NodeSet& a, const NodeSet& b);
NodeSet Intersect(const NodeSet& a, const NodeSet& b);
NodeSet Difference(const NodeSet& a, const NodeSet& b);
std::size_t IntersectionSize(const NodeSet& a, const NodeSet& b);
bool Contains(const NodeSet& s, NodeId id);
bool IsSubset(const NodeSet& sub, const NodeSet& super);

/// What one detector learns in one round: the type of the product she bought
/// and how each neighbor's recommendation on it classifies.
struct RoundObservation {
  ProductId product = 0;
  std::uint8_t product_type = 0;
  NodeSet correct;
  NodeSet wrong;
  NodeSet silent;

  /// True iff the three sets are disjoint and their union is `neighbors`.
  bool Partitions(const NodeSet& neighbors) const;
};

}  // namespace recwatch

#endif  // RECWATCH_OBSERVATION_HPP_
