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


#include "recwatch/observation.hpp"

namespace recwatch {

NodeSet MakeSet(std::vector<NodeId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

NodeSet RangeSet(NodeId first, NodeId last) {
  NodeSet out;
  if (last < first) return out;
  out.reserve(last - first + 1);
  for (NodeId i = first; i <= last; ++i) out.push_back(i);
  return out;
}

NodeSet Union(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

NodeSet Intersect(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

NodeSet Difference(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

std::size_t IntersectionSize(const NodeSet& a, const NodeSet& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

bool Contains(const NodeSet& s, NodeId id) {
  return std::binary_search(s.begin(), s.end(), id);
}

bool IsSubset(const NodeSet& sub, const NodeSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

bool RoundObservation::Partitions(const NodeSet& neighbors) const {
  if (correct.size() + wrong.size() + silent.size() != neighbors.size()) {
    return false;
  }
  auto strictly_increasing = [](const NodeSet& s) {
    return std::adjacent_find(s.begin(), s.end(), [](NodeId a, NodeId b) {
             return a >= b;
           }) == s.end();
  };
  if (!strictly_increasing(correct) || !strictly_increasing(wrong) ||
      !strictly_increasing(silent)) {
    return false;
  }
  return Union(Union(correct, wrong), silent) == neighbors;
}

}  // namespace recwatch
