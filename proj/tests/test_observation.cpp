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


#include "doctest.h"
#include "recwatch/observation.hpp"

using namespace recwatch;

TEST_CASE("node set operations") {
  const NodeSet a = MakeSet({5, 1, 3, 3});
  const NodeSet b = RangeSet(3, 6);
  CHECK(a == NodeSet{1, 3, 5});
  CHECK(b == NodeSet{3, 4, 5, 6});
  CHECK(Union(a, b) == NodeSet{1, 3, 4, 5, 6});
  CHECK(Intersect(a, b) == NodeSet{3, 5});
  CHECK(Difference(a, b) == NodeSet{1});
  CHECK(IntersectionSize(a, b) == 2);
  CHECK(Contains(a, 5));
  CHECK_FALSE(Contains(a, 4));
  CHECK(IsSubset(NodeSet{3, 5}, a));
  CHECK_FALSE(IsSubset(NodeSet{3, 4}, a));
  CHECK(IsSubset(NodeSet{}, a));
}

TEST_CASE("observation partition check") {
  RoundObservation obs;
  obs.correct = {1};
  obs.wrong = {2, 3};
  obs.silent = {4};
  CHECK(obs.Partitions({1, 2, 3, 4}));
  CHECK_FALSE(obs.Partitions({1, 2, 3, 4, 5}));
  obs.silent = {3, 4};
  CHECK_FALSE(obs.Partitions({1, 2, 3, 4}));
}
