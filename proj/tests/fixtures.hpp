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


#ifndef RECWATCH_TESTS_FIXTURES_HPP_
#define RECWATCH_TESTS_FIXTURES_HPP_

#include <stdexcept>
#include <vector>

#include "recwatch/detect.hpp"
#include "recwatch/observation.hpp"
#include "recwatch/rng.hpp"

namespace recwatch::testing {

/// Observation over `neighbors`: `correct` as given, `wrong` as given, the
/// rest silent.
inline RoundObservation Observation(const NodeSet& neighbors,
                                    const NodeSet& correct,
                                    const NodeSet& wrong,
                                    std::uint8_t product_type = 1) {
  RoundObservation obs;
  obs.product = 1;
  obs.product_type = product_type;
  obs.correct = correct;
  obs.wrong = wrong;
  obs.silent = Difference(Difference(neighbors, correct), wrong);
  return obs;
}

/// First seed whose Bernoulli(p) draws start with `pattern`.
inline std::uint64_t SeedForCoins(const std::vector<bool>& pattern, double p) {
  for (std::uint64_t seed = 0; seed < 100000; ++seed) {
    Rng rng(seed);
    bool match = true;
    for (bool want : pattern) match = match && Bernoulli(rng, p) == want;
    if (match) return seed;
  }
  throw std::runtime_error("no seed reproduces the coin pattern");
}

/// The three-round walk-through: 100 neighbors, 99 and 100 dishonest.
/// Round 1 detectable with 1, 2 correct; round 2 trustworthy but the
/// p-coin fails; round 3 detectable with 1..4 correct.
struct WorkedExample {
  static constexpr double kP = 0.5;
  NodeSet neighbors = RangeSet(1, 100);
  NodeSet dishonest = {99, 100};
  NodeSet honest = RangeSet(1, 98);

  std::vector<RoundObservation> rounds() const {
    return {Observation(neighbors, {1, 2}, dishonest),
            Observation(neighbors, {1, 2, 3}, dishonest),
            Observation(neighbors, RangeSet(1, 4), dishonest)};
  }
  Rng coins() const { return Rng(SeedForCoins({true, false, true}, kP)); }
};

}  // namespace recwatch::testing

#endif  // RECWATCH_TESTS_FIXTURES_HPP_
