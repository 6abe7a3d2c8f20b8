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


#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "recwatch/detect.hpp"
#include "recwatch/metrics.hpp"

using namespace recwatch;
using recwatch::testing::Observation;

TEST_CASE("empirical error rates") {
  GroundTruth truth{MakeSet({9, 10}), RangeSet(1, 8)};
  CHECK(EmpiricalPfn(MakeSet({3, 9}), truth) == doctest::Approx(0.5));
  CHECK(EmpiricalPfp(MakeSet({3, 9}), truth) == doctest::Approx(1.0 / 8.0));
  CHECK(EmpiricalPfn(RangeSet(1, 10), truth) == 0.0);
  CHECK(EmpiricalPfp(RangeSet(1, 10), truth) == 1.0);
  CHECK(EmpiricalPfn({}, truth) == 1.0);
  CHECK(EmpiricalPfp({}, truth) == 0.0);
  CHECK_THROWS_AS(EmpiricalPfn({}, GroundTruth{{}, RangeSet(1, 3)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalPfp({}, GroundTruth{RangeSet(1, 3), {}}),
                  std::invalid_argument);
}

TEST_CASE("market share") {
  const std::vector<PurchaseRecord> one{{1, 4, 0}, {2, 5, 0}};
  CHECK(MarketShare(one, 1) == std::vector<double>{1.0});
  std::vector<PurchaseRecord> log;
  Rng rng(5);
  std::uniform_int_distribution<ProductId> pick(0, 4);
  for (int i = 0; i < 100000; ++i) log.push_back({0, 0, pick(rng)});
  double total = 0.0;
  for (double s : MarketShare(log, 5)) {
    CHECK(s == doctest::Approx(0.2).epsilon(0.05));
    total += s;
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK_THROWS_AS(MarketShare({}, 5), std::invalid_argument);
  CHECK_THROWS_AS(MarketShare(one, 0), std::out_of_range);
}

TEST_CASE("curve aggregation") {
  const auto same = AggregateCurves({{0.5, 0.25}, {0.5, 0.25}, {0.5, 0.25}});
  CHECK(same.mean == std::vector<double>{0.5, 0.25});
  CHECK(same.std_error == std::vector<double>{0.0, 0.0});
  CHECK_FALSE(same.truncated);
  const auto two = AggregateCurves({{0.4}, {0.6}});
  CHECK(two.mean[0] == doctest::Approx(0.5));
  // sd = 0.1414, se = sd / sqrt 2
  CHECK(two.std_error[0] == doctest::Approx(0.1));
  const auto ragged = AggregateCurves({{1, 2, 3}, {1, 2}});
  CHECK(ragged.truncated);
  CHECK(ragged.mean.size() == 2);
  CHECK_THROWS_AS(AggregateCurves({{1.0}}), std::invalid_argument);
}

TEST_CASE("replicate aggregation") {
  std::vector<ExperimentResult> rs(4);
  rs[0].rounds_to_clean = 3;
  rs[1].rounds_to_clean = 5;
  rs[2].rounds_to_clean = 3;
  for (auto& r : rs) r.pfp_empirical = {1.0, 0.5};
  const auto agg = AggregateReplicates(rs);
  CHECK(agg.r_censored == 1);
  CHECK(agg.r_mean == doctest::Approx(11.0 / 3.0));
  CHECK(agg.r_pmf.at(3) == doctest::Approx(2.0 / 3.0));
  CHECK(agg.pfp_empirical.mean[1] == 0.5);
  CHECK(agg.market_share.mean.empty());
  CHECK(agg.market_share.replicates == 4);
}

TEST_CASE("empirical pmf is normalized") {
  Rng rng(3);
  std::geometric_distribution<std::uint32_t> geo(0.2);
  std::vector<std::uint32_t> xs(5000);
  for (auto& x : xs) x = geo(rng) + 1;
  double total = 0.0;
  for (const auto& [r, v] : EmpiricalPmf(xs)) total += v;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("rounds to clean under a known process agree with the closed form") {
  // Honest neighbors are correct with probability p_hc in trustworthy
  // rounds, and rounds are trustworthy with probability 0.75.
  const double p = 0.8, p_trust = 0.75, p_hc = 0.3;
  const NodeSet neighbors = RangeSet(1, 14);
  const NodeSet dishonest = MakeSet({13, 14});
  Rng rng(99);
  std::vector<std::uint32_t> samples;
  for (int rep = 0; rep < 1000; ++rep) {
    DetectorState s(neighbors, p);
    std::uint32_t r = 0;
    while (IntersectionSize(s.suspicious(), RangeSet(1, 12)) > 0) {
      ++r;
      const int type = Bernoulli(rng, p_trust) ? 1 : 0;
      NodeSet correct;
      for (NodeId v = 1; v <= 12; ++v) {
        if (Bernoulli(rng, p_hc)) correct.push_back(v);
      }
      DetectRoundBaseline(s, Observation(neighbors, correct, dishonest, type), rng);
    }
    samples.push_back(r);
  }
  double mean = 0.0;
  for (auto r : samples) mean += r;
  mean /= samples.size();
  const double closed = ExpectedRounds({p_hc, p * p_trust, 14, 2, 0.1});
  CHECK(std::fabs(mean - closed) / closed < 0.05);
}

TEST_CASE("charts") {
  std::ostringstream line, bar;
  WriteLineChartSvg("P & Q", "round", "p", {1, 2, 3},
                    {{"a", {1.0, 0.5, 0.25}}, {"b<c>", {0.0, 0.1, 0.2}}}, line);
  CHECK(line.str().rfind("<svg", 0) == 0);
  CHECK(line.str().find("P &amp; Q") != std::string::npos);
  CHECK(line.str().find("b&lt;c&gt;") != std::string::npos);
  CHECK(line.str().find("</svg>") != std::string::npos);
  WriteBarChartSvg("share", "fraction", {"P1", "P2"}, {{"x", {0.7, 0.3}}}, bar);
  CHECK(bar.str().rfind("<svg", 0) == 0);
  std::ostringstream nan_chart;
  WriteLineChartSvg("t", "x", "y", {1, 2},
                    {{"n", {std::numeric_limits<double>::quiet_NaN(), 1.0}}},
                    nan_chart);
  CHECK(nan_chart.str().find("nan") == std::string::npos);
}
