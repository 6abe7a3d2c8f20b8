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


#ifndef RECWATCH_METRICS_HPP_
#define RECWATCH_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recwatch/engine.hpp"
#include "recwatch/observation.hpp"

namespace recwatch {

/// Honest/dishonest split of a detector's neighbors at measurement time.
struct GroundTruth {
  NodeSet dishonest;
  NodeSet honest;

  /// Splits `neighbors` by the policies held in `sim`.
  static GroundTruth Of(const Simulation& sim, const NodeSet& neighbors);
  std::size_t k() const { return dishonest.size(); }
};

/// |dishonest \ S| / |dishonest|. Throws std::invalid_argument when there are
/// no dishonest neighbors, since the ratio is then undefined.
double EmpiricalPfn(const NodeSet& suspicious, const GroundTruth& truth);

/// |honest ∩ S| / |honest|. Throws std::invalid_argument without honest
/// neighbors.
double EmpiricalPfp(const NodeSet& suspicious, const GroundTruth& truth);

/// Fraction of purchases per product; sums to 1. Throws on an empty log.
std::vector<double> MarketShare(std::span<const PurchaseRecord> log,
                                std::size_t num_products);

struct CurveSummary {
  std::vector<double> mean;
  std::vector<double> std_error;
  std::size_t replicates = 0;
  bool truncated = false;  // curves had different lengths
};

/// Pointwise mean and standard error. Curves of different length are cut to
/// the shortest one and flagged. Needs at least two curves.
CurveSummary AggregateCurves(const std::vector<std::vector<double>>& curves);

/// Everything one replicate of a detection experiment produces.
struct ExperimentResult {
  std::vector<double> pfp_empirical;
  std::vector<double> pfn_empirical;
  std::vector<double> pfp_theoretic;
  std::vector<double> pfn_theoretic;
  std::vector<double> market_share;
  std::optional<std::uint32_t> rounds_to_clean;  // R; empty if never reached
};

struct AggregateResult {
  CurveSummary pfp_empirical;
  CurveSummary pfn_empirical;
  CurveSummary pfp_theoretic;
  CurveSummary pfn_theoretic;
  CurveSummary market_share;
  std::map<std::uint32_t, double> r_pmf;  // over replicates that reached R
  double r_mean = 0.0;
  std::size_t r_censored = 0;
};

AggregateResult AggregateReplicates(std::span<const ExperimentResult> results);

/// Normalized histogram of R samples.
std::map<std::uint32_t, double> EmpiricalPmf(
    std::span<const std::uint32_t> samples);

/// Minimal SVG charts for the report command. Series share the x values.
struct ChartSeries {
  std::string label;
  std::vector<double> y;
};
void WriteLineChartSvg(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<double>& x,
                       const std::vector<ChartSeries>& series,
                       std::ostream& out);
void WriteBarChartSvg(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& categories,
                      const std::vector<ChartSeries>& series,
                      std::ostream& out);

}  // namespace recwatch

#endif  // RECWATCH_METRICS_HPP_
