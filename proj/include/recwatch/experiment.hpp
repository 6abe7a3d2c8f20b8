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


#ifndef RECWATCH_EXPERIMENT_HPP_
#define RECWATCH_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "recwatch/dataset.hpp"
#include "recwatch/detect.hpp"
#include "recwatch/engine.hpp"
#include "recwatch/graph.hpp"
#include "recwatch/metrics.hpp"

namespace recwatch {

enum class ExperimentKind {
  kMarketShare,
  kDetection,
  kCooperative,
  kChurn,
  kRDistribution,
  kReplay,
};

enum class TrustStrategy { kSuspicion, kConstant };

const char* ToString(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kDetection;

  // [graph]
  GlpParams graph;
  std::size_t target_edges = 70000;
  std::optional<double> p_add_edges;  // overrides target_edges when set
  std::string edge_file;

  // [market]
  std::size_t num_products = 5;
  std::size_t promoted_products = 1;
  double dishonest_fraction = 0.05;
  double delta = 0.1;

  // [detection]
  double p = 0.8;
  double pfp_star = 0.05;
  TrustStrategy trust = TrustStrategy::kSuspicion;
  double trust_weight = 1.0;

  // [engine]
  double purchases_fraction = 0.1;  // purchases per round, as a share of |V|
  std::size_t total_purchases = 10000;
  std::uint32_t rounds = 30;
  std::uint32_t round_cap = 500;
  bool uniform_start = true;
  bool reshare_owned = true;
  bool detector_uniform_choice = false;

  // [churn]
  ChurnModel churn;

  // [run]
  std::size_t replicates = 50;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string output_dir = "out";
  bool svg = false;

  // [replay]
  std::string ratings_file;
  std::string replay_edge_file;
  std::string detector;  // empty: the highest-degree rater
  std::string promoted_item;
  double replay_dishonest_fraction = 0.1;
  double binarize_threshold = 2.5;
  SampleParams sample;  // used when no ratings file is given

  /// GLP parameters with p_add_edges resolved from target_edges if needed.
  GlpParams ResolvedGraph() const;
  std::size_t PurchasesPerRound(std::size_t node_count) const;
};

struct FieldError {
  std::string path;  // e.g. "market.delta"
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParsedConfig {
  ExperimentConfig config;
  std::vector<FieldError> errors;  // unparseable values and unknown keys
};

/// Reads an INI file. Relative file paths inside it resolve against the
/// directory holding the config. Throws ConfigError when the file cannot be
/// read or is not INI at all.
ParsedConfig LoadConfig(const std::string& path);
ParsedConfig ParseConfig(std::istream& in, const std::string& base_dir = "");

/// Every violated invariant, each tagged with its field path.
std::vector<FieldError> ValidateConfig(const ExperimentConfig& config);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads. The first
/// exception thrown is rethrown after all workers stop.
void ForEachReplicate(std::size_t n, std::size_t workers,
                      const std::function<void(std::size_t)>& fn);

/// Graph, policies and detector for one synthetic replicate.
struct Scenario {
  Graph graph;
  std::vector<AgentPolicy> policies;
  NodeId detector = 0;
};

/// Builds a scenario: a uniform dishonest subset of the configured size and
/// a uniformly chosen honest detector with at least one dishonest and two
/// honest neighbors (any honest node with two honest neighbors if there are
/// no dishonest users).
Scenario MakeScenario(const ExperimentConfig& config, std::uint64_t seed,
                      const Graph* shared_graph = nullptr);

// Per-experiment outcomes. Curves index rounds from 0 (the initial state).

struct MarketShareOutcome {
  CurveSummary with_dishonest;
  CurveSummary without_dishonest;
};

struct DetectionOutcome {
  std::vector<ExperimentResult> replicates;
  AggregateResult aggregate;
};

struct CooperativeOutcome {
  std::vector<ExperimentResult> baseline;
  std::vector<ExperimentResult> cooperative;
  AggregateResult baseline_aggregate;
  AggregateResult cooperative_aggregate;
  /// Per replicate: cooperative theoretic P_fp never above the baseline and
  /// its first round below 0.1 no later.
  std::vector<bool> dominates;
};

struct ChurnOutcome {
  std::vector<ExperimentResult> baseline;
  std::vector<ExperimentResult> cooperative;
  AggregateResult baseline_aggregate;
  AggregateResult cooperative_aggregate;
  std::size_t arrivals = 0;
  std::size_t departures = 0;
};

struct RDistributionOutcome {
  std::vector<std::uint32_t> samples;  // R of every replicate that got clean
  std::size_t censored = 0;
  std::size_t neighbors = 0;
  std::size_t dishonest = 0;
  double p_hc = 0.0;
  double p_d = 0.0;
  double empirical_mean = 0.0;
  double closed_form_mean = 0.0;
  std::map<std::uint32_t, double> empirical_pmf;
  RPmf closed_form_pmf;
};

struct ReplayOutcome {
  std::vector<ReplayResult> replicates;
  CurveSummary pfp_empirical;
  CurveSummary pfn_empirical;
  CurveSummary pfp_theoretic;
  std::string detector;
  double consensus_fraction = 0.0;
};

MarketShareOutcome RunMarketShare(const ExperimentConfig& config);
DetectionOutcome RunDetection(const ExperimentConfig& config);
CooperativeOutcome RunCooperative(const ExperimentConfig& config);
ChurnOutcome RunChurn(const ExperimentConfig& config);
RDistributionOutcome RunRDistribution(const ExperimentConfig& config);
ReplayOutcome RunReplay(const ExperimentConfig& config);

using SummaryRows = std::vector<std::pair<std::string, std::string>>;

/// Runs the configured experiment, writes its CSV (and optional SVG)
/// artifacts into config.output_dir and returns the summary table.
SummaryRows RunExperiment(const ExperimentConfig& config);

/// Artifact file name of an experiment kind, e.g. "fig3_pfp_pfn.csv".
std::string ArtifactName(ExperimentKind kind);

/// Re-renders an SVG chart from a CSV written by RunExperiment.
void RenderCsvChart(const std::string& csv_path, const std::string& svg_path);

}  // namespace recwatch

#endif  // RECWATCH_EXPERIMENT_HPP_
