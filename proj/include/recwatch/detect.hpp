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


#ifndef RECWATCH_DETECT_HPP_
#define RECWATCH_DETECT_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "recwatch/observation.hpp"
#include "recwatch/rng.hpp"

namespace recwatch {

/// One entry of the detection history: d(t) and the pool D(t) that dishonest
/// neighbors most likely belong to. On non-detectable rounds the pool is the
/// previous one, shared rather than copied.
struct HistoryEntry {
  bool detectable = false;
  std::shared_ptr<const NodeSet> pool;
};

struct TrajectoryPoint {
  std::uint32_t round = 0;
  bool detectable = false;
  double pfp_theoretic = 1.0;
  double pfn_theoretic = 0.0;
  std::size_t suspicious_size = 0;
  std::size_t removed_cooperative = 0;
  std::size_t new_neighbors = 0;
  std::size_t left_neighbors = 0;
};

/// What a neighbor shares in the cooperative step.
struct NeighborReport {
  NodeId reporter = 0;
  NodeSet neighbors;   // N_j
  NodeSet suspicious;  // S_j(t), must be a subset of N_j
};

/// Per-neighbor trust weight in [0, 1]; neighbors missing from the map are
/// not trusted.
using TrustWeights = std::map<NodeId, double>;

/// Suspicious-set state machine of a single detector.
class DetectorState {
 public:
  /// `p` is the probability of using a trustworthy-purchase round for
  /// shrinking. `delta` only feeds the reported theoretic false-negative
  /// curve; the detector itself never needs it.
  DetectorState(NodeSet neighbors, double p, double delta = 0.0);

  const NodeSet& neighbors() const { return neighbors_; }
  const NodeSet& suspicious() const { return suspicious_; }
  const std::vector<HistoryEntry>& history() const { return history_; }
  const std::vector<TrajectoryPoint>& trajectory() const { return trajectory_; }
  const NodeSet& initial_neighbors() const { return initial_neighbors_; }

  double p() const { return p_; }
  double delta() const { return delta_; }
  double pfp_theoretic() const { return pfp_; }
  double pfn_theoretic() const;
  std::size_t detectable_count() const { return detectable_count_; }
  std::uint32_t round() const { return static_cast<std::uint32_t>(history_.size()); }
  /// Reports dropped because the reporter was not a neighbor.
  std::size_t ignored_reports() const { return ignored_reports_; }

 private:
  friend void DetectRoundBaseline(DetectorState&, const RoundObservation&,
                                  Rng&);
  friend void DetectRoundCooperative(
      DetectorState&, const RoundObservation&,
      std::span<const NeighborReport>, Rng&,
      const std::function<TrustWeights(const DetectorState&)>&);
  friend void DetectRoundChurn(DetectorState&, const RoundObservation&,
                               const std::vector<NeighborReport>*,
                               const NodeSet&, const NodeSet&, Rng&);

  struct StepResult {
    double ratio = 1.0;
    std::size_t cooperative_removed = 0;
  };
  StepResult Independent(const RoundObservation& obs, Rng& rng);
  std::size_t Cooperative(
      std::span<const NeighborReport> reports, Rng& rng,
      const std::function<TrustWeights(const DetectorState&)>& weights);
  void Record(bool detectable, std::size_t removed, std::size_t arrived,
              std::size_t departed);

  NodeSet initial_neighbors_;
  NodeSet neighbors_;
  NodeSet suspicious_;
  std::vector<HistoryEntry> history_;
  std::vector<TrajectoryPoint> trajectory_;
  std::shared_ptr<const NodeSet> last_pool_;
  double p_;
  double delta_;
  double pfp_ = 1.0;
  std::size_t detectable_count_ = 0;
  std::size_t ignored_reports_ = 0;
};

/// Weight 0 for neighbors still in the suspicious set, 1 for the rest.
TrustWeights TrustWeightsDefault(const DetectorState& state);

/// Independent step. On a trustworthy purchase, with probability p the
/// suspicious set is intersected with D(t) = wrong ∪ silent. Throws
/// std::invalid_argument if `obs` does not partition the neighbor set.
void DetectRoundBaseline(DetectorState& state, const RoundObservation& obs,
                         Rng& rng);

/// Independent step followed by the cooperative step: each neighbor report is
/// used with probability w_ij(t) to drop N_j \ S_j(t) from the suspicious
/// set. Weights are evaluated after the independent step.
void DetectRoundCooperative(
    DetectorState& state, const RoundObservation& obs,
    std::span<const NeighborReport> reports, Rng& rng,
    const std::function<TrustWeights(const DetectorState&)>& weights =
        TrustWeightsDefault);

/// Runs the baseline step (`reports == nullptr`) or the cooperative step,
/// then applies churn: arrivals join both the neighbor and the suspicious
/// set, departures leave both.
void DetectRoundChurn(DetectorState& state, const RoundObservation& obs,
                      const std::vector<NeighborReport>* reports,
                      const NodeSet& arrived, const NodeSet& departed,
                      Rng& rng);

double PfnTheoretic(double delta, std::size_t detectable_count);

/// Running product of |D(τ-1) ∩ D(τ)| / |D(τ-1)| over detectable rounds, with
/// D(0) = the initial neighbor set. An empty D(τ-1) makes the product 0.
double PfpTheoreticBaseline(const NodeSet& initial_neighbors,
                            std::span<const HistoryEntry> history);

/// Same product with k dishonest neighbors assumed to stay in every pool.
/// Uses ground truth, so it is meant for validation only.
double PfpTheoreticBaselineKnownK(const NodeSet& initial_neighbors,
                                  std::span<const HistoryEntry> history,
                                  std::size_t k);

/// (prev * ratio * N - |C|) / N clamped to [0, 1]; |C| = 0 returns exactly
/// the baseline update prev * ratio.
double PfpTheoreticCooperative(double prev, double ratio, std::size_t c_size,
                               std::size_t n);

/// (prev * ratio * N_prev - |C| + |NU| - |L_S|) / N_now clamped to [0, 1].
/// Without churn this is exactly PfpTheoreticCooperative.
double PfpTheoreticChurn(double prev, double ratio, std::size_t c_size,
                         std::size_t nu_size, std::size_t ls_size,
                         std::size_t n_prev, std::size_t n_now);

struct EstimatorInputs {
  double p_hc = 0.0;
  double p_d = 0.0;
  std::size_t n = 0;  // neighbor count
  std::size_t k = 0;  // dishonest neighbors
  double delta = 0.0;

  void Validate() const;
};

/// Raised when p_hc or p_d is zero, so R is not finite.
class DegenerateEstimateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct RPmf {
  std::vector<double> pmf;  // pmf[r - 1] = P(R = r)
  double tail = 0.0;        // P(R > r_max)
};

/// Closed-form distribution of the number of rounds until the suspicious set
/// holds no honest neighbor.
RPmf RDistribution(const EstimatorInputs& inputs, std::size_t r_max);

/// E[R] = sum over d of P(D = d) * d / p_d.
double ExpectedRounds(const EstimatorInputs& inputs);

/// Mean over honest neighbors of (rounds with a correct recommendation) /
/// total_rounds.
double EstimatePhc(std::span<const std::size_t> correct_rounds,
                   std::size_t total_rounds);

/// p times the fraction of rounds whose purchase was trustworthy.
double EstimatePd(std::span<const std::uint8_t> trustworthy, double p);

struct CompleteResult {
  NodeSet blacklist;
  std::vector<TrajectoryPoint> trajectory;
  bool reached = false;  // false: the round cap ran out first
  std::uint32_t rounds = 0;
};

/// Advances the detector by exactly one round, whatever the variant.
using RoundSource = std::function<void(DetectorState&)>;

/// Repeats rounds until the theoretic false-positive probability is at most
/// `pfp_star` or `round_cap` rounds have run.
CompleteResult RunComplete(DetectorState& state, const RoundSource& next_round,
                           double pfp_star, std::uint32_t round_cap = 500);

void WriteTrajectoryCsv(std::span<const TrajectoryPoint> trajectory,
                        std::ostream& out);

}  // namespace recwatch

#endif  // RECWATCH_DETECT_HPP_
