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


#include "recwatch/detect.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <boost/math/distributions/negative_binomial.hpp>

#include "recwatch/format.hpp"

namespace recwatch {
namespace {

double Clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void CheckProbability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

DetectorState::DetectorState(NodeSet neighbors, double p, double delta)
    : initial_neighbors_(neighbors),
      neighbors_(neighbors),
      suspicious_(std::move(neighbors)),
      p_(p),
      delta_(delta) {
  CheckProbability(p, "p");
  CheckProbability(delta, "delta");
  if (!std::is_sorted(neighbors_.begin(), neighbors_.end()) ||
      std::adjacent_find(neighbors_.begin(), neighbors_.end()) !=
          neighbors_.end()) {
    throw std::invalid_argument("neighbor set must be sorted and unique");
  }
  last_pool_ = std::make_shared<const NodeSet>(neighbors_);
}

double DetectorState::pfn_theoretic() const {
  return PfnTheoretic(delta_, detectable_count_);
}

DetectorState::StepResult DetectorState::Independent(
    const RoundObservation& obs, Rng& rng) {
  if (!obs.Partitions(neighbors_)) {
    throw std::invalid_argument(
        "observation does not partition the detector's neighbor set");
  }
  StepResult result;
  // The p-coin is only tossed for trustworthy purchases.
  const bool detectable = obs.product_type == 1 && Bernoulli(rng, p_);
  if (!detectable) {
    history_.push_back({false, last_pool_});
    return result;
  }
  auto pool = std::make_shared<const NodeSet>(Union(obs.wrong, obs.silent));
  result.ratio = last_pool_->empty()
                     ? 0.0
                     : static_cast<double>(IntersectionSize(*last_pool_, *pool)) /
                           static_cast<double>(last_pool_->size());
  suspicious_ = Intersect(suspicious_, *pool);
  last_pool_ = pool;
  ++detectable_count_;
  history_.push_back({true, std::move(pool)});
  return result;
}

std::size_t DetectorState::Cooperative(
    std::span<const NeighborReport> reports, Rng& rng,
    const std::function<TrustWeights(const DetectorState&)>& weights) {
  const TrustWeights w = weights(*this);
  NodeSet seen;
  std::size_t removed = 0;
  for (const NeighborReport& report : reports) {
    if (!Contains(neighbors_, report.reporter)) {
      ++ignored_reports_;
      continue;
    }
    if (Contains(seen, report.reporter)) {
      throw std::invalid_argument("more than one report from neighbor " +
                                  std::to_string(report.reporter));
    }
    seen.insert(std::upper_bound(seen.begin(), seen.end(), report.reporter),
                report.reporter);
    if (!IsSubset(report.suspicious, report.neighbors)) {
      throw std::invalid_argument("report from " +
                                  std::to_string(report.reporter) +
                                  " has a suspicious set outside its neighbors");
    }
    const auto it = w.find(report.reporter);
    const double weight = it == w.end() ? 0.0 : it->second;
    CheckProbability(weight, "trust weight");
    if (!Bernoulli(rng, weight)) continue;
    const NodeSet vouched = Difference(report.neighbors, report.suspicious);
    const NodeSet dropped = Intersect(suspicious_, vouched);
    if (dropped.empty()) continue;
    suspicious_ = Difference(suspicious_, dropped);
    removed += dropped.size();
  }
  return removed;
}

void DetectorState::Record(bool detectable, std::size_t removed,
                           std::size_t arrived, std::size_t departed) {
  if (suspicious_.empty()) pfp_ = 0.0;
  TrajectoryPoint point;
  point.round = round();
  point.detectable = detectable;
  point.pfp_theoretic = pfp_;
  point.pfn_theoretic = pfn_theoretic();
  point.suspicious_size = suspicious_.size();
  point.removed_cooperative = removed;
  point.new_neighbors = arrived;
  point.left_neighbors = departed;
  trajectory_.push_back(point);
}

TrustWeights TrustWeightsDefault(const DetectorState& state) {
  TrustWeights w;
  for (NodeId v : state.neighbors()) {
    w.emplace_hint(w.end(), v, Contains(state.suspicious(), v) ? 0.0 : 1.0);
  }
  return w;
}

void DetectRoundBaseline(DetectorState& state, const RoundObservation& obs,
                         Rng& rng) {
  const auto step = state.Independent(obs, rng);
  state.pfp_ = PfpTheoreticCooperative(state.pfp_, step.ratio, 0,
                                       std::max<std::size_t>(1, state.neighbors_.size()));
  state.Record(state.history_.back().detectable, 0, 0, 0);
}

void DetectRoundCooperative(
    DetectorState& state, const RoundObservation& obs,
    std::span<const NeighborReport> reports, Rng& rng,
    const std::function<TrustWeights(const DetectorState&)>& weights) {
  const auto step = state.Independent(obs, rng);
  const std::size_t removed = state.Cooperative(reports, rng, weights);
  state.pfp_ = PfpTheoreticCooperative(
      state.pfp_, step.ratio, removed,
      std::max<std::size_t>(1, state.neighbors_.size()));
  state.Record(state.history_.back().detectable, removed, 0, 0);
}

void DetectRoundChurn(DetectorState& state, const RoundObservation& obs,
                      const std::vector<NeighborReport>* reports,
                      const NodeSet& arrived, const NodeSet& departed,
                      Rng& rng) {
  if (IntersectionSize(arrived, state.neighbors_) != 0) {
    throw std::invalid_argument("arriving nodes are already neighbors");
  }
  if (!IsSubset(departed, state.neighbors_)) {
    throw std::invalid_argument("departing nodes are not neighbors");
  }
  const std::size_t n_prev = state.neighbors_.size();
  const auto step = state.Independent(obs, rng);
  std::size_t removed = 0;
  if (reports != nullptr) {
    removed = state.Cooperative(*reports, rng, TrustWeightsDefault);
  }
  const std::size_t ls = IntersectionSize(state.suspicious_, departed);
  if (!arrived.empty() || !departed.empty()) {
    state.suspicious_ = Difference(Union(state.suspicious_, arrived), departed);
    state.neighbors_ = Difference(Union(state.neighbors_, arrived), departed);
    // Newcomers have not been observed yet, so they count as part of the
    // pool; leavers can no longer be observed at all.
    state.last_pool_ = std::make_shared<const NodeSet>(
        Difference(Union(*state.last_pool_, arrived), departed));
    state.history_.back().pool = state.last_pool_;
  }
  if (state.neighbors_.empty()) {
    state.pfp_ = 0.0;
  } else {
    state.pfp_ = PfpTheoreticChurn(state.pfp_, step.ratio, removed,
                                   arrived.size(), ls,
                                   std::max<std::size_t>(1, n_prev),
                                   state.neighbors_.size());
  }
  state.Record(state.history_.back().detectable, removed, arrived.size(),
               departed.size());
}

double PfnTheoretic(double delta, std::size_t detectable_count) {
  CheckProbability(delta, "delta");
  return 1.0 - std::pow(1.0 - delta, static_cast<double>(detectable_count));
}

double PfpTheoreticBaseline(const NodeSet& initial_neighbors,
                            std::span<const HistoryEntry> history) {
  return PfpTheoreticBaselineKnownK(initial_neighbors, history, 0);
}

double PfpTheoreticBaselineKnownK(const NodeSet& initial_neighbors,
                                  std::span<const HistoryEntry> history,
                                  std::size_t k) {
  const NodeSet* prev = &initial_neighbors;
  double pfp = 1.0;
  for (const HistoryEntry& entry : history) {
    if (!entry.detectable) continue;
    const double kept =
        static_cast<double>(IntersectionSize(*prev, *entry.pool)) -
        static_cast<double>(k);
    const double base = static_cast<double>(prev->size()) - static_cast<double>(k);
    if (base <= 0.0) return 0.0;
    pfp = Clamp01(pfp * (kept / base));
    prev = entry.pool.get();
  }
  return pfp;
}

double PfpTheoreticCooperative(double prev, double ratio, std::size_t c_size,
                               std::size_t n) {
  if (n == 0) throw std::invalid_argument("neighbor count must be positive");
  if (c_size == 0) return Clamp01(prev * ratio);
  const double nd = static_cast<double>(n);
  return Clamp01((prev * ratio * nd - static_cast<double>(c_size)) / nd);
}

double PfpTheoreticChurn(double prev, double ratio, std::size_t c_size,
                         std::size_t nu_size, std::size_t ls_size,
                         std::size_t n_prev, std::size_t n_now) {
  if (n_now == 0) throw std::invalid_argument("neighbor count must be positive");
  if (nu_size == 0 && ls_size == 0 && n_prev == n_now) {
    return PfpTheoreticCooperative(prev, ratio, c_size, n_now);
  }
  const double numerator = prev * ratio * static_cast<double>(n_prev) -
                           static_cast<double>(c_size) +
                           static_cast<double>(nu_size) -
                           static_cast<double>(ls_size);
  return Clamp01(numerator / static_cast<double>(n_now));
}

void EstimatorInputs::Validate() const {
  CheckProbability(p_hc, "p_hc");
  CheckProbability(p_d, "p_d");
  CheckProbability(delta, "delta");
  if (k > n) throw std::invalid_argument("k must not exceed N");
}

namespace {

void CheckFinite(const EstimatorInputs& in) {
  in.Validate();
  if (in.n <= in.k) {
    throw std::invalid_argument("need at least one honest neighbor (N > k)");
  }
  if (in.p_d == 0.0 || in.p_hc == 0.0) {
    throw DegenerateEstimateError(
        "p_d or p_hc is zero: the suspicious set never empties of honest "
        "neighbors");
  }
}

// P(D <= d): every honest neighbor was correct in at least one of d
// detectable rounds.
double CdfD(const EstimatorInputs& in, std::size_t d) {
  const double miss = std::pow(1.0 - in.p_hc, static_cast<double>(d));
  return std::pow(1.0 - miss, static_cast<double>(in.n - in.k));
}

}  // namespace

RPmf RDistribution(const EstimatorInputs& inputs, std::size_t r_max) {
  CheckFinite(inputs);
  std::vector<double> pd(r_max + 1, 0.0);
  for (std::size_t d = 1; d <= r_max; ++d) {
    pd[d] = CdfD(inputs, d) - CdfD(inputs, d - 1);
  }
  RPmf out;
  out.pmf.assign(r_max, 0.0);
  if (inputs.p_d == 1.0) {
    for (std::size_t r = 1; r <= r_max; ++r) out.pmf[r - 1] = pd[r];
  } else {
    for (std::size_t d = 1; d <= r_max; ++d) {
      if (pd[d] == 0.0) continue;
      // Rounds needed for the d-th detectable round: d successes plus a
      // negative-binomial number of failures.
      const boost::math::negative_binomial_distribution<double> nb(
          static_cast<double>(d), inputs.p_d);
      for (std::size_t r = d; r <= r_max; ++r) {
        out.pmf[r - 1] += pd[d] * boost::math::pdf(nb, static_cast<double>(r - d));
      }
    }
  }
  double total = 0.0;
  for (double v : out.pmf) total += v;
  out.tail = std::max(0.0, 1.0 - total);
  return out;
}

double ExpectedRounds(const EstimatorInputs& inputs) {
  CheckFinite(inputs);
  double expectation = 0.0;
  double prev = 0.0;
  for (std::size_t d = 1; d < 100000000; ++d) {
    const double cdf = CdfD(inputs, d);
    expectation += (cdf - prev) * static_cast<double>(d) / inputs.p_d;
    prev = cdf;
    if (1.0 - cdf < 1e-15) break;
  }
  return expectation;
}

double EstimatePhc(std::span<const std::size_t> correct_rounds,
                   std::size_t total_rounds) {
  if (correct_rounds.empty()) {
    throw std::invalid_argument("p_hc needs at least one honest neighbor");
  }
  if (total_rounds == 0) {
    throw std::invalid_argument("p_hc needs at least one round");
  }
  double sum = 0.0;
  for (std::size_t c : correct_rounds) {
    if (c > total_rounds) {
      throw std::invalid_argument("correct rounds exceed total rounds");
    }
    sum += static_cast<double>(c) / static_cast<double>(total_rounds);
  }
  return sum / static_cast<double>(correct_rounds.size());
}

double EstimatePd(std::span<const std::uint8_t> trustworthy, double p) {
  CheckProbability(p, "p");
  if (trustworthy.empty()) {
    throw std::invalid_argument("p_d needs a non-empty purchase history");
  }
  std::size_t hits = 0;
  for (std::uint8_t t : trustworthy) hits += t != 0;
  return p * static_cast<double>(hits) / static_cast<double>(trustworthy.size());
}

CompleteResult RunComplete(DetectorState& state, const RoundSource& next_round,
                           double pfp_star, std::uint32_t round_cap) {
  if (!(pfp_star > 0.0 && pfp_star <= 1.0)) {
    throw std::invalid_argument("P_fp threshold must lie in (0, 1]");
  }
  CompleteResult result;
  while (result.rounds < round_cap) {
    const std::uint32_t before = state.round();
    next_round(state);
    if (state.round() != before + 1) {
      throw std::logic_error("round source must advance exactly one round");
    }
    ++result.rounds;
    if (state.pfp_theoretic() <= pfp_star) {
      result.reached = true;
      break;
    }
  }
  result.blacklist = state.suspicious();
  result.trajectory = state.trajectory();
  return result;
}

void WriteTrajectoryCsv(std::span<const TrajectoryPoint> trajectory,
                        std::ostream& out) {
  out << "round,detectable,pfp_theoretic,pfn_theoretic,suspicious_size,"
         "removed_cooperative,new_neighbors,left_neighbors\n";
  for (const auto& p : trajectory) {
    out << p.round << ',' << (p.detectable ? 1 : 0) << ','
        << FormatDouble(p.pfp_theoretic) << ',' << FormatDouble(p.pfn_theoretic)
        << ',' << p.suspicious_size << ',' << p.removed_cooperative << ','
        << p.new_neighbors << ',' << p.left_neighbors << '\n';
  }
}

}  // namespace recwatch
