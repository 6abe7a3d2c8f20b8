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


#ifndef RECWATCH_DATASET_HPP_
#define RECWATCH_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "recwatch/graph.hpp"
#include "recwatch/rng.hpp"

namespace recwatch {

/// Malformed input; the message carries the line or record number.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Opaque external ids mapped to dense ids in order of first appearance.
class IdMap {
 public:
  std::uint32_t Intern(const std::string& id);
  std::optional<std::uint32_t> Find(const std::string& id) const;
  const std::string& Name(std::uint32_t dense) const { return names_[dense]; }
  std::size_t size() const { return names_.size(); }

  /// CSV `dense_id,original_id`.
  void WriteCsv(std::ostream& out) const;

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
};

struct LoadedGraph {
  Graph graph;
  IdMap ids;
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
  std::optional<std::size_t> header_nodes;
  std::optional<std::size_t> header_edges;
};

/// Reads the edge-list format: optional `# nodes=<n> edges=<m>` header,
/// other `#` lines ignored, one `u v` pair per line. Duplicates (in either
/// direction) are merged and counted; self-loops are dropped and counted.
LoadedGraph LoadGraph(std::istream& in);
LoadedGraph LoadGraph(const std::string& path);

struct RatingRecord {
  std::string user;
  std::string item;
  double rating = 0.0;
  std::int64_t order = 0;  // file position unless a 4th column is given
};

/// CSV `user,item,rating[,order]`; a leading header row is skipped.
std::vector<RatingRecord> LoadRatings(std::istream& in);
std::vector<RatingRecord> LoadRatings(const std::string& path);

/// Binary valuations per user, plus each user's ratings in temporal order.
struct BinaryRatings {
  struct Entry {
    std::uint32_t item = 0;
    std::uint8_t value = 0;
    std::int64_t order = 0;
  };
  IdMap users;
  IdMap items;
  std::vector<std::vector<Entry>> by_user;  // sorted by (order, file position)
  std::vector<std::unordered_map<std::uint32_t, std::uint8_t>> lookup;

  std::optional<std::uint8_t> Value(std::uint32_t user,
                                    std::uint32_t item) const;
};

/// rating > threshold is trustworthy (1). Ratings off the half-point grid or
/// outside [0.5, 5] are rejected with their record index. A user rating the
/// same item twice keeps the later rating.
BinaryRatings Binarize(const std::vector<RatingRecord>& records,
                       double threshold = 2.5);

struct ConsensusReport {
  std::vector<std::pair<std::uint32_t, double>> agreement;  // item, fraction
  double fraction_above = 0.0;  // share of items with agreement > threshold
  double threshold = 0.75;
};

/// Agreement of each item's raters with its majority valuation. Items with
/// fewer than two raters are left out.
ConsensusReport Consensus(const BinaryRatings& data, double threshold = 0.75);

/// Majority value per item (ties count as trustworthy).
std::vector<std::uint8_t> MajorityValues(const BinaryRatings& data);

struct ReplayConfig {
  std::string detector;
  double dishonest_fraction = 0.1;
  std::string promoted_item;  // empty: the detector's earliest low-rated item
  double delta = 0.1;
  double p = 0.8;
  std::size_t min_overlap = 2;
  std::size_t min_neighbors = 10;

  void Validate() const;
};

struct ReplayPoint {
  std::uint32_t round = 0;
  bool detectable = false;
  double pfp_empirical = 1.0;
  double pfn_empirical = 0.0;  // NaN when no neighbor is dishonest
  double pfp_theoretic = 1.0;
  std::size_t suspicious_size = 0;
};

struct ReplayResult {
  std::vector<ReplayPoint> trajectory;
  std::vector<std::uint32_t> neighbors;  // user ids in the rating index
  std::vector<std::uint32_t> dishonest;
  std::uint32_t promoted_item = 0;
};

/// Turns the detector's ratings into rounds. Each rating is one purchase;
/// a usable neighbor who rated the same item anywhere recommends with its
/// own valuation, dishonest neighbors have that recommendation regenerated by
/// the intelligent strategy, everyone else is silent.
ReplayResult InjectAndReplay(const LoadedGraph& graph, const BinaryRatings& data,
                             const ReplayConfig& config, Rng& rng);

struct SampleParams {
  std::size_t users = 500;
  std::size_t target_edges = 3000;
  std::size_t items = 400;
  std::size_t detector_ratings = 200;
  std::size_t min_user_ratings = 4;
  std::size_t max_user_ratings = 40;
  double consistent_item_share = 0.9;  // items planted above 75% agreement
  double consistent_agreement = 0.85;
  double inconsistent_agreement = 0.6;
  std::uint64_t seed = 7;
};

struct SampleDataset {
  Graph graph;
  std::vector<RatingRecord> ratings;
  std::string detector;  // external id of the intended detector
  double planted_fraction_above = 0.0;  // exact share of consistent items
};

/// Semi-synthetic social rating data with a known per-item agreement.
SampleDataset GenerateSample(const SampleParams& params);
void WriteRatingsCsv(const std::vector<RatingRecord>& ratings,
                     std::ostream& out);

}  // namespace recwatch

#endif  // RECWATCH_DATASET_HPP_
