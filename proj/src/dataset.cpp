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


#include "recwatch/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>

#include "recwatch/detect.hpp"
#include "recwatch/format.hpp"
#include "recwatch/market.hpp"
#include "recwatch/observation.hpp"

namespace recwatch {

std::uint32_t IdMap::Intern(const std::string& id) {
  const auto [it, inserted] =
      index_.emplace(id, static_cast<std::uint32_t>(names_.size()));
  if (inserted) names_.push_back(id);
  return it->second;
}

std::optional<std::uint32_t> IdMap::Find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void IdMap::WriteCsv(std::ostream& out) const {
  out << "dense_id,original_id\n";
  for (std::size_t i = 0; i < names_.size(); ++i) {
    out << i << ',' << names_[i] << '\n';
  }
}

LoadedGraph LoadGraph(std::istream& in) {
  LoadedGraph out;
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t n = 0, m = 0;
      if (std::sscanf(line.c_str(), "# nodes=%zu edges=%zu", &n, &m) == 2) {
        out.header_nodes = n;
        out.header_edges = m;
      }
      continue;
    }
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      throw DatasetError("line " + std::to_string(line_no) +
                         ": expected two node ids, got '" + line + "'");
    }
    const NodeId u = out.ids.Intern(a);
    const NodeId v = out.ids.Intern(b);
    if (u == v) {
      ++out.self_loops;
      continue;
    }
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  const std::size_t raw = edges.size();
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  out.duplicate_edges = raw - edges.size();
  out.graph = Graph::FromEdges(out.ids.size(), edges);
  return out;
}

LoadedGraph LoadGraph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open edge file " + path);
  return LoadGraph(in);
}

namespace {

template <typename T>
bool ParseNumber(const std::string& s, T& value) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<RatingRecord> LoadRatings(std::istream& in) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<RatingRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (boost::algorithm::trim_copy(line).empty()) continue;
    std::vector<std::string> fields;
    for (std::string f : Tokenizer(line)) {
      boost::algorithm::trim(f);
      fields.push_back(std::move(f));
    }
    if (fields.size() != 3 && fields.size() != 4) {
      throw DatasetError("record " + std::to_string(line_no) +
                         ": expected user,item,rating[,order]");
    }
    RatingRecord rec;
    rec.user = fields[0];
    rec.item = fields[1];
    if (!ParseNumber(fields[2], rec.rating)) {
      if (out.empty() && line_no == 1) continue;  // header row
      throw DatasetError("record " + std::to_string(line_no) +
                         ": rating '" + fields[2] + "' is not a number");
    }
    rec.order = static_cast<std::int64_t>(out.size());
    if (fields.size() == 4 && !ParseNumber(fields[3], rec.order)) {
      throw DatasetError("record " + std::to_string(line_no) + ": order '" +
                         fields[3] + "' is not an integer");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RatingRecord> LoadRatings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open ratings file " + path);
  return LoadRatings(in);
}

std::optional<std::uint8_t> BinaryRatings::Value(std::uint32_t user,
                                                 std::uint32_t item) const {
  const auto& m = lookup[user];
  const auto it = m.find(item);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

BinaryRatings Binarize(const std::vector<RatingRecord>& records,
                       double threshold) {
  if (!(threshold >= 0.5 && threshold <= 5.0)) {
    throw std::invalid_argument("binarize threshold must lie in [0.5, 5]");
  }
  BinaryRatings out;
  struct Keyed {
    BinaryRatings::Entry entry;
    std::size_t position;
  };
  std::vector<std::vector<Keyed>> staged;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RatingRecord& r = records[i];
    const double twice = r.rating * 2.0;
    if (!std::isfinite(r.rating) || r.rating < 0.5 || r.rating > 5.0 ||
        std::fabs(twice - std::round(twice)) > 1e-9) {
      throw DatasetError("record " + std::to_string(i) + ": rating " +
                         FormatDouble(r.rating) +
                         " is off the half-point grid [0.5, 5]");
    }
    const std::uint32_t u = out.users.Intern(r.user);
    const std::uint32_t it = out.items.Intern(r.item);
    if (u >= staged.size()) staged.resize(u + 1);
    staged[u].push_back(
        {{it, static_cast<std::uint8_t>(r.rating > threshold ? 1 : 0), r.order},
         i});
  }
  out.by_user.resize(staged.size());
  out.lookup.resize(staged.size());
  for (std::size_t u = 0; u < staged.size(); ++u) {
    auto& list = staged[u];
    std::sort(list.begin(), list.end(), [](const Keyed& a, const Keyed& b) {
      return std::tie(a.entry.order, a.position) <
             std::tie(b.entry.order, b.position);
    });
    for (const Keyed& k : list) {
      out.lookup[u][k.entry.item] = k.entry.value;  // later rating wins
    }
    std::set<std::uint32_t> kept;
    for (auto it = list.rbegin(); it != list.rend(); ++it) {
      if (kept.insert(it->entry.item).second) {
        out.by_user[u].push_back(it->entry);
      }
    }
    std::reverse(out.by_user[u].begin(), out.by_user[u].end());
  }
  return out;
}

namespace {

std::vector<std::array<std::size_t, 2>> CountValues(const BinaryRatings& data) {
  std::vector<std::array<std::size_t, 2>> counts(data.items.size(), {0, 0});
  for (const auto& list : data.by_user) {
    for (const auto& e : list) ++counts[e.item][e.value];
  }
  return counts;
}

}  // namespace

std::vector<std::uint8_t> MajorityValues(const BinaryRatings& data) {
  const auto counts = CountValues(data);
  std::vector<std::uint8_t> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = counts[i][1] >= counts[i][0] ? 1 : 0;
  }
  return out;
}

ConsensusReport Consensus(const BinaryRatings& data, double threshold) {
  ConsensusReport report;
  report.threshold = threshold;
  const auto counts = CountValues(data);
  std::size_t above = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::size_t n = counts[i][0] + counts[i][1];
    if (n < 2) continue;
    const double agree =
        static_cast<double>(std::max(counts[i][0], counts[i][1])) /
        static_cast<double>(n);
    report.agreement.emplace_back(static_cast<std::uint32_t>(i), agree);
    if (agree > threshold) ++above;
  }
  if (!report.agreement.empty()) {
    report.fraction_above = static_cast<double>(above) /
                            static_cast<double>(report.agreement.size());
  }
  return report;
}

void ReplayConfig::Validate() const {
  if (!(dishonest_fraction >= 0.0 && dishonest_fraction < 1.0)) {
    throw std::invalid_argument("dishonest_fraction must lie in [0, 1)");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in [0, 1]");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("p must lie in [0, 1]");
  }
  if (detector.empty()) throw std::invalid_argument("detector id is empty");
}

ReplayResult InjectAndReplay(const LoadedGraph& graph, const BinaryRatings& data,
                             const ReplayConfig& config, Rng& rng) {
  config.Validate();
  const auto det_node = graph.ids.Find(config.detector);
  const auto det_user = data.users.Find(config.detector);
  if (!det_node) {
    throw DatasetError("detector " + config.detector + " is not in the graph");
  }
  if (!det_user || data.by_user[*det_user].size() < 2) {
    throw DatasetError("detector " + config.detector +
                       " has fewer than two usable rounds");
  }
  const auto& det_lookup = data.lookup[*det_user];

  ReplayResult result;
  for (NodeId v : graph.graph.neighbors(*det_node)) {
    const auto user = data.users.Find(graph.ids.Name(v));
    if (!user) continue;
    std::size_t overlap = 0;
    for (const auto& e : data.by_user[*user]) overlap += det_lookup.count(e.item);
    if (overlap >= config.min_overlap) result.neighbors.push_back(*user);
  }
  std::sort(result.neighbors.begin(), result.neighbors.end());
  if (result.neighbors.size() < config.min_neighbors) {
    throw DatasetError("detector " + config.detector + " has only " +
                       std::to_string(result.neighbors.size()) +
                       " neighbors with enough overlapping ratings");
  }

  std::size_t k = static_cast<std::size_t>(
      std::llround(config.dishonest_fraction *
                   static_cast<double>(result.neighbors.size())));
  if (config.dishonest_fraction > 0.0 && k == 0) k = 1;
  std::vector<std::uint32_t> shuffled = result.neighbors;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  result.dishonest.assign(shuffled.begin(), shuffled.begin() + k);
  std::sort(result.dishonest.begin(), result.dishonest.end());

  if (!config.promoted_item.empty()) {
    const auto item = data.items.Find(config.promoted_item);
    if (!item) {
      throw DatasetError("promoted item " + config.promoted_item +
                         " has no ratings");
    }
    result.promoted_item = *item;
  } else {
    const auto& rounds = data.by_user[*det_user];
    const auto low = std::find_if(rounds.begin(), rounds.end(),
                                  [](const auto& e) { return e.value == 0; });
    result.promoted_item = low != rounds.end() ? low->item : rounds.front().item;
  }

  const auto majority = MajorityValues(data);
  const AgentPolicy attacker =
      AgentPolicy::Dishonest(result.promoted_item, config.delta);
  NodeSet neighbors(result.neighbors.begin(), result.neighbors.end());
  const NodeSet dishonest(result.dishonest.begin(), result.dishonest.end());
  const NodeSet honest = Difference(neighbors, dishonest);
  DetectorState state(neighbors, config.p, config.delta);

  for (const auto& round : data.by_user[*det_user]) {
    RoundObservation obs;
    obs.product = round.item;
    obs.product_type = round.value;
    for (NodeId j : neighbors) {
      const auto value = data.Value(j, round.item);
      if (!value) {
        obs.silent.push_back(j);
        continue;
      }
      const Polarity pol =
          Contains(dishonest, j)
              ? DishonestRecommend(attacker, round.item, majority[round.item], rng)
              : CorrectPolarity(*value);
      (Classify(round.value, pol) == Classification::kCorrect ? obs.correct
                                                              : obs.wrong)
          .push_back(j);
    }
    DetectRoundBaseline(state, obs, rng);
    ReplayPoint point;
    point.round = state.round();
    point.detectable = state.history().back().detectable;
    point.pfp_theoretic = state.pfp_theoretic();
    point.suspicious_size = state.suspicious().size();
    point.pfp_empirical =
        honest.empty() ? 0.0
                       : static_cast<double>(
                             IntersectionSize(honest, state.suspicious())) /
                             static_cast<double>(honest.size());
    point.pfn_empirical =
        dishonest.empty()
            ? std::numeric_limits<double>::quiet_NaN()
            : static_cast<double>(dishonest.size() -
                                  IntersectionSize(dishonest, state.suspicious())) /
                  static_cast<double>(dishonest.size());
    result.trajectory.push_back(point);
  }
  return result;
}

SampleDataset GenerateSample(const SampleParams& params) {
  if (params.users < 50 || params.items < 10 ||
      params.detector_ratings > params.items ||
      params.min_user_ratings > params.max_user_ratings ||
      params.max_user_ratings > params.items) {
    throw std::invalid_argument("inconsistent sample parameters");
  }
  GlpParams gp;
  gp.target_nodes = params.users;
  gp.initial_clique = 10;
  gp.edges_per_step = 5;
  gp.beta = -2.5;
  gp.p_add_edges = PAddEdgesFor(params.users, params.target_edges, 5);
  gp.seed = DeriveSeed(params.seed, 1);
  SampleDataset out;
  out.graph = GenerateGlp(gp);

  Rng rng(DeriveSeed(params.seed, 2));
  NodeId detector = 0;
  for (NodeId u = 0; u < out.graph.node_count(); ++u) {
    if (out.graph.degree(u) > out.graph.degree(detector)) detector = u;
  }
  out.detector = std::to_string(detector);

  // Which items each user rates, in temporal order.
  std::vector<std::uint32_t> all_items(params.items);
  std::iota(all_items.begin(), all_items.end(), 0u);
  std::vector<std::vector<std::uint32_t>> rated(out.graph.node_count());
  std::uniform_int_distribution<std::size_t> count(params.min_user_ratings,
                                                   params.max_user_ratings);
  for (NodeId u = 0; u < out.graph.node_count(); ++u) {
    const std::size_t n = u == detector ? params.detector_ratings : count(rng);
    std::vector<std::uint32_t> pick = all_items;
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(n);
    rated[u] = std::move(pick);
  }
  std::vector<std::vector<NodeId>> raters(params.items);
  for (NodeId u = 0; u < out.graph.node_count(); ++u) {
    for (std::uint32_t it : rated[u]) raters[it].push_back(u);
  }

  // Plant the agreement level of each item exactly.
  const auto consistent_items = static_cast<std::size_t>(std::llround(
      params.consistent_item_share * static_cast<double>(params.items)));
  std::vector<std::uint32_t> order = all_items;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::uint8_t> consistent(params.items, 0);
  for (std::size_t i = 0; i < consistent_items; ++i) consistent[order[i]] = 1;

  std::vector<std::unordered_map<std::uint32_t, std::uint8_t>> value(
      out.graph.node_count());
  std::size_t analyzed = 0, planted_above = 0;
  for (std::uint32_t it = 0; it < params.items; ++it) {
    auto& who = raters[it];
    const std::uint8_t major = Bernoulli(rng, 0.7) ? 1 : 0;
    const double share = consistent[it] ? params.consistent_agreement
                                        : params.inconsistent_agreement;
    const double exact = share * static_cast<double>(who.size());
    const auto agree = static_cast<std::size_t>(
        consistent[it] ? std::ceil(exact) : std::floor(exact));
    std::shuffle(who.begin(), who.end(), rng);
    for (std::size_t r = 0; r < who.size(); ++r) {
      value[who[r]][it] = r < agree ? major : static_cast<std::uint8_t>(1 - major);
    }
    if (who.size() >= 2) {
      ++analyzed;
      planted_above += consistent[it];
    }
  }
  out.planted_fraction_above =
      analyzed == 0 ? 0.0
                    : static_cast<double>(planted_above) /
                          static_cast<double>(analyzed);

  std::uniform_int_distribution<int> high(6, 10), low(1, 5);  // half stars
  std::int64_t clock = 0;
  for (NodeId u = 0; u < out.graph.node_count(); ++u) {
    for (std::uint32_t it : rated[u]) {
      RatingRecord rec;
      rec.user = std::to_string(u);
      rec.item = "m" + std::to_string(it);
      rec.rating = (value[u][it] ? high(rng) : low(rng)) / 2.0;
      rec.order = clock++;
      out.ratings.push_back(std::move(rec));
    }
  }
  return out;
}

void WriteRatingsCsv(const std::vector<RatingRecord>& ratings,
                     std::ostream& out) {
  out << "user,item,rating,order\n";
  for (const auto& r : ratings) {
    out << r.user << ',' << r.item << ',' << FormatDouble(r.rating) << ','
        << r.order << '\n';
  }
}

}  // namespace recwatch
