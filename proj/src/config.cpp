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


#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "recwatch/experiment.hpp"

namespace recwatch {

namespace pt = boost::property_tree;

const char* ToString(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kMarketShare: return "market_share";
    case ExperimentKind::kDetection: return "detection";
    case ExperimentKind::kCooperative: return "cooperative";
    case ExperimentKind::kChurn: return "churn";
    case ExperimentKind::kRDistribution: return "r_distribution";
    case ExperimentKind::kReplay: return "replay";
  }
  return "unknown";
}

GlpParams ExperimentConfig::ResolvedGraph() const {
  GlpParams out = graph;
  out.p_add_edges = p_add_edges
                        ? *p_add_edges
                        : PAddEdgesFor(graph.target_nodes, target_edges,
                                       graph.edges_per_step);
  return out;
}

std::size_t ExperimentConfig::PurchasesPerRound(std::size_t node_count) const {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(
             purchases_fraction * static_cast<double>(node_count))));
}

namespace {

class Reader {
 public:
  Reader(const pt::ptree& tree, std::vector<FieldError>& errors)
      : tree_(tree), errors_(errors) {}

  template <typename T>
  void Get(const std::string& path, T& field) {
    seen_.insert(path);
    const auto raw = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!raw) return;
    try {
      field = boost::lexical_cast<T>(Trim(*raw));
    } catch (const boost::bad_lexical_cast&) {
      errors_.push_back({path, "cannot parse '" + *raw + "'"});
    }
  }

  void Get(const std::string& path, std::string& field) {
    seen_.insert(path);
    if (auto raw = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'))) {
      field = Trim(*raw);
    }
  }

  void Get(const std::string& path, bool& field) {
    std::string text;
    Get(path, text);
    if (text.empty()) return;
    for (char& c : text) c = static_cast<char>(std::tolower(c));
    if (text == "true" || text == "yes" || text == "1" || text == "on") {
      field = true;
    } else if (text == "false" || text == "no" || text == "0" || text == "off") {
      field = false;
    } else {
      errors_.push_back({path, "expected a boolean, got '" + text + "'"});
    }
  }

  bool Has(const std::string& path) const {
    return static_cast<bool>(
        tree_.get_optional<std::string>(pt::ptree::path_type(path, '.')));
  }

  void ReportUnknown() {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) {
        errors_.push_back({section, "key outside any section"});
        continue;
      }
      for (const auto& [key, unused] : body) {
        const std::string path = section + "." + key;
        if (!seen_.count(path)) errors_.push_back({path, "unknown field"});
      }
    }
  }

 private:
  static std::string Trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  }

  const pt::ptree& tree_;
  std::vector<FieldError>& errors_;
  std::set<std::string> seen_;
};

std::string Resolve(const std::string& base_dir, const std::string& file) {
  if (file.empty() || base_dir.empty()) return file;
  const std::filesystem::path p(file);
  if (p.is_absolute()) return file;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

ParsedConfig ParseConfig(std::istream& in, const std::string& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  ParsedConfig out;
  ExperimentConfig& c = out.config;
  Reader r(tree, out.errors);

  std::string kind;
  r.Get("experiment.kind", kind);
  if (!kind.empty()) {
    bool known = false;
    for (auto k : {ExperimentKind::kMarketShare, ExperimentKind::kDetection,
                   ExperimentKind::kCooperative, ExperimentKind::kChurn,
                   ExperimentKind::kRDistribution, ExperimentKind::kReplay}) {
      if (kind == ToString(k)) {
        c.kind = k;
        known = true;
      }
    }
    if (!known) out.errors.push_back({"experiment.kind", "unknown kind '" + kind + "'"});
  }

  r.Get("graph.target_nodes", c.graph.target_nodes);
  r.Get("graph.initial_clique", c.graph.initial_clique);
  r.Get("graph.edges_per_step", c.graph.edges_per_step);
  r.Get("graph.beta", c.graph.beta);
  r.Get("graph.target_edges", c.target_edges);
  if (r.Has("graph.p_add_edges")) {
    double v = 0.0;
    r.Get("graph.p_add_edges", v);
    c.p_add_edges = v;
  }
  r.Get("graph.edge_file", c.edge_file);

  r.Get("market.num_products", c.num_products);
  r.Get("market.promoted_products", c.promoted_products);
  r.Get("market.dishonest_fraction", c.dishonest_fraction);
  r.Get("market.delta", c.delta);

  r.Get("detection.p", c.p);
  r.Get("detection.pfp_star", c.pfp_star);
  std::string trust;
  r.Get("detection.trust", trust);
  if (trust == "suspicion") {
    c.trust = TrustStrategy::kSuspicion;
  } else if (trust == "constant") {
    c.trust = TrustStrategy::kConstant;
  } else if (!trust.empty()) {
    out.errors.push_back({"detection.trust", "expected suspicion or constant"});
  }
  r.Get("detection.trust_weight", c.trust_weight);

  r.Get("engine.purchases_fraction", c.purchases_fraction);
  r.Get("engine.total_purchases", c.total_purchases);
  r.Get("engine.rounds", c.rounds);
  r.Get("engine.round_cap", c.round_cap);
  r.Get("engine.uniform_start", c.uniform_start);
  r.Get("engine.reshare_owned", c.reshare_owned);
  r.Get("engine.detector_uniform_choice", c.detector_uniform_choice);

  r.Get("churn.p_new_neighbor", c.churn.p_new_neighbor);
  r.Get("churn.p_leave", c.churn.p_leave);

  r.Get("run.replicates", c.replicates);
  r.Get("run.seed", c.seed);
  r.Get("run.workers", c.workers);
  r.Get("run.output_dir", c.output_dir);
  r.Get("run.svg", c.svg);

  r.Get("replay.ratings_file", c.ratings_file);
  r.Get("replay.edge_file", c.replay_edge_file);
  r.Get("replay.detector", c.detector);
  r.Get("replay.promoted_item", c.promoted_item);
  r.Get("replay.dishonest_fraction", c.replay_dishonest_fraction);
  r.Get("replay.binarize_threshold", c.binarize_threshold);

  r.Get("sample.users", c.sample.users);
  r.Get("sample.target_edges", c.sample.target_edges);
  r.Get("sample.items", c.sample.items);
  r.Get("sample.detector_ratings", c.sample.detector_ratings);
  r.Get("sample.min_user_ratings", c.sample.min_user_ratings);
  r.Get("sample.max_user_ratings", c.sample.max_user_ratings);
  r.Get("sample.seed", c.sample.seed);

  r.ReportUnknown();

  c.edge_file = Resolve(base_dir, c.edge_file);
  c.ratings_file = Resolve(base_dir, c.ratings_file);
  c.replay_edge_file = Resolve(base_dir, c.replay_edge_file);
  c.output_dir = Resolve(base_dir, c.output_dir);
  return out;
}

ParsedConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  return ParseConfig(in, std::filesystem::path(path).parent_path().string());
}

std::vector<FieldError> ValidateConfig(const ExperimentConfig& c) {
  std::vector<FieldError> errors;
  auto require = [&](bool ok, const char* path, const char* message) {
    if (!ok) errors.push_back({path, message});
  };
  auto in_closed = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  auto readable = [](const std::string& file) {
    return std::ifstream(file).good();
  };

  const bool synthetic = c.kind != ExperimentKind::kReplay;
  if (synthetic && !c.edge_file.empty()) {
    require(readable(c.edge_file), "graph.edge_file", "file is not readable");
  } else if (synthetic) {
    const GlpParams& g = c.graph;
    require(g.edges_per_step >= 1, "graph.edges_per_step", "must be at least 1");
    require(g.initial_clique >= g.edges_per_step, "graph.initial_clique",
            "must be at least edges_per_step");
    require(g.target_nodes > g.initial_clique, "graph.target_nodes",
            "must exceed initial_clique");
    if (c.p_add_edges) {
      require(*c.p_add_edges >= 0.0 && *c.p_add_edges < 1.0,
              "graph.p_add_edges", "must lie in [0, 1)");
    }
    if (errors.empty()) {
      try {
        c.ResolvedGraph().Validate();
      } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        errors.push_back({what.find("beta") != std::string::npos
                              ? "graph.beta"
                              : c.p_add_edges ? "graph.p_add_edges"
                                              : "graph.target_edges",
                          what});
      }
    }
  }

  require(c.num_products >= 2, "market.num_products", "must be at least 2");
  require(c.promoted_products >= 1 && c.promoted_products < c.num_products,
          "market.promoted_products", "must lie in [1, num_products)");
  require(c.dishonest_fraction >= 0.0 && c.dishonest_fraction < 1.0,
          "market.dishonest_fraction", "must lie in [0, 1)");
  require(in_closed(c.delta, 0.0, 1.0), "market.delta", "must lie in [0, 1]");

  require(c.p > 0.0 && c.p <= 1.0, "detection.p", "must lie in (0, 1]");
  require(c.pfp_star > 0.0 && c.pfp_star <= 1.0, "detection.pfp_star",
          "must lie in (0, 1]");
  require(in_closed(c.trust_weight, 0.0, 1.0), "detection.trust_weight",
          "must lie in [0, 1]");

  require(c.purchases_fraction > 0.0 && c.purchases_fraction <= 1.0,
          "engine.purchases_fraction", "must lie in (0, 1]");
  require(c.total_purchases >= 1, "engine.total_purchases", "must be positive");
  require(c.rounds >= 1, "engine.rounds", "must be positive");
  require(c.round_cap >= 1, "engine.round_cap", "must be positive");
  require(c.rounds <= c.round_cap, "engine.rounds", "must not exceed round_cap");

  require(in_closed(c.churn.p_new_neighbor, 0.0, 1.0), "churn.p_new_neighbor",
          "must lie in [0, 1]");
  require(in_closed(c.churn.p_leave, 0.0, 1.0), "churn.p_leave",
          "must lie in [0, 1]");

  require(c.replicates >= 1, "run.replicates", "must be at least 1");
  require(c.workers >= 1, "run.workers", "must be at least 1");
  require(!c.output_dir.empty(), "run.output_dir", "must not be empty");

  if (c.kind == ExperimentKind::kReplay) {
    require(c.replay_dishonest_fraction >= 0.0 && c.replay_dishonest_fraction < 1.0,
            "replay.dishonest_fraction", "must lie in [0, 1)");
    require(c.binarize_threshold >= 0.5 && c.binarize_threshold < 5.0,
            "replay.binarize_threshold", "must lie in [0.5, 5)");
    if (!c.ratings_file.empty() || !c.replay_edge_file.empty()) {
      require(readable(c.ratings_file), "replay.ratings_file",
              "file is not readable");
      require(readable(c.replay_edge_file), "replay.edge_file",
              "file is not readable");
    } else {
      const SampleParams& s = c.sample;
      require(s.users >= 50, "sample.users", "must be at least 50");
      require(s.items >= 10, "sample.items", "must be at least 10");
      require(s.detector_ratings <= s.items, "sample.detector_ratings",
              "must not exceed items");
      require(s.min_user_ratings <= s.max_user_ratings, "sample.min_user_ratings",
              "must not exceed max_user_ratings");
      require(s.max_user_ratings <= s.items, "sample.max_user_ratings",
              "must not exceed items");
    }
  }
  return errors;
}

}  // namespace recwatch
