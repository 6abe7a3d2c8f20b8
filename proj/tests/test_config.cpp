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


#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "doctest.h"
#include "recwatch/experiment.hpp"

using namespace recwatch;
namespace fs = std::filesystem;

namespace {

std::string SourcePath(const std::string& rel) {
  return std::string(RECWATCH_SOURCE_DIR) + "/" + rel;
}

bool HasError(const std::vector<FieldError>& errors, const std::string& path) {
  for (const auto& e : errors) {
    if (e.path == path) return true;
  }
  return false;
}

ParsedConfig Parse(const std::string& text, const std::string& base = "") {
  std::istringstream in(text);
  return ParseConfig(in, base);
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path ScratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("recwatch_test_" + name);
  fs::remove_all(dir);
  return dir;
}

// A few hundred nodes keeps every experiment kind under a second.
ExperimentConfig Small(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.graph.target_nodes = 300;
  c.graph.initial_clique = 10;
  c.graph.edges_per_step = 5;
  c.graph.beta = -2.5;
  c.target_edges = 2000;
  c.dishonest_fraction = 0.1;
  c.rounds = 12;
  c.round_cap = 60;
  c.replicates = 6;
  c.total_purchases = 600;
  c.churn.p_new_neighbor = 0.3;
  c.churn.p_leave = 0.02;
  return c;
}

}  // namespace

TEST_CASE("field errors carry their path") {
  auto parsed = Parse("[experiment]\nkind = detection\n[market]\ndelta = 1.5\n");
  CHECK(parsed.errors.empty());
  CHECK(HasError(ValidateConfig(parsed.config), "market.delta"));

  parsed = Parse("[run]\nreplicates = 0\n");
  CHECK(HasError(ValidateConfig(parsed.config), "run.replicates"));

  parsed = Parse("[engine]\nrounds = 600\nround_cap = 500\n");
  CHECK(HasError(ValidateConfig(parsed.config), "engine.rounds"));

  parsed = Parse("[market]\ndleta = 0.2\n[bogus]\nx = 1\n");
  CHECK(HasError(parsed.errors, "market.dleta"));
  CHECK(HasError(parsed.errors, "bogus.x"));

  parsed = Parse("[detection]\np = high\ntrust = maybe\n[engine]\nuniform_start = perhaps\n");
  CHECK(HasError(parsed.errors, "detection.p"));
  CHECK(HasError(parsed.errors, "detection.trust"));
  CHECK(HasError(parsed.errors, "engine.uniform_start"));

  parsed = Parse("[experiment]\nkind = nonsense\n");
  CHECK(HasError(parsed.errors, "experiment.kind"));

  parsed = Parse("[graph]\nbeta = -9\n");
  CHECK(HasError(ValidateConfig(parsed.config), "graph.beta"));
}

TEST_CASE("parsed values and relative paths") {
  const auto parsed = Parse(
      "[experiment]\nkind = replay\n[replay]\nratings_file = r.csv\n"
      "edge_file = /abs/e.txt\ndetector = 42\n[run]\noutput_dir = out\nseed = 9\n"
      "workers = 3\nsvg = true\n[detection]\ntrust = constant\ntrust_weight = 0.5\n",
      "/base/dir");
  REQUIRE(parsed.errors.empty());
  const auto& c = parsed.config;
  CHECK(c.kind == ExperimentKind::kReplay);
  CHECK(fs::path(c.ratings_file) == fs::path("/base/dir/r.csv"));
  CHECK(c.replay_edge_file == "/abs/e.txt");
  CHECK(fs::path(c.output_dir) == fs::path("/base/dir/out"));
  CHECK(c.detector == "42");
  CHECK(c.seed == 9);
  CHECK(c.workers == 3);
  CHECK(c.svg);
  CHECK(c.trust == TrustStrategy::kConstant);
  CHECK(c.trust_weight == 0.5);
  CHECK(HasError(ValidateConfig(c), "replay.ratings_file"));
}

TEST_CASE("shipped configs validate") {
  std::set<ExperimentKind> kinds;
  for (const char* name : {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}) {
    CAPTURE(name);
    const auto parsed = LoadConfig(SourcePath(std::string("configs/") + name + ".cfg"));
    CHECK(parsed.errors.empty());
    CHECK(ValidateConfig(parsed.config).empty());
    kinds.insert(parsed.config.kind);
  }
  CHECK(kinds.size() == 6);
  CHECK_THROWS_AS(LoadConfig("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("derived quantities") {
  ExperimentConfig c;
  CHECK(c.PurchasesPerRound(8000) == 800);
  CHECK(c.PurchasesPerRound(3) == 1);
  const GlpParams g = c.ResolvedGraph();
  CHECK(g.p_add_edges == doctest::Approx(PAddEdgesFor(8000, 70000, 8)));
  c.p_add_edges = 0.2;
  CHECK(c.ResolvedGraph().p_add_edges == 0.2);
}

TEST_CASE("replicate loop") {
  for (std::size_t workers : {1u, 3u}) {
    std::vector<std::atomic<int>> hits(25);
    ForEachReplicate(25, workers, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  std::atomic<int> ran{0};
  CHECK_THROWS_AS(ForEachReplicate(10, 2,
                                   [&](std::size_t i) {
                                     ++ran;
                                     if (i == 4) throw std::domain_error("x");
                                   }),
                  std::domain_error);
  CHECK(ran.load() >= 5);
}

TEST_CASE("scenario construction") {
  const ExperimentConfig c = Small(ExperimentKind::kDetection);
  const Scenario s = MakeScenario(c, 11);
  std::size_t dishonest = 0;
  for (const auto& p : s.policies) dishonest += p.dishonest();
  CHECK(dishonest == 30);
  CHECK_FALSE(s.policies[s.detector].dishonest());
  std::size_t bad = 0, good = 0;
  for (NodeId v : s.graph.neighbors(s.detector)) {
    (s.policies[v].dishonest() ? bad : good) += 1;
  }
  CHECK(bad >= 1);
  CHECK(good >= 2);
  const Scenario again = MakeScenario(c, 11);
  CHECK(again.detector == s.detector);
}

TEST_CASE("artifacts are identical across worker counts") {
  for (auto kind : {ExperimentKind::kMarketShare, ExperimentKind::kDetection,
                    ExperimentKind::kCooperative, ExperimentKind::kChurn,
                    ExperimentKind::kRDistribution, ExperimentKind::kReplay}) {
    const std::string kind_name = ToString(kind);
    CAPTURE(kind_name);
    ExperimentConfig c = Small(kind);
    REQUIRE(ValidateConfig(c).empty());
    const fs::path a = ScratchDir("a"), b = ScratchDir("b");
    c.output_dir = a.string();
    c.workers = 1;
    const auto summary = RunExperiment(c);
    CHECK_FALSE(summary.empty());
    c.output_dir = b.string();
    c.workers = 2;
    RunExperiment(c);
    const std::string name = ArtifactName(kind);
    const std::string csv = Slurp(a / name);
    CHECK_FALSE(csv.empty());
    CHECK(csv == Slurp(b / name));
    const std::string stem = fs::path(name).stem().string();
    CHECK(Slurp(a / (stem + "_summary.csv")) == Slurp(b / (stem + "_summary.csv")));
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("unwritable output and chart rendering") {
  ExperimentConfig c = Small(ExperimentKind::kMarketShare);
  c.output_dir = "/proc/recwatch_cannot_write";
  CHECK_THROWS(RunExperiment(c));

  const fs::path dir = ScratchDir("chart");
  c.output_dir = dir.string();
  c.kind = ExperimentKind::kDetection;
  c.svg = true;
  RunExperiment(c);
  const fs::path svg = dir / "fig3_pfp_pfn.svg";
  REQUIRE(fs::exists(svg));
  CHECK(Slurp(svg).rfind("<svg", 0) == 0);
  const fs::path again = dir / "again.svg";
  RenderCsvChart((dir / "fig3_pfp_pfn.csv").string(), again.string());
  CHECK(Slurp(again) == Slurp(svg));
  CHECK_THROWS(RenderCsvChart((dir / "missing.csv").string(), again.string()));
  fs::remove_all(dir);
}
