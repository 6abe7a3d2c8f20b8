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


// Command-line entry point. Exit codes: 0 ok, 1 invalid input, 2 runtime
// failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include "CLI11.hpp"
#include "recwatch/dataset.hpp"
#include "recwatch/experiment.hpp"
#include "recwatch/format.hpp"
#include "recwatch/graph.hpp"

namespace {

using namespace recwatch;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> replicates;
  bool svg = false;

  void Attach(CLI::App* app) {
    app->add_option("--seed", seed, "Base seed");
    app->add_option("--out", out, "Output directory");
    app->add_option("--workers", workers, "Concurrent replicates");
    app->add_option("--replicates", replicates, "Number of replicates");
    app->add_flag("--svg", svg, "Also write SVG charts");
  }

  void Apply(ExperimentConfig& c) const {
    if (seed) c.seed = *seed;
    if (out) c.output_dir = *out;
    if (workers) c.workers = *workers;
    if (replicates) c.replicates = *replicates;
    if (svg) c.svg = true;
  }
};

void PrintErrors(const std::vector<FieldError>& errors) {
  for (const auto& e : errors) {
    std::cerr << "error: " << e.path << ": " << e.message << '\n';
  }
}

void PrintSummary(const SummaryRows& rows) {
  std::size_t width = 0;
  for (const auto& [key, unused] : rows) width = std::max(width, key.size());
  for (const auto& [key, value] : rows) {
    std::printf("%-*s  %s\n", static_cast<int>(width), key.c_str(), value.c_str());
  }
}

int Execute(ExperimentConfig config) {
  const auto errors = ValidateConfig(config);
  if (!errors.empty()) {
    PrintErrors(errors);
    return kInvalid;
  }
  PrintSummary(RunExperiment(config));
  std::cout << "wrote " << (std::filesystem::path(config.output_dir) /
                            ArtifactName(config.kind)).string()
            << '\n';
  return kOk;
}

// Loads a config, or returns the exit code to use when that fails.
std::variant<ExperimentConfig, int> Load(const std::string& path) {
  const ParsedConfig parsed = LoadConfig(path);
  if (!parsed.errors.empty()) {
    PrintErrors(parsed.errors);
    return kInvalid;
  }
  return parsed.config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recwatch: dishonest recommendation detection experiments"};
  app.require_subcommand(1);

  // generate-graph
  auto* gen = app.add_subcommand("generate-graph", "Grow a GLP graph and write its edge list");
  GlpParams glp;
  std::size_t edges = 70000;
  std::uint64_t graph_seed = 1;
  std::string graph_out;
  gen->add_option("--nodes", glp.target_nodes, "Node count")->capture_default_str();
  gen->add_option("--edges", edges, "Approximate edge count")->capture_default_str();
  gen->add_option("--m0", glp.initial_clique, "Initial clique size")->capture_default_str();
  gen->add_option("--m", glp.edges_per_step, "Edges per step")->capture_default_str();
  gen->add_option("--beta", glp.beta, "Preferential shift")->capture_default_str();
  gen->add_option("--seed", graph_seed, "Seed")->capture_default_str();
  gen->add_option("--out", graph_out, "Edge-list file (default: stdout)");

  // generate-sample
  auto* sample = app.add_subcommand("generate-sample",
                                    "Write a semi-synthetic ratings dataset");
  SampleParams sp;
  std::string sample_dir = "data";
  sample->add_option("--users", sp.users)->capture_default_str();
  sample->add_option("--edges", sp.target_edges)->capture_default_str();
  sample->add_option("--items", sp.items)->capture_default_str();
  sample->add_option("--seed", sp.seed)->capture_default_str();
  sample->add_option("--out", sample_dir, "Output directory")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the experiment a config describes");
  std::string sim_config;
  Overrides sim_over;
  sim->add_option("--config", sim_config, "Experiment config")->required();
  sim_over.Attach(sim);

  // replay
  auto* replay = app.add_subcommand("replay", "Replay detection over a ratings dataset");
  std::string replay_config, ratings, replay_edges, detector;
  std::optional<double> dishonest;
  Overrides replay_over;
  replay->add_option("--config", replay_config, "Optional replay config");
  replay->add_option("--ratings", ratings, "Ratings CSV");
  replay->add_option("--edges", replay_edges, "Edge-list file");
  replay->add_option("--detector", detector, "Detector user id");
  replay->add_option("--dishonest", dishonest, "Share of neighbors made dishonest");
  replay_over.Attach(replay);

  // validate
  auto* validate = app.add_subcommand("validate", "Check a config file");
  std::string validate_config;
  validate->add_option("--config", validate_config, "Experiment config")->required();

  // report
  auto* report = app.add_subcommand("report", "Render SVG charts from result CSVs");
  std::vector<std::string> report_inputs;
  report->add_option("inputs", report_inputs, "CSV files or result directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*gen) {
      glp.p_add_edges = PAddEdgesFor(glp.target_nodes, edges, glp.edges_per_step);
      glp.seed = graph_seed;
      try {
        glp.Validate();
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
      }
      const Graph g = GenerateGlp(glp);
      if (graph_out.empty()) {
        WriteEdgeList(g, std::cout);
      } else {
        WriteEdgeList(g, graph_out);
      }
      std::ostream& log = graph_out.empty() ? std::cerr : std::cout;
      log << "nodes " << g.node_count() << "\nedges " << g.edge_count()
          << "\nclustering " << FormatDouble(ClusteringCoefficient(g)) << '\n';
      if (g.node_count() >= 100) {
        log << "degree exponent " << FormatDouble(FitPowerLaw(g).exponent_gamma)
            << '\n';
      }
      return kOk;
    }
    if (*sample) {
      SampleDataset s;
      try {
        s = GenerateSample(sp);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
      }
      std::filesystem::create_directories(sample_dir);
      const auto dir = std::filesystem::path(sample_dir);
      WriteEdgeList(s.graph, (dir / "sample_edges.txt").string());
      std::ofstream out(dir / "sample_ratings.csv", std::ios::binary);
      WriteRatingsCsv(s.ratings, out);
      if (!out) throw std::runtime_error("cannot write sample ratings");
      std::cout << "detector " << s.detector << "\nratings " << s.ratings.size()
                << "\nplanted share of consistent items "
                << FormatDouble(s.planted_fraction_above) << '\n';
      return kOk;
    }
    if (*sim) {
      auto loaded = Load(sim_config);
      if (auto* code = std::get_if<int>(&loaded)) return *code;
      auto config = std::get<ExperimentConfig>(loaded);
      sim_over.Apply(config);
      return Execute(config);
    }
    if (*replay) {
      ExperimentConfig config;
      if (!replay_config.empty()) {
        auto loaded = Load(replay_config);
        if (auto* code = std::get_if<int>(&loaded)) return *code;
        config = std::get<ExperimentConfig>(loaded);
      }
      if (!replay_config.empty() && config.kind != ExperimentKind::kReplay) {
        std::cerr << "error: experiment.kind: replay needs a replay config\n";
        return kInvalid;
      }
      config.kind = ExperimentKind::kReplay;
      if (!ratings.empty()) config.ratings_file = ratings;
      if (!replay_edges.empty()) config.replay_edge_file = replay_edges;
      if (!detector.empty()) config.detector = detector;
      if (dishonest) config.replay_dishonest_fraction = *dishonest;
      replay_over.Apply(config);
      return Execute(config);
    }
    if (*validate) {
      const ParsedConfig parsed = LoadConfig(validate_config);
      auto errors = parsed.errors;
      const auto more = ValidateConfig(parsed.config);
      errors.insert(errors.end(), more.begin(), more.end());
      if (!errors.empty()) {
        PrintErrors(errors);
        return kInvalid;
      }
      std::cout << "ok\n";
      return kOk;
    }
    if (*report) {
      for (const std::string& input : report_inputs) {
        std::vector<std::filesystem::path> files;
        if (std::filesystem::is_directory(input)) {
          for (const auto& e : std::filesystem::directory_iterator(input)) {
            const auto name = e.path().filename().string();
            if (e.path().extension() == ".csv" && name.rfind("fig", 0) == 0 &&
                name.find("_summary") == std::string::npos) {
              files.push_back(e.path());
            }
          }
          std::sort(files.begin(), files.end());
        } else {
          files.emplace_back(input);
        }
        for (const auto& f : files) {
          auto svg = f;
          svg.replace_extension(".svg");
          RenderCsvChart(f.string(), svg.string());
          std::cout << "wrote " << svg.string() << '\n';
        }
      }
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const DatasetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
