// Copyright 2026 The cerebellar-residual Authors
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

// Command-line entry point: calibrate, run, sweep, consolidate, report.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cerebellar/config.hpp"
#include "cerebellar/consolidation.hpp"
#include "cerebellar/csv.hpp"
#include "cerebellar/errors.hpp"
#include "cerebellar/harness.hpp"
#include "cerebellar/meta_controller.hpp"

namespace fs = std::filesystem;
using namespace cerebellar;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitMissing = 4;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool fast = false;
  std::string method;
  std::string ablate;
  std::string results;
  std::string adapter_dir;
};

ExperimentConfig BuildConfig(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : LoadConfig(o.config);
  if (o.fast) ApplyFastProfile(cfg);
  if (o.seed) cfg.seeds = {*o.seed};
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.method.empty()) cfg.method = ParseMethod(o.method);
  if (!o.ablate.empty()) ApplyAblationList(o.ablate, cfg.ablations);
  ValidateConfig(cfg);
  return cfg;
}

std::string CalibrationDir(const ExperimentConfig& cfg) {
  return cfg.output_dir + "/calibration";
}

std::string CellDir(const ExperimentConfig& cfg, const FaultSpec& cell) {
  return cfg.output_dir + "/runs/" + cell.Key();
}

std::ofstream OpenOut(const std::string& path) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw MissingArtifactError("cannot write " + path);
  return out;
}

void WriteTables(const std::vector<ResultRow>& rows, const std::string& dir) {
  auto res = OpenOut(dir + "/results.csv");
  WriteResultsCsv(rows, res);
  auto tim = OpenOut(dir + "/timings.csv");
  WriteTimingsCsv(rows, tim);
  const auto summary = Summarize(rows);
  auto sum = OpenOut(dir + "/summary.csv");
  WriteSummaryCsv(summary, sum);
  WriteSummaryTable(summary, std::cout);
}

int Calibrate(const Options& o) {
  const ExperimentConfig cfg = BuildConfig(o);
  const Calibration cal = Calibrate(cfg);
  WriteCalibration(cal, CalibrationDir(cfg));
  auto norm = OpenOut(cfg.output_dir + "/config.yaml");
  norm << SerializeConfig(cfg);
  std::cout << "reference: " << cal.reference.horizon() << " samples, dominant joint "
            << cal.dominant_joint << "\n"
            << "nominal reward rate: " << FormatDouble(cal.nominal_reward_rate)
            << "\n";
  for (const auto& e : cal.nominal) {
    std::cout << "  seed " << e.seed << ": return " << FormatDouble(e.episode_return)
              << ", rms " << FormatDouble(e.rms) << "\n";
  }
  return kExitOk;
}

int Run(const Options& o) {
  const ExperimentConfig cfg = BuildConfig(o);
  const Calibration cal = ReadCalibration(CalibrationDir(cfg), cfg.plant.dt);
  const FaultSpec cell = cfg.fault.Spec();
  std::vector<ResultRow> rows;
  const std::string dir = CellDir(cfg, cell) + "/" + MethodName(cfg.method);
  for (std::uint64_t seed : cfg.seeds) {
    for (std::size_t e = 0; e < cfg.episodes; ++e) {
      const EpisodeResult r = RunEpisode(cfg, cal, cfg.method, cell, seed, e);
      ResultRow row;
      row.family = FaultFamilyName(cell.family);
      row.severity = cell.severity;
      row.method = MethodName(cfg.method);
      row.seed = seed;
      row.episode = e;
      row.episode_return = r.episode_return;
      row.rms = r.rms;
      row.residual_energy = r.residual_energy;
      row.success = r.success;
      row.wall_seconds = r.wall_seconds;
      rows.push_back(row);
      if (!r.meta_trace.empty()) {
        auto trace = OpenOut(dir + "/meta_trace_s" + std::to_string(seed) + "_e" +
                             std::to_string(e) + ".csv");
        WriteMetaTraceCsv(r.meta_trace, trace);
      }
    }
  }
  WriteTables(rows, dir);
  return kExitOk;
}

int Sweep(const Options& o) {
  const ExperimentConfig cfg = BuildConfig(o);
  const Calibration cal = ReadCalibration(CalibrationDir(cfg), cfg.plant.dt);
  std::vector<Method> methods;
  if (!o.method.empty()) {
    methods.push_back(cfg.method);
  } else {
    for (const auto& m : cfg.sweep_methods) methods.push_back(ParseMethod(m));
  }
  const auto cells = GridCells(cfg);
  if (cells.empty()) throw ConfigError("fault grid is empty");
  const auto rows = RunSweep(cfg, cal, cells, methods);
  WriteTables(rows, cfg.output_dir + "/sweep");
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.success ? 0 : 1;
  if (failed > 0) std::cerr << failed << " episode(s) failed; see results.csv\n";
  return kExitOk;
}

int Consolidate(const Options& o) {
  const ExperimentConfig cfg = BuildConfig(o);
  const Calibration cal = ReadCalibration(CalibrationDir(cfg), cfg.plant.dt);
  const FaultSpec cell = cfg.fault.Spec();
  if (cell.family == FaultFamily::kNone) {
    throw ConfigError("consolidate needs a fault cell (fault.family)");
  }

  if (!o.adapter_dir.empty()) {
    AdapterMetadata meta;
    const StaticAdapter ad = ReadAdapter(o.adapter_dir + "/adapter.csv",
                                         o.adapter_dir + "/adapter.txt", &meta);
    std::vector<ResultRow> rows;
    for (std::uint64_t seed : cfg.seeds) {
      for (std::size_t e = 0; e < cfg.episodes; ++e) {
        for (Method m : {Method::kAdapter, Method::kOurs}) {
          const EpisodeResult r = EvaluateAdapter(cfg, cal, ad, meta, cell, m, seed, e);
          ResultRow row;
          row.family = FaultFamilyName(cell.family);
          row.severity = cell.severity;
          row.method = m == Method::kOurs ? "ours+adapter" : "adapter";
          row.seed = seed;
          row.episode = e;
          row.episode_return = r.episode_return;
          row.rms = r.rms;
          row.residual_energy = r.residual_energy;
          row.success = r.success;
          rows.push_back(row);
        }
      }
    }
    std::sort(rows.begin(), rows.end());
    WriteTables(rows, o.adapter_dir + "/eval_" + cell.Key());
    return kExitOk;
  }

  const std::string source = CellDir(cfg, cell) + "/ours/results.csv";
  if (!fs::exists(source)) {
    throw MissingArtifactError("no adaptive episodes for " + cell.Key() +
                               " (expected " + source + "; run --method ours first)");
  }
  const ConsolidationOutcome out = ConsolidateCell(cfg, cal, cell);
  const std::string dir = cfg.output_dir + "/consolidation/" + cell.Key();
  fs::create_directories(dir);
  WriteAdapter(out.adapter, out.metadata, dir + "/adapter.csv", dir + "/adapter.txt");
  WriteTables(out.rows, dir);
  std::cout << "pairs: " << out.pairs << "\n"
            << "E_res ours: " << FormatDouble(out.ours_energy) << "\n"
            << "E_res ours on base+adapter: " << FormatDouble(out.stacked_energy)
            << "\n";
  return kExitOk;
}

int Report(const Options& o) {
  const ExperimentConfig cfg = BuildConfig(o);
  const std::string path =
      o.results.empty() ? cfg.output_dir + "/sweep/results.csv" : o.results;
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("no results at " + path);
  const auto rows = ReadResultsCsv(in);
  const auto summary = Summarize(rows);
  auto out = OpenOut(fs::absolute(fs::path(path).parent_path() / "summary.csv").string());
  WriteSummaryCsv(summary, out);
  WriteSummaryTable(summary, std::cout);
  return kExitOk;
}

int DumpConfig(const Options& o) {
  std::cout << SerializeConfig(BuildConfig(o));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residual cerebellar controller experiments"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "experiment config (YAML)");
  app.add_option("--seed", o.seed, "run a single seed");
  app.add_option("--out", o.out, "output directory");
  app.add_flag("--fast", o.fast, "3 seeds x 1 episode with M = 256");
  app.add_option("--method", o.method, "frozen, ours, lms, cmac or adapter");
  app.add_option("--ablate", o.ablate, "comma-separated ablation flags");
  app.fallthrough();

  auto* calibrate = app.add_subcommand("calibrate", "build the reference and nominal baseline");
  auto* run = app.add_subcommand("run", "run one fault cell with one method");
  auto* sweep = app.add_subcommand("sweep", "run the fault grid for every sweep method");
  auto* consolidate = app.add_subcommand("consolidate", "fit and evaluate a static adapter");
  consolidate->add_option("--adapter", o.adapter_dir,
                          "evaluate a stored adapter directory instead of fitting");
  auto* report = app.add_subcommand("report", "summary tables from a results CSV");
  report->add_option("--results", o.results, "results.csv to summarize");
  auto* dump = app.add_subcommand("config", "print the normalized config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*calibrate) return Calibrate(o);
    if (*run) return Run(o);
    if (*sweep) return Sweep(o);
    if (*consolidate) return Consolidate(o);
    if (*report) return Report(o);
    if (*dump) return DumpConfig(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CrossSeverityError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const NonFiniteError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const MissingArtifactError& e) {
    std::cerr << "missing artifact: " << e.what() << "\n";
    return kExitMissing;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
