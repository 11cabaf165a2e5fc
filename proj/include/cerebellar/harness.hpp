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

#ifndef CEREBELLAR_HARNESS_HPP_
#define CEREBELLAR_HARNESS_HPP_

// Calibration, closed-loop episodes, sweeps and consolidation on top of the
// plant simulator. Everything here is deterministic given (config, seed,
// episode).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cerebellar/config.hpp"
#include "cerebellar/consolidation.hpp"
#include "cerebellar/meta_controller.hpp"
#include "cerebellar/reference_phase.hpp"

namespace cerebellar {

struct NominalEpisode {
  std::uint64_t seed = 0;
  double episode_return = 0.0;
  double rms = 0.0;
};

struct Calibration {
  ReferenceTrajectory reference;
  std::size_t dominant_joint = 0;
  double velocity_scale = 1.0;
  double smoothing = 0.9;
  // Mean per-step reward of the fault-free frozen episodes.
  double nominal_reward_rate = 0.0;
  std::vector<NominalEpisode> nominal;

  PhaseEstimator Estimator() const;
};

// Records the reference from a noise-free nominal rollout and the nominal
// reward rate from `calibration_episodes` fault-free frozen episodes (seeds
// 0, 1, ...; episode 0).
Calibration Calibrate(const ExperimentConfig& cfg);

void WriteCalibration(const Calibration& cal, const std::string& dir);
// Throws MissingArtifactError if the files are absent.
Calibration ReadCalibration(const std::string& dir, double dt);

struct StepRecord {
  double reward = 0.0;
  Vector nominal;   // base action before the residual
  Vector action;    // composed action sent to the plant
  Vector residual;  // applied residual (after clip and gating)
  double phi_norm = 0.0;
  double gate = 0.0;
  double gain = 0.0;
  double gain_mult = 1.0;
  double confidence = 0.0;
};

struct EpisodeResult {
  double episode_return = 0.0;
  double rms = 0.0;              // over all steps and joints
  double residual_energy = 0.0;  // mean ||a_res||^2
  bool success = false;
  double wall_seconds = 0.0;
  std::vector<MetaTraceRow> meta_trace;
  std::vector<StepRecord> steps;  // only when requested
};

struct EpisodeOptions {
  bool record_steps = false;
  // Static adapter added to the nominal action; the method runs on top.
  const StaticAdapter* base_adapter = nullptr;
  // Collects (phi, slow-pathway target) pairs after the transient.
  ConsolidationDataset* collect = nullptr;
  // Seed of the feature projection; defaults to the episode seed.
  std::optional<std::uint64_t> feature_seed;
};

// Throws DivergenceError when the plant state stops being finite.
EpisodeResult RunEpisode(const ExperimentConfig& cfg, const Calibration& cal,
                         Method method, const FaultSpec& fault,
                         std::uint64_t seed, std::size_t episode,
                         const EpisodeOptions& options = {});

// cfg.method on cfg.fault.
EpisodeResult RunEpisode(const ExperimentConfig& cfg, const Calibration& cal,
                         std::uint64_t seed, std::size_t episode);

struct ResultRow {
  std::string family;
  double severity = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  std::size_t episode = 0;
  double episode_return = 0.0;
  double rms = 0.0;
  double residual_energy = 0.0;
  bool success = false;
  int error_code = 0;  // 0 ok, otherwise the CLI exit code of the failure
  double wall_seconds = 0.0;

  bool operator<(const ResultRow& o) const;
};

struct SummaryRow {
  std::string family;
  double severity = 0.0;
  std::string method;
  std::size_t count = 0;
  std::size_t failures = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
  double rms_mean = 0.0;
  double rms_std = 0.0;
  double energy_mean = 0.0;
  // (return - return_frozen) / |return_frozen| for the same cell.
  std::optional<double> relative_improvement;
};

struct SweepCell {
  std::string family;
  double severity;
};

// Every (fault, severity) in the grid in canonical order.
std::vector<SweepCell> GridCells(const ExperimentConfig& cfg);

// Runs every (cell, method, seed, episode). Failed episodes keep a row with
// an error code. Rows come back sorted by key whatever the worker count.
std::vector<ResultRow> RunSweep(const ExperimentConfig& cfg,
                                const Calibration& cal,
                                const std::vector<SweepCell>& cells,
                                const std::vector<Method>& methods);

// Sample mean and standard deviation (0 for fewer than two values).
std::pair<double, double> MeanStd(const std::vector<double>& v);

std::vector<SummaryRow> Summarize(const std::vector<ResultRow>& rows);

// The deterministic columns only; wall-clock goes to WriteTimingsCsv.
void WriteResultsCsv(const std::vector<ResultRow>& rows, std::ostream& out);
void WriteTimingsCsv(const std::vector<ResultRow>& rows, std::ostream& out);
std::vector<ResultRow> ReadResultsCsv(std::istream& in);
void WriteSummaryCsv(const std::vector<SummaryRow>& rows, std::ostream& out);
void WriteSummaryTable(const std::vector<SummaryRow>& rows, std::ostream& out);

struct ConsolidationOutcome {
  StaticAdapter adapter;
  AdapterMetadata metadata;
  std::size_t pairs = 0;
  // Evaluation on the source cell, in order: frozen, ours, adapter,
  // ours on base + adapter.
  std::vector<ResultRow> rows;
  double ours_energy = 0.0;
  double stacked_energy = 0.0;
};

// Collects pairs from the adaptive episodes of cfg.seeds[0] on `cell`, fits
// the ridge adapter and evaluates it on the same cell.
ConsolidationOutcome ConsolidateCell(const ExperimentConfig& cfg,
                                     const Calibration& cal,
                                     const FaultSpec& cell);

// Evaluates a stored adapter on `cell`, refusing a cell other than the one
// it was fit on unless cfg.consolidation.allow_cross_severity is set.
EpisodeResult EvaluateAdapter(const ExperimentConfig& cfg,
                              const Calibration& cal,
                              const StaticAdapter& adapter,
                              const AdapterMetadata& meta,
                              const FaultSpec& cell, Method method,
                              std::uint64_t seed, std::size_t episode);

}  // namespace cerebellar

#endif  // CEREBELLAR_HARNESS_HPP_
