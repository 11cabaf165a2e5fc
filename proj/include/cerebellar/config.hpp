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

#ifndef CEREBELLAR_CONFIG_HPP_
#define CEREBELLAR_CONFIG_HPP_

// Experiment configuration: a flat top level plus one table per module,
// stored as YAML. Every field has a default and unknown keys are rejected.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cerebellar/adaptation.hpp"
#include "cerebellar/baselines.hpp"
#include "cerebellar/meta_controller.hpp"
#include "cerebellar/plant_sim.hpp"
#include "cerebellar/residual_core.hpp"
#include "cerebellar/types.hpp"

namespace cerebellar {

inline constexpr int kSchemaVersion = 1;

enum class Method { kFrozen, kOurs, kLms, kCmac, kAdapter };
const char* MethodName(Method m);
// Throws ConfigError for an unknown name.
Method ParseMethod(const std::string& name);

struct Ablations {
  bool no_granule_expansion = false;
  bool no_temporal_filter = false;
  bool no_microzones = false;
  bool no_fast_slow = false;
  bool no_meta = false;
  bool no_reference_accel = false;
  bool time_indexed_reference = false;
  bool no_directional_gate = false;
  double phase_offset = 0.0;  // added to every reference phase query

  bool operator==(const Ablations&) const = default;
};

// Comma-separated flag names; `phase_offset=VALUE` sets the offset.
// Throws ConfigError for an unknown flag.
void ApplyAblationList(const std::string& list, Ablations& ablations);

struct PlantConfig {
  Vector inertia = Vector::Constant(4, 0.02);
  Vector damping = Vector::Constant(4, 0.1);
  Vector ground_stiffness = Vector::Constant(4, 0.5);
  double chain_stiffness = 0.1;
  Vector friction = Vector::Constant(4, 0.02);
  Vector torque_limit = Vector::Constant(4, 2.0);
  double friction_velocity = 0.01;
  Vector kp = Vector::Constant(4, 0.5);
  Vector kd = Vector::Constant(4, 0.1);
  Vector amplitude = (Vector(4) << 0.5, 0.4, 0.35, 0.3).finished();
  Vector offset;  // empty selects -j * pi / 4
  double period = 2.0;
  double dt = 0.01;
  std::size_t horizon = 1000;
  double init_noise = 0.005;

  std::size_t joints() const { return inertia.size(); }
  PlantModel Model() const;
  PeriodicTask Task() const;
  NominalGains Gains() const;
  std::size_t PeriodSteps() const;
};

struct FaultConfig {
  std::string family = "none";
  double severity = 1.0;
  std::vector<std::size_t> affected_joints;
  std::size_t onset_step = 0;
  std::optional<std::size_t> removal_step;
  // Sweep grid: severities per family.
  std::map<std::string, std::vector<double>> grid = {
      {"actuator_scale", {0.9, 0.8, 0.7, 0.6, 0.5, 0.4}},
      {"mass_multiplier", {1.2, 1.3, 1.4, 1.5, 1.6}},
      {"damping_multiplier", {1.2, 1.4, 1.6, 1.8, 2.0, 2.2}},
      {"friction_multiplier", {0.1, 0.5, 1.0, 1.5, 2.0}},
  };

  FaultSpec Spec() const;
  FaultSpec SpecFor(const std::string& family, double severity) const;
};

struct FeatureConfig {
  std::size_t count = 2500;
  double init_std = 0.04;
  double tau_excit = 0.03;
  double tau_inhib = 0.30;
};

struct PhaseConfig {
  double smoothing = 0.90;
  std::optional<std::size_t> dominant_joint;  // unset: largest amplitude
};

struct ConsolidationConfig {
  double ridge_lambda = 1e-3;
  double transient_skip = 0.25;  // fraction of the horizon
  bool allow_cross_severity = false;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Method method = Method::kOurs;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::size_t episodes = 3;
  std::size_t calibration_episodes = 5;
  std::size_t workers = 0;  // 0: all available
  std::string output_dir = "runs";
  std::vector<std::string> sweep_methods = {"frozen", "ours", "lms", "cmac"};

  PlantConfig plant;
  FaultConfig fault;
  FeatureConfig features;
  PhaseConfig phase;
  MicrozoneConfig microzones;
  // Learning rates and Lambda below were picked per method on held-out
  // validation cells (seeds 100-102), not on the evaluation grid.
  LearnerConfig adaptation = [] {
    LearnerConfig c;
    c.eta_base = 0.002;
    return c;
  }();
  double lambda = 2.0;    // composite-error weight, all joints
  double tau_max = 0.15;  // residual clip
  MetaConfig meta;
  LmsConfig lms = [] {
    LmsConfig c;
    c.eta = 0.02;
    c.lambda = 2.0;
    return c;
  }();
  CmacConfig cmac = [] {
    CmacConfig c;
    c.eta = 0.02;
    c.lambda = 2.0;
    return c;
  }();
  ConsolidationConfig consolidation;
  Ablations ablations;
};

// Throws ConfigError on malformed text, unknown keys, wrong types or values
// failing validation.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);
std::string SerializeConfig(const ExperimentConfig& cfg);
void ValidateConfig(const ExperimentConfig& cfg);

// 3 seeds x 1 episode with M = 256.
void ApplyFastProfile(ExperimentConfig& cfg);

}  // namespace cerebellar

#endif  // CEREBELLAR_CONFIG_HPP_
