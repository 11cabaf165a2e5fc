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

#ifndef CEREBELLAR_PLANT_SIM_HPP_
#define CEREBELLAR_PLANT_SIM_HPP_

// Desk-scale stand-in for a legged simulator: a chain of torque-driven
// joints tied together by springs, tracking a periodic task under a frozen
// computed-torque controller, with post-deployment faults that can be
// switched on and off at given steps.

#include <optional>
#include <string>
#include <vector>

#include "cerebellar/reference_phase.hpp"
#include "cerebellar/types.hpp"

namespace cerebellar {

struct PlantModel {
  Vector inertia;          // kg m^2, > 0
  Vector damping;          // N m s / rad, >= 0
  Matrix coupling;         // symmetric stiffness, N m / rad
  Vector friction;         // Coulomb level, N m, >= 0
  Vector torque_limit;     // N m, > 0
  double friction_velocity = 0.01;  // tanh smoothing width, rad/s

  std::size_t joints() const { return inertia.size(); }
  // Throws InvalidArgument when an invariant is violated.
  void Validate() const;
};

// Grounded chain: K[j][j] = ground[j] + chain springs to neighbours,
// K[j][j +/- 1] = -chain.
Matrix ChainCoupling(const Vector& ground, double chain);

struct PlantState {
  Vector q;
  Vector qd;
  std::size_t t = 0;
  double dt = 0.01;
};

enum class FaultFamily {
  kNone,
  kActuatorScale,
  kActuatorBias,
  kMassMultiplier,
  kDampingMultiplier,
  kFrictionMultiplier,
};

const char* FaultFamilyName(FaultFamily f);
// Throws InvalidArgument for an unknown name.
FaultFamily ParseFaultFamily(const std::string& name);

struct FaultSpec {
  FaultFamily family = FaultFamily::kNone;
  double severity = 1.0;
  std::vector<std::size_t> affected_joints;  // empty means every joint
  std::size_t onset_step = 0;
  std::optional<std::size_t> removal_step;

  bool ActiveAt(std::size_t step) const;
  bool Affects(std::size_t joint) const;
  // Severity bounds per family and onset <= removal.
  void Validate(std::size_t joints) const;
  std::string Key() const;  // family@severity
};

FaultSpec NoFault();

// One semi-implicit Euler step (velocity first, then position) under the
// fault active at `step`. Throws NonFiniteError for a non-finite torque and
// DimensionError for a wrong length.
PlantState PlantStep(const PlantModel& model, const PlantState& state,
                     const Vector& torque, const FaultSpec& fault,
                     std::size_t step);

// Torque the actuators deliver for a commanded torque.
Vector EffectiveTorque(const PlantModel& model, const Vector& torque,
                       const FaultSpec& fault, std::size_t step);

// q_j(t) = amplitude_j cos(omega t + offset_j).
struct PeriodicTask {
  Vector amplitude;
  Vector offset;
  double period = 2.0;  // seconds

  double omega() const;
  ReferenceSample At(double time) const;
};

struct NominalGains {
  Vector kp;
  Vector kd;
};

// Frozen computed-torque tracker: the nominal model's inverse dynamics at
// the target plus PD feedback, clamped to the torque limits. The model copy
// is taken at construction and never changes.
class NominalController {
 public:
  NominalController(PlantModel model, NominalGains gains);

  Vector Action(const PlantState& state, const ReferenceSample& target) const;

  const NominalGains& gains() const { return gains_; }
  const PlantModel& model() const { return model_; }

 private:
  PlantModel model_;
  NominalGains gains_;
};

// -||q_target - q||^2 - 0.01 ||action||^2.
double Reward(const PlantState& state, const ReferenceSample& target,
              const Vector& action);
inline constexpr double kActionPenalty = 0.01;

}  // namespace cerebellar

#endif  // CEREBELLAR_PLANT_SIM_HPP_
