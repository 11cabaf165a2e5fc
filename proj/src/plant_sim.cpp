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

#include "cerebellar/plant_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cerebellar/csv.hpp"
#include "cerebellar/errors.hpp"

namespace cerebellar {

void PlantModel::Validate() const {
  const Eigen::Index j = inertia.size();
  if (j == 0) throw InvalidArgument("plant needs at least one joint");
  RequireSameSize(damping.size(), j, "plant damping");
  RequireSameSize(friction.size(), j, "plant friction");
  RequireSameSize(torque_limit.size(), j, "plant torque limit");
  RequireSameSize(coupling.rows(), j, "plant coupling rows");
  RequireSameSize(coupling.cols(), j, "plant coupling cols");
  if ((inertia.array() <= 0.0).any()) throw InvalidArgument("inertia must be > 0");
  if ((damping.array() < 0.0).any()) throw InvalidArgument("damping must be >= 0");
  if ((friction.array() < 0.0).any()) throw InvalidArgument("friction must be >= 0");
  if ((torque_limit.array() <= 0.0).any()) {
    throw InvalidArgument("torque limit must be > 0");
  }
  if (!coupling.isApprox(coupling.transpose(), 0.0)) {
    throw InvalidArgument("coupling matrix must be symmetric");
  }
  if (!(friction_velocity > 0.0)) {
    throw InvalidArgument("friction velocity must be > 0");
  }
}

Matrix ChainCoupling(const Vector& ground, double chain) {
  const Eigen::Index n = ground.size();
  Matrix k = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) k(j, j) = ground[j];
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    k(j, j) += chain;
    k(j + 1, j + 1) += chain;
    k(j, j + 1) = -chain;
    k(j + 1, j) = -chain;
  }
  return k;
}

const char* FaultFamilyName(FaultFamily f) {
  switch (f) {
    case FaultFamily::kActuatorScale:
      return "actuator_scale";
    case FaultFamily::kActuatorBias:
      return "actuator_bias";
    case FaultFamily::kMassMultiplier:
      return "mass_multiplier";
    case FaultFamily::kDampingMultiplier:
      return "damping_multiplier";
    case FaultFamily::kFrictionMultiplier:
      return "friction_multiplier";
    case FaultFamily::kNone:
      break;
  }
  return "none";
}

FaultFamily ParseFaultFamily(const std::string& name) {
  for (FaultFamily f :
       {FaultFamily::kNone, FaultFamily::kActuatorScale,
        FaultFamily::kActuatorBias, FaultFamily::kMassMultiplier,
        FaultFamily::kDampingMultiplier, FaultFamily::kFrictionMultiplier}) {
    if (name == FaultFamilyName(f)) return f;
  }
  throw InvalidArgument("unknown fault family '" + name + "'");
}

bool FaultSpec::ActiveAt(std::size_t step) const {
  if (family == FaultFamily::kNone) return false;
  if (step < onset_step) return false;
  return !removal_step || step < *removal_step;
}

bool FaultSpec::Affects(std::size_t joint) const {
  return affected_joints.empty() ||
         std::find(affected_joints.begin(), affected_joints.end(), joint) !=
             affected_joints.end();
}

void FaultSpec::Validate(std::size_t joints) const {
  auto in = [&](double lo, double hi) {
    if (!(severity >= lo && severity <= hi)) {
      throw InvalidArgument(std::string("severity ") + FormatDouble(severity) +
                            " outside [" + FormatDouble(lo) + ", " +
                            FormatDouble(hi) + "] for " +
                            FaultFamilyName(family));
    }
  };
  switch (family) {
    case FaultFamily::kNone:
      break;
    case FaultFamily::kActuatorScale:
      in(0.0, 1.0);
      break;
    case FaultFamily::kActuatorBias:
      in(-1.0, 1.0);
      break;
    case FaultFamily::kMassMultiplier:
      in(1.0, 3.0);
      break;
    case FaultFamily::kDampingMultiplier:
      in(1.0, 5.0);
      break;
    case FaultFamily::kFrictionMultiplier:
      in(0.0, 5.0);
      break;
  }
  for (std::size_t j : affected_joints) {
    if (j >= joints) throw InvalidArgument("fault names a joint out of range");
  }
  if (removal_step && *removal_step < onset_step) {
    throw InvalidArgument("fault removal precedes onset");
  }
}

std::string FaultSpec::Key() const {
  return std::string(FaultFamilyName(family)) + "@" + FormatDouble(severity);
}

FaultSpec NoFault() { return FaultSpec{}; }

namespace {

// Per-joint multiplier of a plant parameter under the active fault.
double ParamScale(const FaultSpec& fault, FaultFamily family, bool active,
                  std::size_t joint) {
  if (!active || fault.family != family || !fault.Affects(joint)) return 1.0;
  return fault.severity;
}

}  // namespace

Vector EffectiveTorque(const PlantModel& model, const Vector& torque,
                       const FaultSpec& fault, std::size_t step) {
  RequireSameSize(torque.size(), model.joints(), "plant torque");
  if (!torque.allFinite()) throw NonFiniteError("non-finite torque command");
  const bool active = fault.ActiveAt(step);
  Vector u(torque.size());
  for (Eigen::Index j = 0; j < torque.size(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    double v = torque[j] * ParamScale(fault, FaultFamily::kActuatorScale, active, jj);
    if (active && fault.family == FaultFamily::kActuatorBias && fault.Affects(jj)) {
      v += fault.severity;
    }
    u[j] = std::clamp(v, -model.torque_limit[j], model.torque_limit[j]);
  }
  return u;
}

PlantState PlantStep(const PlantModel& model, const PlantState& state,
                     const Vector& torque, const FaultSpec& fault,
                     std::size_t step) {
  const Vector u = EffectiveTorque(model, torque, fault, step);
  const bool active = fault.ActiveAt(step);
  const Vector spring = model.coupling * state.q;
  PlantState next = state;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    const double inertia =
        model.inertia[j] * ParamScale(fault, FaultFamily::kMassMultiplier, active, jj);
    const double damping =
        model.damping[j] * ParamScale(fault, FaultFamily::kDampingMultiplier, active, jj);
    const double friction =
        model.friction[j] * ParamScale(fault, FaultFamily::kFrictionMultiplier, active, jj);
    const double qd = state.qd[j];
    const double force = u[j] - damping * qd - spring[j] -
                         friction * std::tanh(qd / model.friction_velocity);
    next.qd[j] = qd + state.dt * force / inertia;
  }
  next.q = state.q + state.dt * next.qd;
  next.t = state.t + 1;
  return next;
}

double PeriodicTask::omega() const { return 2.0 * std::numbers::pi / period; }

ReferenceSample PeriodicTask::At(double time) const {
  const double w = omega();
  ReferenceSample s;
  const Eigen::Index n = amplitude.size();
  s.q.resize(n);
  s.qd.resize(n);
  s.qdd.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double arg = w * time + offset[j];
    s.q[j] = amplitude[j] * std::cos(arg);
    s.qd[j] = -amplitude[j] * w * std::sin(arg);
    s.qdd[j] = -amplitude[j] * w * w * std::cos(arg);
  }
  s.phase = WrapPhase(time / period);
  return s;
}

NominalController::NominalController(PlantModel model, NominalGains gains)
    : model_(std::move(model)), gains_(std::move(gains)) {
  model_.Validate();
  RequireSameSize(gains_.kp.size(), model_.joints(), "nominal kp");
  RequireSameSize(gains_.kd.size(), model_.joints(), "nominal kd");
}

Vector NominalController::Action(const PlantState& state,
                                 const ReferenceSample& target) const {
  const Vector e = target.q - state.q;
  const Vector edot = target.qd - state.qd;
  Vector a = model_.inertia.cwiseProduct(target.qdd) +
             model_.damping.cwiseProduct(target.qd) + model_.coupling * target.q;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    a[j] += model_.friction[j] * std::tanh(target.qd[j] / model_.friction_velocity);
    a[j] += gains_.kp[j] * e[j] + gains_.kd[j] * edot[j];
    a[j] = std::clamp(a[j], -model_.torque_limit[j], model_.torque_limit[j]);
  }
  return a;
}

double Reward(const PlantState& state, const ReferenceSample& target,
              const Vector& action) {
  return -(target.q - state.q).squaredNorm() - kActionPenalty * action.squaredNorm();
}

}  // namespace cerebellar
