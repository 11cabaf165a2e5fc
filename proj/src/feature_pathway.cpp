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

#include "cerebellar/feature_pathway.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cerebellar/errors.hpp"
#include "cerebellar/kernels.hpp"

namespace cerebellar {

FeatureExpansion::FeatureExpansion(std::size_t input_dim,
                                   std::size_t feature_count,
                                   std::uint64_t seed, double init_std)
    : seed_(seed), init_std_(init_std) {
  if (input_dim == 0 || feature_count == 0) {
    throw InvalidArgument("feature expansion needs M >= 1 and input_dim >= 1");
  }
  if (!(init_std > 0.0) || !std::isfinite(init_std)) {
    throw InvalidArgument("feature expansion init_std must be positive");
  }
  projection_.resize(static_cast<Eigen::Index>(feature_count),
                     static_cast<Eigen::Index>(input_dim));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, init_std);
  // Fill in row-major order so the draw sequence does not depend on storage.
  for (Eigen::Index m = 0; m < projection_.rows(); ++m) {
    for (Eigen::Index d = 0; d < projection_.cols(); ++d) {
      projection_(m, d) = normal(rng);
    }
  }
}

FeatureExpansion::FeatureExpansion(Matrix projection)
    : projection_(std::move(projection)) {
  if (projection_.rows() == 0 || projection_.cols() == 0) {
    throw InvalidArgument("feature expansion needs M >= 1 and input_dim >= 1");
  }
}

Vector FeatureExpansion::Expand(const Vector& x) const {
  Vector out;
  ExpandInto(x, out);
  return out;
}

void FeatureExpansion::ExpandInto(const Vector& x, Vector& out) const {
  RequireSameSize(x.size(), projection_.cols(), "expand input");
  if (!x.allFinite()) throw NonFiniteError("expand: non-finite input");
  kernels::ReluMatVec(projection_, x, out);
}

FeatureExpansion BuildExpansion(std::size_t input_dim,
                                std::size_t feature_count, std::uint64_t seed,
                                double init_std) {
  return FeatureExpansion(input_dim, feature_count, seed, init_std);
}

double FilterRate(double dt, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("filter time constant must be > 0");
  return std::clamp(dt / tau, 0.0, 1.0);
}

TraceState::TraceState(std::size_t feature_count, double alpha_excit,
                       double alpha_inhib)
    : excit_(Vector::Zero(static_cast<Eigen::Index>(feature_count))),
      inhib_(Vector::Zero(static_cast<Eigen::Index>(feature_count))),
      alpha_excit_(alpha_excit),
      alpha_inhib_(alpha_inhib) {
  if (!(alpha_inhib > 0.0 && alpha_inhib < alpha_excit && alpha_excit <= 1.0)) {
    throw InvalidArgument("trace rates need 0 < alpha_I < alpha_E <= 1, got " +
                          std::to_string(alpha_excit) + ", " +
                          std::to_string(alpha_inhib));
  }
}

Vector TraceState::Step(const Vector& h) {
  Vector phi;
  StepInto(h, phi);
  return phi;
}

void TraceState::StepInto(const Vector& h, Vector& phi) {
  RequireSameSize(h.size(), excit_.size(), "trace input");
  kernels::DualTrace(excit_, inhib_, h, alpha_excit_, alpha_inhib_, phi);
}

void TraceState::Reset() {
  excit_.setZero();
  inhib_.setZero();
}

Vector AssembleInput(const Vector& q, const Vector& qd, const Vector& qdd_ref,
                     bool include_accel) {
  RequireSameSize(q.size(), qd.size(), "input q/qd");
  const Eigen::Index j = q.size();
  Vector x(include_accel ? 3 * j : 2 * j);
  x.segment(0, j) = q;
  x.segment(j, j) = qd;
  if (include_accel) {
    RequireSameSize(qdd_ref.size(), j, "input qdd_ref");
    x.segment(2 * j, j) = qdd_ref;
  }
  return x;
}

}  // namespace cerebellar
