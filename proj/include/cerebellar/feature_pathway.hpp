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

#ifndef CEREBELLAR_FEATURE_PATHWAY_HPP_
#define CEREBELLAR_FEATURE_PATHWAY_HPP_

// Granule-layer front end: a fixed random rectified projection of the
// controller input followed by a pair of exponential traces whose difference
// is the effective activity fed to the readout heads.

#include <cstdint>

#include "cerebellar/types.hpp"

namespace cerebellar {

// Fixed random projection h = max(0, V x). V is sampled once from a
// zero-mean Gaussian and never mutated.
class FeatureExpansion {
 public:
  // Throws InvalidArgument if a dimension is zero or init_std <= 0.
  FeatureExpansion(std::size_t input_dim, std::size_t feature_count,
                   std::uint64_t seed, double init_std);

  // Wraps an explicit projection (tests, identity-style fixtures).
  explicit FeatureExpansion(Matrix projection);

  // Throws DimensionError on a length mismatch and NonFiniteError if x has a
  // NaN or infinity.
  Vector Expand(const Vector& x) const;
  void ExpandInto(const Vector& x, Vector& out) const;

  const Matrix& projection() const { return projection_; }
  std::size_t feature_count() const { return projection_.rows(); }
  std::size_t input_dim() const { return projection_.cols(); }
  std::uint64_t seed() const { return seed_; }
  double init_std() const { return init_std_; }

 private:
  Matrix projection_;
  std::uint64_t seed_ = 0;
  double init_std_ = 0.0;
};

FeatureExpansion BuildExpansion(std::size_t input_dim,
                                std::size_t feature_count, std::uint64_t seed,
                                double init_std);

// Rate of a first-order filter with time constant tau sampled every dt,
// clamped to [0, 1].
double FilterRate(double dt, double tau);

// Excitatory (fast) and inhibitory (slow) traces over the M granule outputs.
class TraceState {
 public:
  // Requires 0 < alpha_inhib < alpha_excit <= 1.
  TraceState(std::size_t feature_count, double alpha_excit,
             double alpha_inhib);

  // Advances both traces by one sample and returns excit - inhib.
  Vector Step(const Vector& h);
  void StepInto(const Vector& h, Vector& phi);

  void Reset();

  const Vector& excitatory() const { return excit_; }
  const Vector& inhibitory() const { return inhib_; }
  double alpha_excit() const { return alpha_excit_; }
  double alpha_inhib() const { return alpha_inhib_; }

 private:
  Vector excit_;
  Vector inhib_;
  double alpha_excit_;
  double alpha_inhib_;
};

// Controller input [q, qd, qdd_ref]; the reference acceleration block is
// dropped when include_accel is false.
Vector AssembleInput(const Vector& q, const Vector& qd, const Vector& qdd_ref,
                     bool include_accel);

}  // namespace cerebellar

#endif  // CEREBELLAR_FEATURE_PATHWAY_HPP_
