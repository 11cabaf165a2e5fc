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

#ifndef CEREBELLAR_BASELINES_HPP_
#define CEREBELLAR_BASELINES_HPP_

// Fixed-parameter residual learners used as comparison points. Neither one
// monitors reward or retunes (eta, g, Lambda) while running.

#include <cstddef>
#include <string>

#include "cerebellar/feature_pathway.hpp"
#include "cerebellar/types.hpp"

namespace cerebellar {

struct LmsConfig {
  double eta = 0.05;
  double gain = 0.35;
  double lambda = 4.0;
  std::size_t warmup = 200;
  double tau_max = 0.15;
  double epsilon = 1e-6;
  bool directional_gate = true;
};

// Linear map over the raw controller input x = [q, qd, qdd_ref] learned by
// normalized LMS with a squared-norm denominator.
class LmsBaseline {
 public:
  LmsBaseline(const LmsConfig& cfg, std::size_t joints);

  // clip(g W x), zeroed when the gate is on and it opposes `nominal`.
  Vector Residual(const Vector& x, const Vector& nominal) const;

  // W += eta r x^T / (||x||^2 + eps) once step >= warmup. Returns whether W
  // changed. Throws DimensionError on a length mismatch.
  bool Learn(const Vector& x, const Vector& r, std::size_t step);

  const Matrix& weights() const { return w_; }
  const LmsConfig& config() const { return cfg_; }
  // Frozen hyperparameters as text; stable across episodes.
  std::string SerializeParams() const;

 private:
  LmsConfig cfg_;
  Matrix w_;
};

struct CmacConfig {
  double eta = 0.05;
  // Folded authority constant; defaults to the adaptive method's nominal
  // confidence * gain so the two line up when meta adaptation is off.
  double gain = 0.4 * 0.35;
  double lambda = 4.0;
  std::size_t warmup = 200;
  double tau_max = 0.15;
  double epsilon = 1e-6;
  double deadzone = 0.25;
  double momentum = 0.85;
  double l2 = 4e-6;
  double w_max = 5.0;
  bool directional_gate = true;
};

// Fixed random rectifier features with one linear readout trained by NLMS on
// the composite error.
class CmacBaseline {
 public:
  CmacBaseline(const CmacConfig& cfg, FeatureExpansion expansion,
               std::size_t joints);

  Vector Features(const Vector& x) const;
  Vector Residual(const Vector& h, const Vector& nominal) const;
  // Same update family as the adaptive heads, without zones, traces or
  // meta multipliers. Returns whether W changed.
  bool Learn(const Vector& h, const Vector& r, std::size_t step);

  const Matrix& weights() const { return w_; }
  const CmacConfig& config() const { return cfg_; }
  const FeatureExpansion& expansion() const { return expansion_; }
  std::string SerializeParams() const;

 private:
  CmacConfig cfg_;
  FeatureExpansion expansion_;
  Matrix w_;
  Matrix m_;
  Matrix delta_;
};

}  // namespace cerebellar

#endif  // CEREBELLAR_BASELINES_HPP_
