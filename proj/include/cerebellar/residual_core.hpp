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

#ifndef CEREBELLAR_RESIDUAL_CORE_HPP_
#define CEREBELLAR_RESIDUAL_CORE_HPP_

// Phase-conditioned microzones with fast and slow linear readout heads, the
// authority scaling that turns their output into a bounded residual torque,
// and the composition with the nominal action.

#include <iosfwd>
#include <string>
#include <vector>

#include "cerebellar/types.hpp"

namespace cerebellar {

enum class ZoneWeighting {
  kSoft,  // normalized Gaussian kernels on the phase circle with a floor
  kHard,  // one-hot nearest center
};

struct MicrozoneConfig {
  std::size_t zones = 4;
  double width = 0.0;  // <= 0 selects 1 / (2 * zones)
  double min_weight = 0.05;
  double w_max = 5.0;
  ZoneWeighting weighting = ZoneWeighting::kSoft;
  bool split_heads = true;  // false keeps a single (fast) head per zone
};

enum class Head { kFast, kSlow };

class MicrozoneBank {
 public:
  MicrozoneBank(const MicrozoneConfig& cfg, std::size_t joints,
                std::size_t features);

  std::size_t zones() const { return fast_.size(); }
  std::size_t joints() const { return joints_; }
  std::size_t features() const { return features_; }
  bool split_heads() const { return split_; }
  double width() const { return width_; }
  double min_weight() const { return min_weight_; }
  double w_max() const { return w_max_; }
  ZoneWeighting weighting() const { return weighting_; }
  const Vector& centers() const { return centers_; }

  Matrix& fast(std::size_t k) { return fast_[k]; }
  const Matrix& fast(std::size_t k) const { return fast_[k]; }
  // Throws InvalidArgument when the bank has no slow heads.
  Matrix& slow(std::size_t k);
  const Matrix& slow(std::size_t k) const;

  // Frobenius projection: each head onto ||W||_F <= w_max, then the zone's
  // combined fast + slow matrix onto the same ball by a common rescale.
  void ProjectZone(std::size_t k);

  bool operator==(const MicrozoneBank& other) const;

 private:
  std::size_t joints_;
  std::size_t features_;
  double width_;
  double min_weight_;
  double w_max_;
  ZoneWeighting weighting_;
  bool split_;
  Vector centers_;
  std::vector<Matrix> fast_;
  std::vector<Matrix> slow_;
};

// Blend weights over zones for the given phase; entries sum to one.
Vector MicrozoneWeights(const MicrozoneBank& bank, double phase);

struct AuthorityState {
  double gain = 0.35;       // g_t in [0, g_max]
  double gain_mult = 1.0;   // meta multiplier on g_t
  double confidence = 0.4;  // c_t in [0, c_max]
  double soft_gate = 1.0;   // in [0, 1]
  double tau_max = 0.15;    // elementwise clip

  // soft_gate * confidence * gain * gain_mult, always evaluated in that
  // order so baselines with a folded constant gain reproduce it bitwise.
  double Scale() const;
};

double AuthorityScale(double soft_gate, double confidence, double gain,
                      double gain_mult);

// sum_k w_k (W_fast[k] + W_slow[k]) phi; zones with zero weight are skipped.
Vector ReadoutRaw(const MicrozoneBank& bank, const Vector& zone_weights,
                  const Vector& phi);
// Same but through the slow heads only (consolidation targets).
Vector ReadoutSlow(const MicrozoneBank& bank, const Vector& zone_weights,
                   const Vector& phi);

// Elementwise clamp to [-tau_max, tau_max].
Vector ClipResidual(Vector v, double tau_max);

// Clip(auth.Scale() * ReadoutRaw(...)). Throws DimensionError on mismatch.
Vector ComputeResidual(const MicrozoneBank& bank, const AuthorityState& auth,
                       const Vector& phi, double phase);

// Zero when the residual opposes the nominal action as a whole
// (dot < 0), unchanged otherwise.
Vector DirectionalGate(const Vector& residual, const Vector& nominal);

Vector ComposeAction(const Vector& nominal, const Vector& residual);

// Snapshot of one head family as zone,row,col,value.
void WriteHeadCsv(const MicrozoneBank& bank, Head head, std::ostream& out);

}  // namespace cerebellar

#endif  // CEREBELLAR_RESIDUAL_CORE_HPP_
