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

#ifndef CEREBELLAR_ADAPTATION_HPP_
#define CEREBELLAR_ADAPTATION_HPP_

// Error-driven local learning for the microzone heads.

#include "cerebellar/reference_phase.hpp"
#include "cerebellar/residual_core.hpp"
#include "cerebellar/types.hpp"

namespace cerebellar {

struct TrackingError {
  Vector e;     // q_ref - q
  Vector edot;  // qd_ref - qd
  Vector r;     // edot + Lambda e
};

// Throws DimensionError on mismatched sizes and InvalidArgument if any
// Lambda entry is not positive.
TrackingError CompositeError(const Vector& q, const Vector& qd,
                             const ReferenceSample& ref, const Vector& lambda);

// Row j = eta[j] r[j] phi^T / (||phi||_2 + epsilon).
Matrix NlmsDelta(const Vector& r, const Vector& phi, const Vector& eta,
                 double epsilon);
void NlmsDeltaInto(const Vector& r, const Vector& phi, const Vector& eta,
                   double epsilon, Matrix& delta);

struct LearnerConfig {
  double eta_base = 0.05;  // per joint, broadcast
  double fast_scale = 5.0;
  double slow_scale = 0.2;
  double single_scale = 1.0;  // rate of the lone head when heads are not split
  double fast_decay = 1e-3;
  double slow_decay = 0.0;
  double deadzone = 0.25;
  double momentum = 0.85;
  double l2 = 4e-6;
  double epsilon = 1e-6;
  std::size_t learning_start = 200;
};

// Momentum buffer shared by all zones and both heads of one controller.
struct MomentumState {
  Matrix m;
};

// Applies one momentum-smoothed update to every zone with nonzero blend
// weight, then projects the touched zones. Returns false (and leaves bank
// and momentum untouched) before learning_start or inside the deadzone.
bool UpdateHeads(MicrozoneBank& bank, const Vector& zone_weights,
                 const Matrix& delta, const LearnerConfig& cfg,
                 MomentumState& momentum, std::size_t step, double r_norm);

}  // namespace cerebellar

#endif  // CEREBELLAR_ADAPTATION_HPP_
