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

#include "cerebellar/adaptation.hpp"

#include "cerebellar/errors.hpp"
#include "cerebellar/kernels.hpp"

namespace cerebellar {

TrackingError CompositeError(const Vector& q, const Vector& qd,
                             const ReferenceSample& ref, const Vector& lambda) {
  RequireSameSize(q.size(), ref.q.size(), "tracking q");
  RequireSameSize(qd.size(), ref.qd.size(), "tracking qd");
  RequireSameSize(lambda.size(), q.size(), "tracking Lambda");
  if ((lambda.array() <= 0.0).any()) {
    throw InvalidArgument("Lambda entries must be positive");
  }
  TrackingError err;
  err.e = ref.q - q;
  err.edot = ref.qd - qd;
  err.r = err.edot + lambda.cwiseProduct(err.e);
  return err;
}

void NlmsDeltaInto(const Vector& r, const Vector& phi, const Vector& eta,
                   double epsilon, Matrix& delta) {
  RequireSameSize(eta.size(), r.size(), "nlms eta");
  if (!(epsilon > 0.0)) throw InvalidArgument("nlms epsilon must be > 0");
  const double denom = kernels::Norm2(phi) + epsilon;
  Vector coef(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) coef[j] = eta[j] * r[j] / denom;
  kernels::Outer(coef, phi, delta);
}

Matrix NlmsDelta(const Vector& r, const Vector& phi, const Vector& eta,
                 double epsilon) {
  Matrix delta;
  NlmsDeltaInto(r, phi, eta, epsilon, delta);
  return delta;
}

bool UpdateHeads(MicrozoneBank& bank, const Vector& zone_weights,
                 const Matrix& delta, const LearnerConfig& cfg,
                 MomentumState& momentum, std::size_t step, double r_norm) {
  RequireSameSize(zone_weights.size(), bank.zones(), "update zone weights");
  RequireSameSize(delta.rows(), bank.joints(), "update delta rows");
  RequireSameSize(delta.cols(), bank.features(), "update delta cols");
  if (step < cfg.learning_start || r_norm < cfg.deadzone) return false;

  if (momentum.m.rows() != delta.rows() || momentum.m.cols() != delta.cols()) {
    momentum.m = Matrix::Zero(delta.rows(), delta.cols());
  }
  kernels::Momentum(momentum.m, delta, cfg.momentum);

  for (std::size_t k = 0; k < bank.zones(); ++k) {
    const double wk = zone_weights[static_cast<Eigen::Index>(k)];
    if (wk == 0.0) continue;
    if (bank.split_heads()) {
      kernels::HeadUpdate(bank.fast(k), momentum.m, 1.0 - cfg.fast_decay,
                          cfg.fast_scale * wk, cfg.l2);
      kernels::HeadUpdate(bank.slow(k), momentum.m, 1.0 - cfg.slow_decay,
                          cfg.slow_scale * wk, cfg.l2);
    } else {
      kernels::HeadUpdate(bank.fast(k), momentum.m, 1.0, cfg.single_scale * wk,
                          cfg.l2);
    }
    bank.ProjectZone(k);
  }
  return true;
}

}  // namespace cerebellar
