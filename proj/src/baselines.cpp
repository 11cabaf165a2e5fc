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

#include "cerebellar/baselines.hpp"

#include <sstream>

#include "cerebellar/csv.hpp"
#include "cerebellar/errors.hpp"
#include "cerebellar/kernels.hpp"
#include "cerebellar/residual_core.hpp"

namespace cerebellar {

namespace {

Vector FinishResidual(Vector raw, double tau_max, bool gate,
                      const Vector& nominal) {
  Vector res = ClipResidual(std::move(raw), tau_max);
  return gate ? DirectionalGate(res, nominal) : res;
}

}  // namespace

LmsBaseline::LmsBaseline(const LmsConfig& cfg, std::size_t joints)
    : cfg_(cfg),
      w_(Matrix::Zero(static_cast<Eigen::Index>(joints),
                      static_cast<Eigen::Index>(3 * joints))) {
  if (joints == 0) throw InvalidArgument("lms baseline needs joints >= 1");
  if (!(cfg.epsilon > 0.0)) throw InvalidArgument("lms epsilon must be > 0");
}

Vector LmsBaseline::Residual(const Vector& x, const Vector& nominal) const {
  RequireSameSize(x.size(), w_.cols(), "lms input");
  RequireSameSize(nominal.size(), w_.rows(), "lms nominal");
  return FinishResidual(cfg_.gain * (w_ * x), cfg_.tau_max,
                        cfg_.directional_gate, nominal);
}

bool LmsBaseline::Learn(const Vector& x, const Vector& r, std::size_t step) {
  RequireSameSize(x.size(), w_.cols(), "lms input");
  RequireSameSize(r.size(), w_.rows(), "lms error");
  if (step < cfg_.warmup) return false;
  const double denom = x.squaredNorm() + cfg_.epsilon;
  w_.noalias() += (cfg_.eta / denom) * r * x.transpose();
  return true;
}

std::string LmsBaseline::SerializeParams() const {
  std::ostringstream os;
  os << "eta=" << FormatDouble(cfg_.eta) << ";gain=" << FormatDouble(cfg_.gain)
     << ";lambda=" << FormatDouble(cfg_.lambda);
  return os.str();
}

CmacBaseline::CmacBaseline(const CmacConfig& cfg, FeatureExpansion expansion,
                           std::size_t joints)
    : cfg_(cfg),
      expansion_(std::move(expansion)),
      w_(Matrix::Zero(static_cast<Eigen::Index>(joints),
                      static_cast<Eigen::Index>(expansion_.feature_count()))),
      m_(Matrix::Zero(w_.rows(), w_.cols())) {
  if (joints == 0) throw InvalidArgument("cmac baseline needs joints >= 1");
  if (!(cfg.epsilon > 0.0)) throw InvalidArgument("cmac epsilon must be > 0");
  if (!(cfg.w_max > 0.0)) throw InvalidArgument("cmac w_max must be > 0");
}

Vector CmacBaseline::Features(const Vector& x) const {
  return expansion_.Expand(x);
}

Vector CmacBaseline::Residual(const Vector& h, const Vector& nominal) const {
  RequireSameSize(h.size(), w_.cols(), "cmac features");
  RequireSameSize(nominal.size(), w_.rows(), "cmac nominal");
  Vector raw = Vector::Zero(w_.rows());
  kernels::AccumulateReadout(w_, h, 1.0, raw);
  return FinishResidual(cfg_.gain * raw, cfg_.tau_max, cfg_.directional_gate,
                        nominal);
}

bool CmacBaseline::Learn(const Vector& h, const Vector& r, std::size_t step) {
  RequireSameSize(h.size(), w_.cols(), "cmac features");
  RequireSameSize(r.size(), w_.rows(), "cmac error");
  if (step < cfg_.warmup || kernels::Norm2(r) < cfg_.deadzone) return false;
  const double denom = kernels::Norm2(h) + cfg_.epsilon;
  Vector coef(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) coef[j] = cfg_.eta * r[j] / denom;
  kernels::Outer(coef, h, delta_);
  kernels::Momentum(m_, delta_, cfg_.momentum);
  kernels::HeadUpdate(w_, m_, 1.0, 1.0, cfg_.l2);
  const double norm = kernels::FrobeniusNorm(w_);
  if (norm > cfg_.w_max) kernels::Scale(w_, cfg_.w_max / norm);
  return true;
}

std::string CmacBaseline::SerializeParams() const {
  std::ostringstream os;
  os << "eta=" << FormatDouble(cfg_.eta) << ";gain=" << FormatDouble(cfg_.gain)
     << ";lambda=" << FormatDouble(cfg_.lambda);
  return os.str();
}

}  // namespace cerebellar
