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

#include "cerebellar/residual_core.hpp"

#include <cmath>
#include <ostream>

#include "cerebellar/csv.hpp"
#include "cerebellar/errors.hpp"
#include "cerebellar/kernels.hpp"
#include "cerebellar/reference_phase.hpp"

namespace cerebellar {

MicrozoneBank::MicrozoneBank(const MicrozoneConfig& cfg, std::size_t joints,
                             std::size_t features)
    : joints_(joints),
      features_(features),
      width_(cfg.width > 0.0 ? cfg.width
                             : 1.0 / (2.0 * static_cast<double>(cfg.zones))),
      min_weight_(cfg.min_weight),
      w_max_(cfg.w_max),
      weighting_(cfg.weighting),
      split_(cfg.split_heads) {
  if (cfg.zones == 0) throw InvalidArgument("microzone count must be >= 1");
  if (joints == 0 || features == 0) {
    throw InvalidArgument("microzone heads need joints >= 1 and features >= 1");
  }
  if (!(cfg.w_max > 0.0)) throw InvalidArgument("w_max must be positive");
  if (cfg.min_weight < 0.0) throw InvalidArgument("min_weight must be >= 0");
  const auto k_count = static_cast<Eigen::Index>(cfg.zones);
  centers_.resize(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    centers_[k] = static_cast<double>(k) / static_cast<double>(cfg.zones);
  }
  const auto rows = static_cast<Eigen::Index>(joints);
  const auto cols = static_cast<Eigen::Index>(features);
  fast_.assign(cfg.zones, Matrix::Zero(rows, cols));
  if (split_) slow_.assign(cfg.zones, Matrix::Zero(rows, cols));
}

Matrix& MicrozoneBank::slow(std::size_t k) {
  if (!split_) throw InvalidArgument("bank has no slow heads");
  return slow_[k];
}

const Matrix& MicrozoneBank::slow(std::size_t k) const {
  if (!split_) throw InvalidArgument("bank has no slow heads");
  return slow_[k];
}

void MicrozoneBank::ProjectZone(std::size_t k) {
  const double fast_norm = kernels::FrobeniusNorm(fast_[k]);
  if (fast_norm > w_max_) kernels::Scale(fast_[k], w_max_ / fast_norm);
  if (!split_) return;
  const double slow_norm = kernels::FrobeniusNorm(slow_[k]);
  if (slow_norm > w_max_) kernels::Scale(slow_[k], w_max_ / slow_norm);
  const Matrix combined = fast_[k] + slow_[k];
  const double combined_norm = kernels::FrobeniusNorm(combined);
  if (combined_norm > w_max_) {
    const double s = w_max_ / combined_norm;
    kernels::Scale(fast_[k], s);
    kernels::Scale(slow_[k], s);
  }
}

bool MicrozoneBank::operator==(const MicrozoneBank& other) const {
  if (fast_.size() != other.fast_.size() || split_ != other.split_) {
    return false;
  }
  for (std::size_t k = 0; k < fast_.size(); ++k) {
    if (fast_[k] != other.fast_[k]) return false;
    if (split_ && slow_[k] != other.slow_[k]) return false;
  }
  return true;
}

Vector MicrozoneWeights(const MicrozoneBank& bank, double phase) {
  const auto k_count = static_cast<Eigen::Index>(bank.zones());
  Vector w(k_count);
  if (k_count == 1) {
    w[0] = 1.0;
    return w;
  }
  if (bank.weighting() == ZoneWeighting::kHard) {
    w.setZero();
    Eigen::Index best = 0;
    double best_d = CircularDistance(phase, bank.centers()[0]);
    for (Eigen::Index k = 1; k < k_count; ++k) {
      const double d = CircularDistance(phase, bank.centers()[k]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    w[best] = 1.0;
    return w;
  }
  const double two_w2 = 2.0 * bank.width() * bank.width();
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double d = CircularDistance(phase, bank.centers()[k]);
    w[k] = std::max(std::exp(-d * d / two_w2), bank.min_weight());
  }
  return w / w.sum();
}

double AuthorityScale(double soft_gate, double confidence, double gain,
                      double gain_mult) {
  return soft_gate * confidence * gain * gain_mult;
}

double AuthorityState::Scale() const {
  return AuthorityScale(soft_gate, confidence, gain, gain_mult);
}

namespace {

void CheckReadoutArgs(const MicrozoneBank& bank, const Vector& zone_weights,
                      const Vector& phi) {
  RequireSameSize(phi.size(), bank.features(), "readout features");
  RequireSameSize(zone_weights.size(), bank.zones(), "zone weights");
}

}  // namespace

Vector ReadoutRaw(const MicrozoneBank& bank, const Vector& zone_weights,
                  const Vector& phi) {
  CheckReadoutArgs(bank, zone_weights, phi);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(bank.joints()));
  for (std::size_t k = 0; k < bank.zones(); ++k) {
    const double wk = zone_weights[static_cast<Eigen::Index>(k)];
    if (wk == 0.0) continue;
    kernels::AccumulateReadout(bank.fast(k), phi, wk, out);
    if (bank.split_heads()) kernels::AccumulateReadout(bank.slow(k), phi, wk, out);
  }
  return out;
}

Vector ReadoutSlow(const MicrozoneBank& bank, const Vector& zone_weights,
                   const Vector& phi) {
  CheckReadoutArgs(bank, zone_weights, phi);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(bank.joints()));
  if (!bank.split_heads()) return out;
  for (std::size_t k = 0; k < bank.zones(); ++k) {
    const double wk = zone_weights[static_cast<Eigen::Index>(k)];
    if (wk == 0.0) continue;
    kernels::AccumulateReadout(bank.slow(k), phi, wk, out);
  }
  return out;
}

Vector ClipResidual(Vector v, double tau_max) {
  return v.cwiseMax(-tau_max).cwiseMin(tau_max);
}

Vector ComputeResidual(const MicrozoneBank& bank, const AuthorityState& auth,
                       const Vector& phi, double phase) {
  const Vector weights = MicrozoneWeights(bank, phase);
  const Vector raw = ReadoutRaw(bank, weights, phi);
  return ClipResidual(auth.Scale() * raw, auth.tau_max);
}

Vector DirectionalGate(const Vector& residual, const Vector& nominal) {
  RequireSameSize(residual.size(), nominal.size(), "directional gate");
  if (kernels::Dot(residual, nominal) < 0.0) {
    return Vector::Zero(residual.size());
  }
  return residual;
}

Vector ComposeAction(const Vector& nominal, const Vector& residual) {
  RequireSameSize(residual.size(), nominal.size(), "compose action");
  return nominal + residual;
}

void WriteHeadCsv(const MicrozoneBank& bank, Head head, std::ostream& out) {
  out << "zone,row,col,value\n";
  for (std::size_t k = 0; k < bank.zones(); ++k) {
    const Matrix& w = head == Head::kFast ? bank.fast(k) : bank.slow(k);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        out << k << ',' << r << ',' << c << ',' << FormatDouble(w(r, c))
            << '\n';
      }
    }
  }
}

}  // namespace cerebellar
