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

#ifndef CEREBELLAR_REFERENCE_PHASE_HPP_
#define CEREBELLAR_REFERENCE_PHASE_HPP_

// Phase-indexed nominal reference: recorded once from the fault-free plant
// under the frozen controller, queried at run time by the phase of the
// dominant joint's (q, qd) portrait.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cerebellar/types.hpp"

namespace cerebellar {

struct ReferenceSample {
  double phase = 0.0;
  Vector q;
  Vector qd;
  Vector qdd;
};

struct KinematicSample {
  Vector q;
  Vector qd;
};

class ReferenceTrajectory {
 public:
  ReferenceTrajectory() = default;
  ReferenceTrajectory(std::vector<ReferenceSample> samples, double dt);

  std::size_t horizon() const { return samples_.size(); }
  std::size_t joints() const {
    return samples_.empty() ? 0 : samples_.front().q.size();
  }
  double dt() const { return dt_; }
  const std::vector<ReferenceSample>& samples() const { return samples_; }
  const ReferenceSample& operator[](std::size_t i) const { return samples_[i]; }

  // Nearest stored phase on the circle; ties go to the lowest index.
  // Throws InvalidArgument when empty.
  std::size_t NearestPhaseIndex(double phase) const;
  // Sample at step mod horizon.
  std::size_t TimeIndex(std::size_t step) const;

 private:
  std::vector<ReferenceSample> samples_;
  double dt_ = 0.0;
};

// min(|a - b|, 1 - |a - b|) for a, b in [0, 1).
double CircularDistance(double a, double b);

// Wraps any real onto [0, 1).
double WrapPhase(double phase);

class PhaseEstimator {
 public:
  PhaseEstimator(std::size_t dominant_joint, double smoothing,
                 double velocity_scale);

  // Raw angle of (q[j], -qd[j] / velocity_scale) mapped to [0, 1), blended
  // toward the previous output along the shorter arc. Throws InvalidArgument
  // if the dominant joint is out of range.
  double Estimate(const Vector& q, const Vector& qd);

  // Raw portrait angle without smoothing or state change.
  double RawPhase(const Vector& q, const Vector& qd) const;

  void Reset() { prev_phase_.reset(); }

  std::size_t dominant_joint() const { return dominant_joint_; }
  double smoothing() const { return smoothing_; }
  double velocity_scale() const { return velocity_scale_; }
  std::optional<double> prev_phase() const { return prev_phase_; }

 private:
  std::size_t dominant_joint_;
  double smoothing_;
  double velocity_scale_;
  std::optional<double> prev_phase_;
};

// Joint with the largest position amplitude, and velocity scale
// max|qd_j| / max|q_j| for that joint so the portrait is roughly circular.
PhaseEstimator DefaultEstimatorFor(const std::vector<KinematicSample>& rollout,
                                   double smoothing);

// Runs the estimator over the rollout in order and finite-differences qd for
// the accelerations (forward difference; last sample copies its
// predecessor). Throws InvalidArgument for fewer than two samples or dt <= 0.
ReferenceTrajectory BuildReference(const std::vector<KinematicSample>& rollout,
                                   double dt, PhaseEstimator& estimator);

// CSV: step,phase,q_0..,qd_0..,qdd_0.. at full double precision.
void WriteReferenceCsv(const ReferenceTrajectory& ref, std::ostream& out);
void WriteReferenceCsv(const ReferenceTrajectory& ref, const std::string& path);
ReferenceTrajectory ReadReferenceCsv(std::istream& in, double dt);
ReferenceTrajectory ReadReferenceCsv(const std::string& path, double dt);

}  // namespace cerebellar

#endif  // CEREBELLAR_REFERENCE_PHASE_HPP_
