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

#include "cerebellar/reference_phase.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cerebellar/csv.hpp"
#include "cerebellar/errors.hpp"

namespace cerebellar {

ReferenceTrajectory::ReferenceTrajectory(std::vector<ReferenceSample> samples,
                                         double dt)
    : samples_(std::move(samples)), dt_(dt) {}

std::size_t ReferenceTrajectory::NearestPhaseIndex(double phase) const {
  if (samples_.empty()) throw InvalidArgument("empty reference trajectory");
  std::size_t best = 0;
  double best_dist = CircularDistance(phase, samples_[0].phase);
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    const double d = CircularDistance(phase, samples_[i].phase);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

std::size_t ReferenceTrajectory::TimeIndex(std::size_t step) const {
  if (samples_.empty()) throw InvalidArgument("empty reference trajectory");
  return step % samples_.size();
}

double CircularDistance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

double WrapPhase(double phase) {
  double w = phase - std::floor(phase);
  // floor can leave exactly 1.0 for tiny negative inputs.
  if (w >= 1.0) w = 0.0;
  return w;
}

PhaseEstimator::PhaseEstimator(std::size_t dominant_joint, double smoothing,
                               double velocity_scale)
    : dominant_joint_(dominant_joint),
      smoothing_(smoothing),
      velocity_scale_(velocity_scale) {
  if (!(smoothing >= 0.0 && smoothing < 1.0)) {
    throw InvalidArgument("phase smoothing must lie in [0, 1)");
  }
  if (!(velocity_scale > 0.0)) {
    throw InvalidArgument("phase velocity scale must be positive");
  }
}

double PhaseEstimator::RawPhase(const Vector& q, const Vector& qd) const {
  if (dominant_joint_ >= static_cast<std::size_t>(q.size()) ||
      dominant_joint_ >= static_cast<std::size_t>(qd.size())) {
    throw InvalidArgument("phase estimator: dominant joint " +
                          std::to_string(dominant_joint_) + " out of range");
  }
  const auto j = static_cast<Eigen::Index>(dominant_joint_);
  const double angle = std::atan2(-qd[j] / velocity_scale_, q[j]);
  return WrapPhase(angle / (2.0 * std::numbers::pi));
}

double PhaseEstimator::Estimate(const Vector& q, const Vector& qd) {
  const double raw = RawPhase(q, qd);
  if (!prev_phase_ || smoothing_ == 0.0) {
    prev_phase_ = raw;
    return raw;
  }
  // Shortest signed arc from prev to raw, in (-0.5, 0.5].
  double arc = raw - *prev_phase_;
  arc -= std::round(arc);
  const double blended = WrapPhase(*prev_phase_ + (1.0 - smoothing_) * arc);
  prev_phase_ = blended;
  return blended;
}

PhaseEstimator DefaultEstimatorFor(const std::vector<KinematicSample>& rollout,
                                   double smoothing) {
  if (rollout.empty()) throw InvalidArgument("empty rollout");
  const Eigen::Index joints = rollout.front().q.size();
  Vector q_amp = Vector::Zero(joints);
  Vector qd_amp = Vector::Zero(joints);
  for (const auto& s : rollout) {
    q_amp = q_amp.cwiseMax(s.q.cwiseAbs());
    qd_amp = qd_amp.cwiseMax(s.qd.cwiseAbs());
  }
  Eigen::Index dominant = 0;
  q_amp.maxCoeff(&dominant);
  double scale = 1.0;
  if (q_amp[dominant] > 0.0 && qd_amp[dominant] > 0.0) {
    scale = qd_amp[dominant] / q_amp[dominant];
  }
  return PhaseEstimator(static_cast<std::size_t>(dominant), smoothing, scale);
}

ReferenceTrajectory BuildReference(const std::vector<KinematicSample>& rollout,
                                   double dt, PhaseEstimator& estimator) {
  if (rollout.size() < 2) {
    throw InvalidArgument("reference rollout needs at least two samples");
  }
  if (!(dt > 0.0)) throw InvalidArgument("reference dt must be positive");
  std::vector<ReferenceSample> samples;
  samples.reserve(rollout.size());
  for (const auto& s : rollout) {
    ReferenceSample rs;
    rs.phase = estimator.Estimate(s.q, s.qd);
    rs.q = s.q;
    rs.qd = s.qd;
    samples.push_back(std::move(rs));
  }
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    samples[i].qdd = (samples[i + 1].qd - samples[i].qd) / dt;
  }
  samples.back().qdd = samples[samples.size() - 2].qdd;
  return ReferenceTrajectory(std::move(samples), dt);
}

void WriteReferenceCsv(const ReferenceTrajectory& ref, std::ostream& out) {
  const std::size_t joints = ref.joints();
  out << "step,phase";
  for (const char* block : {"q", "qd", "qdd"}) {
    for (std::size_t j = 0; j < joints; ++j) out << ',' << block << '_' << j;
  }
  out << '\n';
  for (std::size_t i = 0; i < ref.horizon(); ++i) {
    const auto& s = ref[i];
    out << i << ',' << FormatDouble(s.phase);
    for (const Vector* v : {&s.q, &s.qd, &s.qdd}) {
      for (Eigen::Index j = 0; j < v->size(); ++j) {
        out << ',' << FormatDouble((*v)[j]);
      }
    }
    out << '\n';
  }
}

void WriteReferenceCsv(const ReferenceTrajectory& ref,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MissingArtifactError("cannot open " + path + " for writing");
  WriteReferenceCsv(ref, out);
}

ReferenceTrajectory ReadReferenceCsv(std::istream& in, double dt) {
  CsvTable table = ReadCsv(in);
  const std::size_t cols = table.header.size();
  if (cols < 5 || (cols - 2) % 3 != 0 || table.header[0] != "step" ||
      table.header[1] != "phase") {
    throw InvalidArgument("reference CSV header is malformed");
  }
  const auto joints = static_cast<Eigen::Index>((cols - 2) / 3);
  std::vector<ReferenceSample> samples;
  for (const auto& row : table.rows) {
    if (row.size() != cols) throw InvalidArgument("reference CSV ragged row");
    ReferenceSample s;
    s.phase = ParseDouble(row[1]);
    s.q.resize(joints);
    s.qd.resize(joints);
    s.qdd.resize(joints);
    for (Eigen::Index j = 0; j < joints; ++j) {
      s.q[j] = ParseDouble(row[2 + j]);
      s.qd[j] = ParseDouble(row[2 + joints + j]);
      s.qdd[j] = ParseDouble(row[2 + 2 * joints + j]);
    }
    samples.push_back(std::move(s));
  }
  if (samples.size() < 2) throw InvalidArgument("reference CSV too short");
  return ReferenceTrajectory(std::move(samples), dt);
}

ReferenceTrajectory ReadReferenceCsv(const std::string& path, double dt) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("missing reference file " + path);
  return ReadReferenceCsv(in, dt);
}

}  // namespace cerebellar
