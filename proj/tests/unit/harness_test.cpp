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


#include "cerebellar/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cerebellar/errors.hpp"

namespace cerebellar {
namespace {

ExperimentConfig Small() {
  ExperimentConfig c;
  c.seeds = {0, 1};
  c.episodes = 1;
  c.calibration_episodes = 2;
  c.features.count = 128;
  c.plant.horizon = 600;
  c.workers = 1;
  return c;
}

const Calibration& SharedCalibration() {
  static const Calibration cal = Calibrate(Small());
  return cal;
}

FaultSpec Scale(double sev) {
  FaultSpec f;
  f.family = FaultFamily::kActuatorScale;
  f.severity = sev;
  return f;
}

TEST(CalibrationTest, NominalTrackingIsTight) {
  const Calibration& cal = SharedCalibration();
  ASSERT_EQ(cal.nominal.size(), 2u);
  for (const auto& n : cal.nominal) EXPECT_LE(n.rms, 1e-2);
  EXPECT_LT(cal.nominal_reward_rate, 0.0);
  EXPECT_EQ(cal.reference.samples().size(), Small().plant.PeriodSteps());
}

TEST(CalibrationTest, FrozenReproducesCalibration) {
  const Calibration& cal = SharedCalibration();
  const EpisodeResult r = RunEpisode(Small(), cal, Method::kFrozen, NoFault(), 0, 0);
  EXPECT_EQ(r.episode_return, cal.nominal[0].episode_return);
}

TEST(CalibrationTest, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "cerebellar_cal_test";
  std::filesystem::remove_all(dir);
  WriteCalibration(SharedCalibration(), dir.string());
  const Calibration back = ReadCalibration(dir.string(), Small().plant.dt);
  EXPECT_EQ(back.dominant_joint, SharedCalibration().dominant_joint);
  EXPECT_EQ(back.reference.samples().size(), SharedCalibration().reference.samples().size());
  EXPECT_DOUBLE_EQ(back.nominal_reward_rate, SharedCalibration().nominal_reward_rate);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(ReadCalibration(dir.string(), 0.01), MissingArtifactError);
}

// LMS has no deadzone, so it is excluded: it learns from the sub-millirad
// tracking noise of the healthy plant.
TEST(EpisodeTest, DeadzonedMethodsMatchFrozenWithoutFault) {
  const Calibration& cal = SharedCalibration();
  const ExperimentConfig cfg = Small();
  const double frozen = RunEpisode(cfg, cal, Method::kFrozen, NoFault(), 1, 0).episode_return;
  for (Method m : {Method::kOurs, Method::kCmac}) {
    const EpisodeResult r = RunEpisode(cfg, cal, m, NoFault(), 1, 0);
    EXPECT_EQ(r.episode_return, frozen) << MethodName(m);
    EXPECT_EQ(r.residual_energy, 0.0) << MethodName(m);
  }
}

TEST(EpisodeTest, Deterministic) {
  const Calibration& cal = SharedCalibration();
  EpisodeOptions opt;
  opt.record_steps = true;
  const auto a = RunEpisode(Small(), cal, Method::kOurs, Scale(0.6), 3, 1, opt);
  const auto b = RunEpisode(Small(), cal, Method::kOurs, Scale(0.6), 3, 1, opt);
  EXPECT_EQ(a.episode_return, b.episode_return);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) ASSERT_EQ(a.steps[t].action, b.steps[t].action);
  const auto c = RunEpisode(Small(), cal, Method::kOurs, Scale(0.6), 4, 1);
  EXPECT_NE(a.episode_return, c.episode_return);
}

TEST(EpisodeTest, RecordedStepsAreConsistent) {
  EpisodeOptions opt;
  opt.record_steps = true;
  const auto r = RunEpisode(Small(), SharedCalibration(), Method::kOurs, Scale(0.5), 0, 0, opt);
  ASSERT_EQ(r.steps.size(), Small().plant.horizon);
  double sum = 0.0;
  for (const auto& s : r.steps) {
    sum += s.reward;
    ASSERT_LE(s.residual.cwiseAbs().maxCoeff(), Small().tau_max);
    ASSERT_GE(s.residual.dot(s.nominal), 0.0);
  }
  EXPECT_NEAR(sum, r.episode_return, 1e-9 * std::abs(sum));
}

TEST(EpisodeTest, FrozenDegradesWithSeverity) {
  const Calibration& cal = SharedCalibration();
  double last = RunEpisode(Small(), cal, Method::kFrozen, NoFault(), 0, 0).episode_return;
  for (double sev : {0.9, 0.7, 0.5}) {
    const double r = RunEpisode(Small(), cal, Method::kFrozen, Scale(sev), 0, 0).episode_return;
    EXPECT_LT(r, last) << sev;
    last = r;
  }
}

TEST(SweepTest, CardinalityAndSummary) {
  ExperimentConfig cfg = Small();
  cfg.episodes = 3;
  cfg.plant.horizon = 200;
  const std::vector<SweepCell> cells = {{"actuator_scale", 0.7}};
  const auto rows = RunSweep(cfg, SharedCalibration(), cells, {Method::kFrozen, Method::kOurs});
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) EXPECT_EQ(r.error_code, 0);
  const auto summary = Summarize(rows);
  ASSERT_EQ(summary.size(), 2u);
  for (const auto& s : summary) {
    EXPECT_EQ(s.count, 6u);
    if (s.method == "frozen") {
      ASSERT_TRUE(s.relative_improvement.has_value());
      EXPECT_EQ(*s.relative_improvement, 0.0);
    }
  }
}

TEST(SweepTest, SeedIsolation) {
  ExperimentConfig cfg = Small();
  cfg.plant.horizon = 200;
  const std::vector<SweepCell> cells = {{"damping_multiplier", 1.6}};
  const auto both = RunSweep(cfg, SharedCalibration(), cells, {Method::kOurs});
  cfg.seeds = {1};
  const auto one = RunSweep(cfg, SharedCalibration(), cells, {Method::kOurs});
  ASSERT_EQ(both.size(), 2u);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(both[1].episode_return, one[0].episode_return);
}

TEST(SweepTest, ResultsCsvRoundTrip) {
  ExperimentConfig cfg = Small();
  cfg.plant.horizon = 100;
  const auto rows = RunSweep(cfg, SharedCalibration(), {{"actuator_scale", 0.8}},
                             {Method::kFrozen, Method::kLms});
  std::stringstream ss;
  WriteResultsCsv(rows, ss);
  const auto back = ReadResultsCsv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].episode_return, rows[i].episode_return);
    EXPECT_EQ(back[i].method, rows[i].method);
  }
}

TEST(SummaryTest, MeanStd) {
  EXPECT_EQ(MeanStd({}).first, 0.0);
  EXPECT_EQ(MeanStd({4.0}).second, 0.0);
  const auto [m, s] = MeanStd({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(m, 2.0);
  EXPECT_DOUBLE_EQ(s, 1.0);
}

TEST(ConsolidationTest, NoFaultGivesZeroAdapter) {
  ExperimentConfig cfg = Small();
  cfg.seeds = {0};
  const auto out = ConsolidateCell(cfg, SharedCalibration(), NoFault());
  EXPECT_GT(out.pairs, 0u);
  EXPECT_EQ(out.adapter.weights.norm(), 0.0);
  EXPECT_EQ(out.rows.size(), 4u);
}

TEST(ConsolidationTest, RefusesOtherSeverity) {
  ExperimentConfig cfg = Small();
  cfg.seeds = {0};
  const auto out = ConsolidateCell(cfg, SharedCalibration(), Scale(0.6));
  EXPECT_THROW(EvaluateAdapter(cfg, SharedCalibration(), out.adapter, out.metadata,
                               Scale(0.5), Method::kAdapter, 0, 0),
               CrossSeverityError);
  EXPECT_NO_THROW(EvaluateAdapter(cfg, SharedCalibration(), out.adapter, out.metadata,
                                  Scale(0.6), Method::kAdapter, 0, 0));
}

TEST(ConsolidationTest, StackedResidualEnergyIsLower) {
  ExperimentConfig cfg = Small();
  cfg.seeds = {0};
  cfg.plant.horizon = 1000;
  const auto out = ConsolidateCell(cfg, SharedCalibration(), Scale(0.6));
  EXPECT_GT(out.ours_energy, 0.0);
  EXPECT_LT(out.stacked_energy, out.ours_energy);
}

}  // namespace
}  // namespace cerebellar
