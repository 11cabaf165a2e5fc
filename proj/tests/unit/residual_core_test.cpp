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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cerebellar/errors.hpp"
#include "oracles.hpp"

namespace cerebellar {
namespace {

MicrozoneConfig Zones(std::size_t k, ZoneWeighting w = ZoneWeighting::kSoft) {
  MicrozoneConfig c;
  c.zones = k;
  c.weighting = w;
  return c;
}

TEST(MicrozoneWeightsTest, SingleZoneIsOne) {
  const MicrozoneBank bank(Zones(1), 2, 3);
  const Vector w = MicrozoneWeights(bank, 0.42);
  ASSERT_EQ(w.size(), 1);
  EXPECT_EQ(w[0], 1.0);
}

TEST(MicrozoneWeightsTest, PeakAtCenter) {
  MicrozoneConfig c = Zones(4);
  c.width = 0.05;
  const MicrozoneBank bank(c, 1, 1);
  for (int k = 0; k < 4; ++k) {
    Eigen::Index arg;
    MicrozoneWeights(bank, 0.25 * k).maxCoeff(&arg);
    EXPECT_EQ(arg, k);
  }
}

TEST(MicrozoneWeightsTest, MidpointSymmetry) {
  const MicrozoneBank bank(Zones(4), 1, 1);
  const Vector w = MicrozoneWeights(bank, 0.125);
  EXPECT_NEAR(w[0], w[1], 1e-15);
  EXPECT_NEAR(w[2], w[3], 1e-15);
}

TEST(MicrozoneWeightsTest, DefaultWidthAndCenters) {
  const MicrozoneBank bank(Zones(4), 1, 1);
  EXPECT_DOUBLE_EQ(bank.width(), 0.125);
  EXPECT_EQ(bank.centers()[3], 0.75);
}

TEST(MicrozoneWeightsTest, NormalizedAndFloored) {
  const MicrozoneBank bank(Zones(4), 1, 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double phase = u(rng);
    const Vector w = MicrozoneWeights(bank, phase);
    ASSERT_NEAR(w.sum(), 1.0, 1e-12);
    // The floor survives normalization scaled by at most K.
    ASSERT_GE(w.minCoeff(), 0.05 / 4.0);
  }
}

TEST(MicrozoneWeightsTest, HardIsOneHot) {
  const MicrozoneBank bank(Zones(4, ZoneWeighting::kHard), 1, 1);
  const Vector w = MicrozoneWeights(bank, 0.7);
  EXPECT_EQ(w.sum(), 1.0);
  EXPECT_EQ(w[3], 1.0);
}

TEST(ComputeResidualTest, ZeroWeightsGiveZero) {
  const MicrozoneBank bank(Zones(4), 2, 5);
  AuthorityState auth;
  auth.soft_gate = 1.0;
  EXPECT_EQ(ComputeResidual(bank, auth, Vector::Ones(5), 0.3), Vector::Zero(2));
}

TEST(ComputeResidualTest, ZeroGainGivesZero) {
  MicrozoneBank bank(Zones(2), 2, 3);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 2; ++k) {
    bank.fast(k) = oracle::RandomMatrix(2, 3, rng);
    bank.slow(k) = oracle::RandomMatrix(2, 3, rng);
  }
  AuthorityState auth;
  auth.gain = 0.0;
  const Vector r = ComputeResidual(bank, auth, Vector::Ones(3), 0.1);
  EXPECT_EQ(r.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ComputeResidualTest, HandEvaluatedSingleZone) {
  MicrozoneBank bank(Zones(1), 1, 2);
  bank.fast(0) << 0.25, 0.5;
  bank.slow(0) << 0.75, 0.5;
  AuthorityState auth;
  auth.gain = 0.35;
  auth.confidence = 0.4;
  auth.soft_gate = 1.0;
  auth.tau_max = 0.15;
  Vector phi(2);
  phi << 0.1, 0.2;
  EXPECT_NEAR(ComputeResidual(bank, auth, phi, 0.0)[0], 0.042, 1e-15);
}

TEST(ComputeResidualTest, ClipBoundsInfinityNorm) {
  MicrozoneBank bank(Zones(4), 3, 6);
  std::mt19937_64 rng(7);
  AuthorityState auth;
  auth.gain = 0.7;
  auth.confidence = 0.7;
  auth.gain_mult = 2.0;
  for (int trial = 0; trial < 200; ++trial) {
    for (int k = 0; k < 4; ++k) bank.fast(k) = oracle::RandomMatrix(3, 6, rng, -5, 5);
    const Vector phi = oracle::RandomVector(6, rng, -3, 3);
    const Vector r = ComputeResidual(bank, auth, phi, trial / 200.0);
    ASSERT_LE(r.lpNorm<Eigen::Infinity>(), auth.tau_max);
  }
}

TEST(ComputeResidualTest, GainScalesPreClipLinearly) {
  MicrozoneBank bank(Zones(4), 2, 4);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 4; ++k) {
    bank.fast(k) = oracle::RandomMatrix(2, 4, rng, -0.1, 0.1);
    bank.slow(k) = oracle::RandomMatrix(2, 4, rng, -0.1, 0.1);
  }
  AuthorityState a;
  a.tau_max = 1e9;
  const Vector phi = oracle::RandomVector(4, rng);
  const Vector full = ComputeResidual(bank, a, phi, 0.4);
  for (double s : {0.0, 0.25, 0.5, 1.0}) {
    AuthorityState b = a;
    b.gain = a.gain * s;
    const Vector scaled = ComputeResidual(bank, b, phi, 0.4);
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(scaled[j], s * full[j], 1e-15);
  }
}

TEST(ComputeResidualTest, InactiveZoneDoesNotLeak) {
  MicrozoneBank bank(Zones(4, ZoneWeighting::kHard), 2, 3);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 4; ++k) bank.fast(k) = oracle::RandomMatrix(2, 3, rng);
  AuthorityState auth;
  const Vector phi = oracle::RandomVector(3, rng);
  const Vector before = ComputeResidual(bank, auth, phi, 0.02);
  bank.fast(2) = oracle::RandomMatrix(2, 3, rng, -9, 9);
  bank.slow(2) = oracle::RandomMatrix(2, 3, rng, -9, 9);
  EXPECT_EQ(ComputeResidual(bank, auth, phi, 0.02), before);
}

TEST(ComputeResidualTest, DimensionMismatchThrows) {
  const MicrozoneBank bank(Zones(2), 2, 3);
  EXPECT_THROW(ComputeResidual(bank, AuthorityState{}, Vector::Ones(4), 0.0),
               DimensionError);
}

TEST(DirectionalGateTest, Examples) {
  Vector res(2), nom(2);
  res << -1, 0;
  nom << 1, 0;
  EXPECT_EQ(DirectionalGate(res, nom), Vector::Zero(2));
  res << 1, 0;
  EXPECT_EQ(DirectionalGate(res, nom), res);
  res << 0, 3;
  EXPECT_EQ(DirectionalGate(res, nom), res);
  EXPECT_THROW(DirectionalGate(res, Vector::Ones(3)), DimensionError);
}

TEST(DirectionalGateTest, GlobalNotPerJoint) {
  Vector res(2), nom(2);
  res << -0.1, 1.0;
  nom << 1.0, 1.0;
  EXPECT_EQ(DirectionalGate(res, nom), res);
}

TEST(DirectionalGateTest, Idempotent) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Vector a = oracle::RandomVector(4, rng), b = oracle::RandomVector(4, rng);
    const Vector once = DirectionalGate(a, b);
    ASSERT_EQ(DirectionalGate(once, b), once);
  }
}

TEST(ComposeActionTest, Arithmetic) {
  Vector nom(2), res(2), expect(2);
  nom << 1, 2;
  res << 0.1, -0.1;
  expect << 1.1, 1.9;
  EXPECT_EQ(ComposeAction(nom, res), expect);
  EXPECT_EQ(ComposeAction(nom, Vector::Zero(2)), nom);
  EXPECT_THROW(ComposeAction(nom, Vector::Zero(3)), DimensionError);
}

TEST(ProjectionTest, HeadsAndSumWithinBall) {
  MicrozoneConfig c = Zones(2);
  c.w_max = 1.5;
  MicrozoneBank bank(c, 3, 4);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    bank.fast(0) = oracle::RandomMatrix(3, 4, rng, -2, 2);
    bank.slow(0) = oracle::RandomMatrix(3, 4, rng, -2, 2);
    bank.ProjectZone(0);
    ASSERT_LE(bank.fast(0).norm(), 1.5 * (1 + 1e-12));
    ASSERT_LE(bank.slow(0).norm(), 1.5 * (1 + 1e-12));
    ASSERT_LE((bank.fast(0) + bank.slow(0)).norm(), 1.5 * (1 + 1e-12));
  }
}

TEST(ProjectionTest, InsideBallUntouched) {
  MicrozoneBank bank(Zones(1), 1, 2);
  bank.fast(0) << 0.1, 0.2;
  bank.slow(0) << -0.3, 0.1;
  const MicrozoneBank before = bank;
  bank.ProjectZone(0);
  EXPECT_TRUE(bank == before);
}

TEST(MicrozoneBankTest, SingleHeadModeHasNoSlow) {
  MicrozoneConfig c = Zones(1);
  c.split_heads = false;
  MicrozoneBank bank(c, 1, 1);
  EXPECT_THROW(bank.slow(0), InvalidArgument);
}

TEST(MicrozoneBankTest, RejectsBadConfig) {
  EXPECT_THROW(MicrozoneBank(Zones(0), 1, 1), InvalidArgument);
  EXPECT_THROW(MicrozoneBank(Zones(1), 0, 1), InvalidArgument);
  MicrozoneConfig c = Zones(1);
  c.w_max = 0.0;
  EXPECT_THROW(MicrozoneBank(c, 1, 1), InvalidArgument);
}

TEST(HeadCsvTest, LayoutAndCount) {
  MicrozoneBank bank(Zones(2), 2, 3);
  bank.fast(1)(1, 2) = 0.5;
  std::stringstream out;
  WriteHeadCsv(bank, Head::kFast, out);
  std::string line;
  std::getline(out, line);
  EXPECT_EQ(line, "zone,row,col,value");
  int rows = 0;
  std::string last;
  while (std::getline(out, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 12);
  EXPECT_EQ(last, "1,1,2,0.5");
}

}  // namespace
}  // namespace cerebellar
