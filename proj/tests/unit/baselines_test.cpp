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

#include <gtest/gtest.h>

#include <random>

#include "cerebellar/errors.hpp"
#include "oracles.hpp"

namespace cerebellar {
namespace {

LmsConfig OneJointLms() {
  LmsConfig c;
  c.eta = 0.1;
  c.gain = 1.0;
  c.warmup = 0;
  c.epsilon = 1e-12;
  return c;
}

TEST(LmsBaselineTest, NormalizedStepExample) {
  // One joint with a 3-wide input; only the first two entries are nonzero.
  LmsBaseline lms(OneJointLms(), 1);
  Vector x(3);
  x << 3.0, 4.0, 0.0;
  ASSERT_TRUE(lms.Learn(x, Vector::Ones(1), 0));
  EXPECT_NEAR(lms.weights()(0, 0), 0.012, 1e-12);
  EXPECT_NEAR(lms.weights()(0, 1), 0.016, 1e-12);
  EXPECT_EQ(lms.weights()(0, 2), 0.0);
}

TEST(LmsBaselineTest, MatchesLoopOracleOverManySteps) {
  std::mt19937_64 rng(2);
  LmsConfig c = OneJointLms();
  c.epsilon = 1e-6;
  LmsBaseline lms(c, 2);
  std::vector<std::vector<double>> w(2, std::vector<double>(6, 0.0));
  for (int t = 0; t < 200; ++t) {
    const Vector x = oracle::RandomVector(6, rng);
    const Vector r = oracle::RandomVector(2, rng);
    lms.Learn(x, r, t);
    double n2 = 0.0;
    for (int i = 0; i < 6; ++i) n2 += x[i] * x[i];
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 6; ++i) w[j][i] += c.eta * r[j] * x[i] / (n2 + c.epsilon);
    }
  }
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(lms.weights()(j, i), w[j][i], 1e-12);
  }
}

TEST(LmsBaselineTest, ZeroErrorAndWarmupLeaveWeights) {
  LmsConfig c = OneJointLms();
  c.warmup = 10;
  LmsBaseline lms(c, 1);
  const Vector x = Vector::Ones(3);
  EXPECT_FALSE(lms.Learn(x, Vector::Ones(1), 9));
  EXPECT_EQ(lms.weights(), Matrix::Zero(1, 3));
  lms.Learn(x, Vector::Zero(1), 10);
  EXPECT_EQ(lms.weights(), Matrix::Zero(1, 3));
}

TEST(LmsBaselineTest, ResidualClippedAndGated) {
  LmsConfig c = OneJointLms();
  c.eta = 1.0;
  c.tau_max = 0.15;
  LmsBaseline lms(c, 1);
  const Vector x = Vector::Ones(3);
  for (int i = 0; i < 20; ++i) lms.Learn(x, Vector::Ones(1), 0);
  EXPECT_DOUBLE_EQ(lms.Residual(x, Vector::Ones(1))[0], 0.15);
  EXPECT_EQ(lms.Residual(x, -Vector::Ones(1))[0], 0.0);
  c.directional_gate = false;
  LmsBaseline open(c, 1);
  for (int i = 0; i < 20; ++i) open.Learn(x, Vector::Ones(1), 0);
  EXPECT_DOUBLE_EQ(open.Residual(x, -Vector::Ones(1))[0], 0.15);
}

TEST(LmsBaselineTest, ParamsStableAcrossLearning) {
  LmsBaseline lms(OneJointLms(), 2);
  const std::string before = lms.SerializeParams();
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    lms.Learn(oracle::RandomVector(6, rng), oracle::RandomVector(2, rng), t);
  }
  EXPECT_EQ(lms.SerializeParams(), before);
  EXPECT_NE(lms.weights(), Matrix::Zero(2, 6));
}

TEST(LmsBaselineTest, RejectsBadInput) {
  LmsConfig c = OneJointLms();
  c.epsilon = 0.0;
  EXPECT_THROW(LmsBaseline(c, 1), InvalidArgument);
  EXPECT_THROW(LmsBaseline(OneJointLms(), 0), InvalidArgument);
  LmsBaseline lms(OneJointLms(), 1);
  EXPECT_THROW(lms.Learn(Vector::Ones(2), Vector::Ones(1), 0), DimensionError);
}

CmacConfig QuietCmac() {
  CmacConfig c;
  c.warmup = 0;
  c.deadzone = 0.0;
  return c;
}

TEST(CmacBaselineTest, ZeroFeaturesDoNothing) {
  CmacBaseline cmac(QuietCmac(), FeatureExpansion(6, 32, 1, 0.04), 2);
  const Vector h = Vector::Zero(32);
  cmac.Learn(h, Vector::Ones(2), 0);
  EXPECT_EQ(cmac.weights(), Matrix::Zero(2, 32));
  EXPECT_EQ(cmac.Residual(h, Vector::Ones(2)), Vector::Zero(2));
}

TEST(CmacBaselineTest, DeadzoneAndWarmup) {
  CmacConfig c = QuietCmac();
  c.deadzone = 0.5;
  c.warmup = 3;
  CmacBaseline cmac(c, FeatureExpansion(6, 16, 1, 0.04), 1);
  const Vector h = Vector::Ones(16);
  EXPECT_FALSE(cmac.Learn(h, Vector::Ones(1), 2));
  EXPECT_FALSE(cmac.Learn(h, Vector::Constant(1, 0.4), 3));
  EXPECT_EQ(cmac.weights(), Matrix::Zero(1, 16));
  EXPECT_TRUE(cmac.Learn(h, Vector::Ones(1), 3));
}

TEST(CmacBaselineTest, FirstStepMatchesHand) {
  CmacConfig c = QuietCmac();
  c.eta = 0.1;
  c.l2 = 0.0;
  c.momentum = 0.5;
  c.epsilon = 1e-12;
  CmacBaseline cmac(c, FeatureExpansion(Matrix::Identity(4, 4)), 1);
  Vector h(4);
  h << 1.0, 0.0, 0.0, 0.0;
  cmac.Learn(h, Vector::Ones(1), 0);
  // m = (1 - 0.5) * 0.1 * 1 * h / 1
  EXPECT_NEAR(cmac.weights()(0, 0), 0.05, 1e-12);
  EXPECT_EQ(cmac.weights()(0, 1), 0.0);
}

TEST(CmacBaselineTest, NormBoundAndDeterminism) {
  CmacConfig c = QuietCmac();
  c.eta = 5.0;
  c.w_max = 0.3;
  CmacBaseline a(c, FeatureExpansion(6, 64, 5, 0.04), 2);
  CmacBaseline b(c, FeatureExpansion(6, 64, 5, 0.04), 2);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const Vector h = a.Features(oracle::RandomVector(6, rng));
    const Vector r = oracle::RandomVector(2, rng);
    a.Learn(h, r, t);
    b.Learn(h, r, t);
    ASSERT_LE(a.weights().norm(), 0.3 * (1 + 1e-12));
  }
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.SerializeParams(), b.SerializeParams());
}

}  // namespace
}  // namespace cerebellar
