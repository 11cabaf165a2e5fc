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


#include "cerebellar/feature_pathway.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cerebellar/errors.hpp"
#include "oracles.hpp"

namespace cerebellar {
namespace {

TEST(FeatureExpansionTest, ShapeAtFullWidth) {
  const FeatureExpansion fe = BuildExpansion(18, 2500, 11, 0.04);
  EXPECT_EQ(fe.projection().rows(), 2500);
  EXPECT_EQ(fe.projection().cols(), 18);
  EXPECT_EQ(fe.feature_count(), 2500u);
}

TEST(FeatureExpansionTest, SameSeedSameProjection) {
  EXPECT_EQ(BuildExpansion(2, 4, 7, 0.04).projection(),
            BuildExpansion(2, 4, 7, 0.04).projection());
  EXPECT_NE(BuildExpansion(2, 4, 7, 0.04).projection(),
            BuildExpansion(2, 4, 8, 0.04).projection());
}

TEST(FeatureExpansionTest, SampleMeanWithinThreeStandardErrors) {
  for (std::uint64_t seed : {0u, 1u, 2u, 99u}) {
    const Matrix v = BuildExpansion(2, 1000, seed, 0.04).projection();
    EXPECT_LT(std::abs(v.mean()), 3.0 * 0.04 / std::sqrt(2000.0)) << seed;
  }
}

TEST(FeatureExpansionTest, SampleStdNearConfigured) {
  const Matrix v = BuildExpansion(10, 2000, 5, 0.04).projection();
  const double var = (v.array() - v.mean()).square().sum() / (v.size() - 1);
  EXPECT_NEAR(std::sqrt(var), 0.04, 0.04 * 0.02);
}

TEST(FeatureExpansionTest, ZeroInputGivesZero) {
  const FeatureExpansion fe = BuildExpansion(3, 50, 1, 0.04);
  EXPECT_EQ(fe.Expand(Vector::Zero(3)), Vector::Zero(50));
}

TEST(FeatureExpansionTest, RectifierOnExplicitProjection) {
  Matrix v(2, 2);
  v << 1, 0, 0, -1;
  const FeatureExpansion fe(v);
  Vector x(2);
  x << 3, 5;
  const Vector h = fe.Expand(x);
  EXPECT_EQ(h[0], 3.0);
  EXPECT_EQ(h[1], 0.0);
}

TEST(FeatureExpansionTest, MatchesMatrixMultiplyOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureExpansion fe = BuildExpansion(3, 8, trial, 0.04);
    const Vector x = oracle::RandomVector(3, rng, -5, 5);
    const auto pre = oracle::MatVec(oracle::ToRows(fe.projection()),
                                    oracle::ToStd(x));
    const Vector h = fe.Expand(x);
    for (int i = 0; i < 8; ++i) {
      EXPECT_NEAR(h[i], std::max(0.0, pre[i]), 1e-12);
      EXPECT_GE(h[i], 0.0);
    }
  }
}

TEST(FeatureExpansionTest, RejectsBadInput) {
  EXPECT_THROW(BuildExpansion(0, 4, 1, 0.04), InvalidArgument);
  EXPECT_THROW(BuildExpansion(2, 0, 1, 0.04), InvalidArgument);
  EXPECT_THROW(BuildExpansion(2, 4, 1, 0.0), InvalidArgument);
  const FeatureExpansion fe = BuildExpansion(2, 4, 1, 0.04);
  EXPECT_THROW(fe.Expand(Vector::Zero(3)), DimensionError);
  Vector bad = Vector::Zero(2);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(fe.Expand(bad), NonFiniteError);
  bad[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(fe.Expand(bad), NonFiniteError);
}

TEST(FilterRateTest, ClampsAndDivides) {
  EXPECT_DOUBLE_EQ(FilterRate(0.01, 0.03), 0.01 / 0.03);
  EXPECT_DOUBLE_EQ(FilterRate(0.01, 0.30), 0.01 / 0.30);
  EXPECT_EQ(FilterRate(0.5, 0.03), 1.0);
  EXPECT_THROW(FilterRate(0.01, 0.0), InvalidArgument);
}

TEST(TraceStateTest, OriginIsFixedPoint) {
  TraceState tr(3, 0.5, 0.1);
  const Vector phi = tr.Step(Vector::Zero(3));
  EXPECT_EQ(phi, Vector::Zero(3));
  EXPECT_EQ(tr.excitatory(), Vector::Zero(3));
  EXPECT_EQ(tr.inhibitory(), Vector::Zero(3));
}

TEST(TraceStateTest, SingleStepValues) {
  TraceState tr(1, 0.5, 0.1);
  const Vector phi = tr.Step(Vector::Ones(1));
  EXPECT_DOUBLE_EQ(tr.excitatory()[0], 0.5);
  EXPECT_DOUBLE_EQ(tr.inhibitory()[0], 0.1);
  EXPECT_DOUBLE_EQ(phi[0], 0.4);
}

TEST(TraceStateTest, ConstantInputConvergesAndNulls) {
  TraceState tr(2, 0.5, 0.1);
  Vector h(2);
  h << 0.7, 2.0;
  Vector phi;
  for (int t = 0; t < 2000; ++t) phi = tr.Step(h);
  EXPECT_NEAR(tr.excitatory()[1], 2.0, 1e-12);
  EXPECT_NEAR(tr.inhibitory()[1], 2.0, 1e-12);
  EXPECT_LT(phi.lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(TraceStateTest, SteadyStateNullingAtHorizon) {
  const double ae = FilterRate(0.01, 0.03), ai = FilterRate(0.01, 0.30);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    TraceState tr(16, ae, ai);
    const Vector h = oracle::RandomVector(16, rng, 0.0, 3.0);
    const int steps = static_cast<int>(std::ceil(10.0 / ai));
    Vector phi;
    for (int t = 0; t < steps; ++t) phi = tr.Step(h);
    EXPECT_LT(phi.lpNorm<Eigen::Infinity>(), ai * h.lpNorm<Eigen::Infinity>());
  }
}

TEST(TraceStateTest, BoundedByTwiceRunningMax) {
  std::mt19937_64 rng(8);
  TraceState tr(5, 0.33, 0.033);
  double running = 0.0;
  for (int t = 0; t < 3000; ++t) {
    const Vector h = oracle::RandomVector(5, rng, 0.0, 1.0 + (t % 97) * 0.05);
    running = std::max(running, h.lpNorm<Eigen::Infinity>());
    const Vector phi = tr.Step(h);
    ASSERT_LE(phi.lpNorm<Eigen::Infinity>(), 2.0 * running);
  }
}

TEST(TraceStateTest, FilteringIsLinear) {
  std::mt19937_64 rng(12);
  TraceState a(4, 0.4, 0.05), b(4, 0.4, 0.05), sum(4, 0.4, 0.05);
  for (int t = 0; t < 200; ++t) {
    const Vector h1 = oracle::RandomVector(4, rng), h2 = oracle::RandomVector(4, rng);
    const Vector pa = a.Step(h1), pb = b.Step(h2), ps = sum.Step(h1 + h2);
    for (int i = 0; i < 4; ++i) ASSERT_NEAR(ps[i], pa[i] + pb[i], 1e-12);
  }
}

TEST(TraceStateTest, DeterministicStream) {
  std::mt19937_64 rng(1);
  std::vector<Vector> hs;
  for (int t = 0; t < 100; ++t) hs.push_back(oracle::RandomVector(6, rng, 0, 1));
  TraceState a(6, 0.33, 0.033), b(6, 0.33, 0.033);
  for (const auto& h : hs) ASSERT_EQ(a.Step(h), b.Step(h));
}

TEST(TraceStateTest, RejectsBadRates) {
  EXPECT_THROW(TraceState(2, 0.1, 0.5), InvalidArgument);
  EXPECT_THROW(TraceState(2, 0.1, 0.1), InvalidArgument);
  EXPECT_THROW(TraceState(2, 0.5, 0.0), InvalidArgument);
  EXPECT_THROW(TraceState(2, 1.5, 0.1), InvalidArgument);
  TraceState tr(2, 0.5, 0.1);
  EXPECT_THROW(tr.Step(Vector::Zero(3)), DimensionError);
}

TEST(TraceStateTest, ResetClearsTraces) {
  TraceState tr(2, 0.5, 0.1);
  tr.Step(Vector::Ones(2));
  tr.Reset();
  EXPECT_EQ(tr.excitatory(), Vector::Zero(2));
  EXPECT_EQ(tr.inhibitory(), Vector::Zero(2));
}

TEST(AssembleInputTest, OrderAndAccelDrop) {
  Vector q(2), qd(2), qdd(2);
  q << 1, 2;
  qd << 3, 4;
  qdd << 5, 6;
  Vector full(6);
  full << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(AssembleInput(q, qd, qdd, true), full);
  EXPECT_EQ(AssembleInput(q, qd, qdd, false), full.head(4));
}

}  // namespace
}  // namespace cerebellar
