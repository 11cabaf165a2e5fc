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

#include "cerebellar/kernels.hpp"

#ifdef CEREBELLAR_USE_OPENMP
#include <omp.h>
#endif

namespace cerebellar::kernels {

namespace {
// Below this many output elements the fork/join cost dominates.
constexpr Eigen::Index kMinParallelWork = 4096;
}  // namespace

bool HaveOpenMP() {
#ifdef CEREBELLAR_USE_OPENMP
  return true;
#else
  return false;
#endif
}

namespace parallel {

int MaxThreads() {
#ifdef CEREBELLAR_USE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void ReluMatVec(const Matrix& V, const Vector& x, Vector& out) {
  const Eigen::Index rows = V.rows();
  const Eigen::Index cols = V.cols();
  out.resize(rows);
  const double* vp = V.data();
  const double* xp = x.data();
  double* op = out.data();
#pragma omp parallel for schedule(static) if (rows * cols >= kMinParallelWork)
  for (Eigen::Index m = 0; m < rows; ++m) {
    const double* row = vp + m * cols;
    double acc = 0.0;
    for (Eigen::Index d = 0; d < cols; ++d) acc += row[d] * xp[d];
    op[m] = acc > 0.0 ? acc : 0.0;
  }
}

void DualTrace(Vector& excit, Vector& inhib, const Vector& h, double alpha_e,
               double alpha_i, Vector& phi) {
  const Eigen::Index n = h.size();
  phi.resize(n);
  double* ep = excit.data();
  double* ip = inhib.data();
  const double* hp = h.data();
  double* pp = phi.data();
#pragma omp parallel for schedule(static) if (n >= kMinParallelWork)
  for (Eigen::Index m = 0; m < n; ++m) {
    ep[m] += alpha_e * (hp[m] - ep[m]);
    ip[m] += alpha_i * (hp[m] - ip[m]);
    pp[m] = ep[m] - ip[m];
  }
}

void AccumulateReadout(const Matrix& W, const Vector& phi, double weight,
                       Vector& out) {
  const Eigen::Index rows = W.rows();
  const Eigen::Index cols = W.cols();
  const double* wp = W.data();
  const double* pp = phi.data();
  double* op = out.data();
  // One dot product per joint row; rows are few, so split only when each row
  // is long enough to amortise the team start-up.
#pragma omp parallel for schedule(static) if (rows > 1 && cols >= kMinParallelWork)
  for (Eigen::Index j = 0; j < rows; ++j) {
    const double* row = wp + j * cols;
    double acc = 0.0;
    for (Eigen::Index m = 0; m < cols; ++m) acc += row[m] * pp[m];
    op[j] += weight * acc;
  }
}

void Outer(const Vector& coef, const Vector& phi, Matrix& delta) {
  delta.resize(coef.size(), phi.size());
  const Eigen::Index rows = coef.size();
  const Eigen::Index cols = phi.size();
  const double* cp = coef.data();
  const double* pp = phi.data();
  double* dp = delta.data();
#pragma omp parallel for collapse(2) schedule(static) if (rows * cols >= kMinParallelWork)
  for (Eigen::Index j = 0; j < rows; ++j) {
    for (Eigen::Index m = 0; m < cols; ++m) dp[j * cols + m] = cp[j] * pp[m];
  }
}

void Momentum(Matrix& m, const Matrix& delta, double beta) {
  const Eigen::Index n = m.size();
  double* mp = m.data();
  const double* dp = delta.data();
  const double one_minus = 1.0 - beta;
#pragma omp parallel for schedule(static) if (n >= kMinParallelWork)
  for (Eigen::Index i = 0; i < n; ++i) mp[i] = beta * mp[i] + one_minus * dp[i];
}

void HeadUpdate(Matrix& W, const Matrix& m, double keep, double step,
                double gamma) {
  const Eigen::Index n = W.size();
  double* wp = W.data();
  const double* mp = m.data();
#pragma omp parallel for schedule(static) if (n >= kMinParallelWork)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = wp[i];
    wp[i] = keep * w + step * mp[i] - gamma * w;
  }
}

void Scale(Matrix& W, double s) {
  const Eigen::Index n = W.size();
  double* wp = W.data();
#pragma omp parallel for schedule(static) if (n >= kMinParallelWork)
  for (Eigen::Index i = 0; i < n; ++i) wp[i] *= s;
}

}  // namespace parallel
}  // namespace cerebellar::kernels
