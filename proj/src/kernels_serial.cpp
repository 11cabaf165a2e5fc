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

#include <algorithm>
#include <cmath>

#include "cerebellar/kernels.hpp"

namespace cerebellar::kernels::serial {

void ReluMatVec(const Matrix& V, const Vector& x, Vector& out) {
  const Eigen::Index rows = V.rows();
  const Eigen::Index cols = V.cols();
  out.resize(rows);
  for (Eigen::Index m = 0; m < rows; ++m) {
    const double* row = V.data() + m * cols;
    double acc = 0.0;
    for (Eigen::Index d = 0; d < cols; ++d) acc += row[d] * x[d];
    out[m] = acc > 0.0 ? acc : 0.0;
  }
}

void DualTrace(Vector& excit, Vector& inhib, const Vector& h, double alpha_e,
               double alpha_i, Vector& phi) {
  const Eigen::Index n = h.size();
  phi.resize(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    excit[m] += alpha_e * (h[m] - excit[m]);
    inhib[m] += alpha_i * (h[m] - inhib[m]);
    phi[m] = excit[m] - inhib[m];
  }
}

void AccumulateReadout(const Matrix& W, const Vector& phi, double weight,
                       Vector& out) {
  const Eigen::Index cols = W.cols();
  for (Eigen::Index j = 0; j < W.rows(); ++j) {
    const double* row = W.data() + j * cols;
    double acc = 0.0;
    for (Eigen::Index m = 0; m < cols; ++m) acc += row[m] * phi[m];
    out[j] += weight * acc;
  }
}

void Outer(const Vector& coef, const Vector& phi, Matrix& delta) {
  delta.resize(coef.size(), phi.size());
  const Eigen::Index cols = phi.size();
  for (Eigen::Index j = 0; j < coef.size(); ++j) {
    double* row = delta.data() + j * cols;
    for (Eigen::Index m = 0; m < cols; ++m) row[m] = coef[j] * phi[m];
  }
}

void Momentum(Matrix& m, const Matrix& delta, double beta) {
  const Eigen::Index n = m.size();
  double* mp = m.data();
  const double* dp = delta.data();
  const double one_minus = 1.0 - beta;
  for (Eigen::Index i = 0; i < n; ++i) mp[i] = beta * mp[i] + one_minus * dp[i];
}

void HeadUpdate(Matrix& W, const Matrix& m, double keep, double step,
                double gamma) {
  const Eigen::Index n = W.size();
  double* wp = W.data();
  const double* mp = m.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = wp[i];
    wp[i] = keep * w + step * mp[i] - gamma * w;
  }
}

void Scale(Matrix& W, double s) {
  const Eigen::Index n = W.size();
  double* wp = W.data();
  for (Eigen::Index i = 0; i < n; ++i) wp[i] *= s;
}

double FrobeniusNorm(const Matrix& W) {
  const Eigen::Index n = W.size();
  const double* wp = W.data();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += wp[i] * wp[i];
  return std::sqrt(acc);
}

double Norm2(const Vector& v) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += v[i] * v[i];
  return std::sqrt(acc);
}

double Dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace cerebellar::kernels::serial
