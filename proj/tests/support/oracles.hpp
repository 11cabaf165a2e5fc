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


#ifndef CEREBELLAR_TESTS_ORACLES_HPP_
#define CEREBELLAR_TESTS_ORACLES_HPP_

// Independent reference computations for the tests. Plain nested loops over
// std::vector, nothing shared with the library code paths.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cerebellar/types.hpp"

namespace oracle {

using Rows = std::vector<std::vector<double>>;

inline Rows ToRows(const cerebellar::Matrix& m) {
  Rows out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline std::vector<double> ToStd(const cerebellar::Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline std::vector<double> MatVec(const Rows& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

// Solves A X = B (A n x n, B n x k) by Gaussian elimination with partial
// pivoting on an augmented copy.
inline Rows Solve(Rows a, Rows b) {
  const std::size_t n = a.size();
  const std::size_t k = b.empty() ? 0 : b[0].size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("oracle: singular");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      for (std::size_t c = 0; c < k; ++c) b[r][c] -= f * b[col][c];
    }
  }
  Rows x(n, std::vector<double>(k, 0.0));
  for (std::size_t r = n; r-- > 0;) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = b[r][c];
      for (std::size_t j = r + 1; j < n; ++j) s -= a[r][j] * x[j][c];
      x[r][c] = s / a[r][r];
    }
  }
  return x;
}

// Ridge solution W (J x M) of min sum ||tau_i - W phi_i||^2 + lambda ||W||^2
// through its normal equations.
inline Rows RidgeByElimination(const std::vector<std::vector<double>>& phi,
                               const std::vector<std::vector<double>>& tau,
                               double lambda) {
  const std::size_t m = phi[0].size();
  const std::size_t j = tau[0].size();
  Rows g(m, std::vector<double>(m, 0.0));
  Rows b(m, std::vector<double>(j, 0.0));
  for (std::size_t i = 0; i < phi.size(); ++i) {
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) g[r][c] += phi[i][r] * phi[i][c];
      for (std::size_t c = 0; c < j; ++c) b[r][c] += phi[i][r] * tau[i][c];
    }
  }
  for (std::size_t r = 0; r < m; ++r) g[r][r] += lambda;
  Rows wt = Solve(g, b);  // M x J
  Rows w(j, std::vector<double>(m));
  for (std::size_t r = 0; r < j; ++r)
    for (std::size_t c = 0; c < m; ++c) w[r][c] = wt[c][r];
  return w;
}

inline cerebellar::Vector RandomVector(std::size_t n, std::mt19937_64& rng,
                                       double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  cerebellar::Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline cerebellar::Matrix RandomMatrix(std::size_t r, std::size_t c,
                                       std::mt19937_64& rng, double lo = -1.0,
                                       double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  cerebellar::Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace oracle

#endif  // CEREBELLAR_TESTS_ORACLES_HPP_
