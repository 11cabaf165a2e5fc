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

#ifndef CEREBELLAR_CONSOLIDATION_HPP_
#define CEREBELLAR_CONSOLIDATION_HPP_

// Residual energy and the offline transfer of stabilized slow-pathway
// corrections into a static ridge-regression adapter.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cerebellar/types.hpp"

namespace cerebellar {

// (1/T) sum_t ||a_t||^2. Throws InvalidArgument on an empty episode.
double ResidualEnergy(const std::vector<Vector>& residuals);

// Streaming form of ResidualEnergy.
class EnergyAccumulator {
 public:
  void Add(const Vector& residual);
  double Energy() const;  // throws InvalidArgument if nothing was added
  std::size_t count() const { return count_; }

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

struct ConsolidationDataset {
  std::vector<Vector> phi;
  std::vector<Vector> tau;
  std::size_t transient_skip = 0;
  std::string source;  // fault cell key the pairs came from

  // Throws DimensionError when a pair disagrees with the earlier ones.
  void Add(const Vector& features, const Vector& target);
  std::size_t size() const { return phi.size(); }
};

struct StaticAdapter {
  Matrix weights;  // J x M
  double ridge_lambda = 0.0;
  double gain = 1.0;
  double tau_max = 0.15;
  // ||(G + lambda I) W^T - B||_F / ||B||_F of the solved normal equations.
  double normal_residual = 0.0;
};

// Solves (sum phi phi^T + lambda I) W^T = sum phi tau^T. Throws
// InvalidArgument for an empty dataset or lambda < 0, SingularSystemError
// when lambda == 0 and the Gram matrix is rank deficient.
StaticAdapter FitAdapter(const ConsolidationDataset& ds, double ridge_lambda);

// clip(gain * W phi, tau_max). Throws DimensionError on mismatch.
Vector AdapterAction(const StaticAdapter& ad, const Vector& phi);

struct AdapterMetadata {
  std::string family;
  double severity = 0.0;
  double ridge_lambda = 0.0;
  double gain = 1.0;
  std::size_t features = 0;
  std::uint64_t seed = 0;
  double tau_max = 0.15;
};

// row,col,value CSV plus a key=value sidecar.
void WriteAdapter(const StaticAdapter& ad, const AdapterMetadata& meta,
                  const std::string& csv_path, const std::string& meta_path);
StaticAdapter ReadAdapter(const std::string& csv_path,
                          const std::string& meta_path,
                          AdapterMetadata* meta_out);
AdapterMetadata ReadAdapterMetadata(std::istream& in);
void WriteAdapterMetadata(const AdapterMetadata& meta, std::ostream& out);

// Refuses to evaluate an adapter on a (family, severity) cell other than the
// one it was fit on unless allow_cross is set.
void CheckAdapterCell(const AdapterMetadata& meta, const std::string& family,
                      double severity, bool allow_cross);

}  // namespace cerebellar

#endif  // CEREBELLAR_CONSOLIDATION_HPP_
