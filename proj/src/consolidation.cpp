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

#include "cerebellar/consolidation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "cerebellar/csv.hpp"
#include "cerebellar/errors.hpp"

namespace cerebellar {

double ResidualEnergy(const std::vector<Vector>& residuals) {
  EnergyAccumulator acc;
  for (const auto& r : residuals) acc.Add(r);
  return acc.Energy();
}

void EnergyAccumulator::Add(const Vector& residual) {
  sum_ += residual.squaredNorm();
  ++count_;
}

double EnergyAccumulator::Energy() const {
  if (count_ == 0) throw InvalidArgument("residual energy of an empty episode");
  return sum_ / static_cast<double>(count_);
}

void ConsolidationDataset::Add(const Vector& features, const Vector& target) {
  if (!phi.empty()) {
    RequireSameSize(features.size(), phi.front().size(), "dataset features");
    RequireSameSize(target.size(), tau.front().size(), "dataset targets");
  }
  phi.push_back(features);
  tau.push_back(target);
}

StaticAdapter FitAdapter(const ConsolidationDataset& ds, double ridge_lambda) {
  if (ds.size() == 0) throw InvalidArgument("consolidation dataset is empty");
  if (!(ridge_lambda >= 0.0)) throw InvalidArgument("ridge lambda must be >= 0");
  const Eigen::Index m = ds.phi.front().size();
  const Eigen::Index j = ds.tau.front().size();
  const auto n = static_cast<Eigen::Index>(ds.size());

  Eigen::MatrixXd features(m, n);
  Eigen::MatrixXd targets(j, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    features.col(i) = ds.phi[static_cast<std::size_t>(i)];
    targets.col(i) = ds.tau[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(features);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  gram.diagonal().array() += ridge_lambda;
  const Eigen::MatrixXd rhs = features * targets.transpose();  // M x J

  Eigen::MatrixXd solution;
  if (ridge_lambda > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw SingularSystemError("ridge normal equations are not positive definite");
    }
    solution = llt.solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    if (qr.rank() < m) {
      throw SingularSystemError(
          "Gram matrix is rank deficient; use a positive ridge lambda");
    }
    solution = qr.solve(rhs);
  }

  StaticAdapter ad;
  ad.weights = solution.transpose();
  ad.ridge_lambda = ridge_lambda;
  const double rhs_norm = rhs.norm();
  const double res = (gram * solution - rhs).norm();
  ad.normal_residual = rhs_norm > 0.0 ? res / rhs_norm : res;
  if (!ad.weights.allFinite()) {
    throw SingularSystemError("ridge solution is not finite");
  }
  return ad;
}

Vector AdapterAction(const StaticAdapter& ad, const Vector& phi) {
  RequireSameSize(phi.size(), ad.weights.cols(), "adapter features");
  Vector out = ad.gain * (ad.weights * phi);
  return out.cwiseMax(-ad.tau_max).cwiseMin(ad.tau_max);
}

void WriteAdapterMetadata(const AdapterMetadata& meta, std::ostream& out) {
  out << "fault_family=" << meta.family << '\n'
      << "severity=" << FormatDouble(meta.severity) << '\n'
      << "ridge_lambda=" << FormatDouble(meta.ridge_lambda) << '\n'
      << "gain=" << FormatDouble(meta.gain) << '\n'
      << "features=" << meta.features << '\n'
      << "seed=" << meta.seed << '\n'
      << "tau_max=" << FormatDouble(meta.tau_max) << '\n';
}

AdapterMetadata ReadAdapterMetadata(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("adapter metadata line without '=': " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw InvalidArgument(std::string("adapter metadata missing ") + key);
    }
    return it->second;
  };
  AdapterMetadata meta;
  meta.family = need("fault_family");
  meta.severity = ParseDouble(need("severity"));
  meta.ridge_lambda = ParseDouble(need("ridge_lambda"));
  meta.gain = ParseDouble(need("gain"));
  meta.features = static_cast<std::size_t>(ParseInt(need("features")));
  meta.seed = static_cast<std::uint64_t>(ParseInt(need("seed")));
  if (kv.count("tau_max")) meta.tau_max = ParseDouble(kv["tau_max"]);
  return meta;
}

void WriteAdapter(const StaticAdapter& ad, const AdapterMetadata& meta,
                  const std::string& csv_path, const std::string& meta_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw MissingArtifactError("cannot write " + csv_path);
  csv << "row,col,value\n";
  for (Eigen::Index r = 0; r < ad.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < ad.weights.cols(); ++c) {
      csv << r << ',' << c << ',' << FormatDouble(ad.weights(r, c)) << '\n';
    }
  }
  std::ofstream side(meta_path);
  if (!side) throw MissingArtifactError("cannot write " + meta_path);
  WriteAdapterMetadata(meta, side);
}

StaticAdapter ReadAdapter(const std::string& csv_path,
                          const std::string& meta_path,
                          AdapterMetadata* meta_out) {
  std::ifstream side(meta_path);
  if (!side) throw MissingArtifactError("missing adapter metadata " + meta_path);
  const AdapterMetadata meta = ReadAdapterMetadata(side);
  const CsvTable table = ReadCsvFile(csv_path);
  const std::size_t rc = table.Column("row");
  const std::size_t cc = table.Column("col");
  const std::size_t vc = table.Column("value");
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& row : table.rows) {
    rows = std::max<Eigen::Index>(rows, ParseInt(row[rc]) + 1);
    cols = std::max<Eigen::Index>(cols, ParseInt(row[cc]) + 1);
  }
  StaticAdapter ad;
  ad.weights = Matrix::Zero(rows, cols);
  for (const auto& row : table.rows) {
    ad.weights(ParseInt(row[rc]), ParseInt(row[cc])) = ParseDouble(row[vc]);
  }
  ad.ridge_lambda = meta.ridge_lambda;
  ad.gain = meta.gain;
  ad.tau_max = meta.tau_max;
  if (meta_out) *meta_out = meta;
  return ad;
}

void CheckAdapterCell(const AdapterMetadata& meta, const std::string& family,
                      double severity, bool allow_cross) {
  if (allow_cross) return;
  if (meta.family != family || meta.severity != severity) {
    throw CrossSeverityError("adapter fit on " + meta.family + "@" +
                             FormatDouble(meta.severity) +
                             " refused for cell " + family + "@" +
                             FormatDouble(severity));
  }
}

}  // namespace cerebellar
