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

#ifndef CEREBELLAR_CSV_HPP_
#define CEREBELLAR_CSV_HPP_

// Minimal comma-separated I/O for the artifact files. Fields never contain
// commas or quotes, so no quoting is implemented.

#include <iosfwd>
#include <string>
#include <vector>

namespace cerebellar {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws InvalidArgument if absent.
  std::size_t Column(const std::string& name) const;
};

CsvTable ReadCsv(std::istream& in);
CsvTable ReadCsvFile(const std::string& path);

std::vector<std::string> SplitFields(const std::string& line, char sep = ',');

// Shortest round-trip representation (17 significant digits at most).
std::string FormatDouble(double v);

// Whole-string parse; throws InvalidArgument on trailing junk.
double ParseDouble(const std::string& s);
long long ParseInt(const std::string& s);

}  // namespace cerebellar

#endif  // CEREBELLAR_CSV_HPP_
