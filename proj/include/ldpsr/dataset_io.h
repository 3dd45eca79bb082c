// Copyright 2026 The ldpsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dataset persistence.
//
// CSV: header `x0,...,x{d-1},y`, one row per user, values printed with 17
// significant digits so they round-trip exactly.
//
// Binary (all fields little-endian):
//   bytes 0..7    magic "LDPSRDS\0"
//   u64           format version (1)
//   u64           n
//   u64           d
//   f64[n*(d+1)]  rows, each x_0..x_{d-1} followed by y

#ifndef LDPSR_DATASET_IO_H_
#define LDPSR_DATASET_IO_H_

#include <istream>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ldpsr/data_synth.h"

namespace ldpsr {

inline constexpr char kDatasetMagic[8] = {'L', 'D', 'P', 'S', 'R', 'D', 'S', '\0'};
inline constexpr uint64_t kDatasetFormatVersion = 1;

absl::Status WriteDatasetCsv(const Dataset& data, std::ostream& out);
absl::StatusOr<Dataset> ReadDatasetCsv(std::istream& in);
absl::Status WriteDatasetBinary(const Dataset& data, std::ostream& out);
absl::StatusOr<Dataset> ReadDatasetBinary(std::istream& in);

// Format picked from the extension: ".bin" is binary, anything else CSV.
absl::Status SaveDataset(const Dataset& data, const std::string& path);
absl::StatusOr<Dataset> LoadDataset(const std::string& path);

std::string GroundTruthToJson(const GroundTruth& truth);

}  // namespace ldpsr

#endif  // LDPSR_DATASET_IO_H_
