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

#include "ldpsr/dataset_io.h"

#include <fstream>
#include <string_view>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "binary_io.h"
#include "json.hpp"

namespace ldpsr {
namespace {

constexpr uint64_t kMaxBinaryValues = uint64_t{1} << 34;

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

absl::Status WriteDatasetCsv(const Dataset& data, std::ostream& out) {
  std::string line;
  for (std::size_t j = 0; j < data.d(); ++j) absl::StrAppend(&line, "x", j, ",");
  line += "y\n";
  out << line;
  for (std::size_t i = 0; i < data.n(); ++i) {
    line.clear();
    for (double v : data.x(i)) absl::StrAppendFormat(&line, "%.17g,", v);
    absl::StrAppendFormat(&line, "%.17g\n", data.y(i));
    out << line;
  }
  if (!out) return absl::DataLossError("failed writing dataset CSV");
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ReadDatasetCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("dataset CSV is empty");
  }
  std::vector<std::string> header =
      absl::StrSplit(absl::StripTrailingAsciiWhitespace(line), ',');
  if (header.empty() || header.back() != "y") {
    return absl::InvalidArgumentError("dataset CSV header must end with 'y'");
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != absl::StrCat("x", j)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("unexpected CSV column '%s' at %d", header[j], j));
    }
  }
  std::vector<double> x;
  std::vector<double> y;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    absl::string_view trimmed = absl::StripAsciiWhitespace(line);
    if (trimmed.empty()) continue;
    std::vector<absl::string_view> fields = absl::StrSplit(trimmed, ',');
    if (fields.size() != d + 1) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "row %d has %d fields, expected %d", row, fields.size(), d + 1));
    }
    for (std::size_t j = 0; j <= d; ++j) {
      double v;
      if (!absl::SimpleAtod(fields[j], &v)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("row %d: cannot parse '%s'", row, fields[j]));
      }
      (j < d ? x : y).push_back(v);
    }
    ++row;
  }
  return Dataset::FromBuffers(row, d, std::move(x), std::move(y),
                              Provenance{"csv", 0});
}

absl::Status WriteDatasetBinary(const Dataset& data, std::ostream& out) {
  std::string buf(kDatasetMagic, sizeof(kDatasetMagic));
  internal::PutU64(buf, kDatasetFormatVersion);
  internal::PutU64(buf, data.n());
  internal::PutU64(buf, data.d());
  buf.reserve(buf.size() + data.n() * (data.d() + 1) * 8);
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (double v : data.x(i)) internal::PutF64(buf, v);
    internal::PutF64(buf, data.y(i));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) return absl::DataLossError("failed writing binary dataset");
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ReadDatasetBinary(std::istream& in) {
  std::string header;
  if (!internal::ReadExact(in, 32, header)) {
    return absl::InvalidArgumentError("binary dataset header truncated");
  }
  if (header.compare(0, 8, std::string_view(kDatasetMagic, 8)) != 0) {
    return absl::InvalidArgumentError("bad binary dataset magic");
  }
  internal::ByteReader reader(std::string_view(header).substr(8));
  uint64_t version = 0, n = 0, d = 0;
  reader.GetU64(version);
  reader.GetU64(n);
  reader.GetU64(d);
  if (version != kDatasetFormatVersion) {
    return absl::InvalidArgumentError(
        absl::StrFormat("unsupported dataset format version %d", version));
  }
  if (n == 0 || d == 0 || n > kMaxBinaryValues / (d + 1)) {
    return absl::InvalidArgumentError("implausible dataset shape");
  }
  std::string body;
  if (!internal::ReadExact(in, n * (d + 1) * 8, body)) {
    return absl::InvalidArgumentError("binary dataset body truncated");
  }
  internal::ByteReader rows(body);
  std::vector<double> x(n * d);
  std::vector<double> y(n);
  for (uint64_t i = 0; i < n; ++i) {
    for (uint64_t j = 0; j < d; ++j) rows.GetF64(x[i * d + j]);
    rows.GetF64(y[i]);
  }
  return Dataset::FromBuffers(n, d, std::move(x), std::move(y),
                              Provenance{"binary", 0});
}

absl::Status SaveDataset(const Dataset& data, const std::string& path) {
  const bool binary = EndsWith(path, ".bin");
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return binary ? WriteDatasetBinary(data, out) : WriteDatasetCsv(data, out);
}

absl::StatusOr<Dataset> LoadDataset(const std::string& path) {
  const bool binary = EndsWith(path, ".bin");
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return binary ? ReadDatasetBinary(in) : ReadDatasetCsv(in);
}

std::string GroundTruthToJson(const GroundTruth& truth) {
  nlohmann::json j;
  j["theta_star"] = truth.theta_star;
  j["sparsity_k"] = truth.sparsity_k;
  j["dim_d"] = truth.dim();
  std::vector<std::vector<double>> cov(truth.dim());
  for (std::size_t i = 0; i < truth.dim(); ++i) {
    auto r = truth.covariance.row(i);
    cov[i].assign(r.begin(), r.end());
  }
  j["covariance"] = cov;
  if (truth.dim() > 0) {
    j["covariance_min_eigenvalue"] = Spectrum(truth.covariance).min_eigenvalue;
  }
  const char* family = "gaussian";
  if (truth.noise.family == NoiseFamily::kStudentT) family = "student_t";
  if (truth.noise.family == NoiseFamily::kBoundedHypercube) {
    family = "bounded_hypercube";
  }
  j["noise"] = {{"family", family},
                {"scale", truth.noise.scale},
                {"moment_p", truth.noise.moment_p}};
  return j.dump(2);
}

}  // namespace ldpsr
