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

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"
#include "ldpsr/data_synth.h"

namespace ldpsr {
namespace {

Dataset Sample(std::size_t n, std::size_t d) {
  const GroundTruth t = *MakeGroundTruth(d, 1, {}, NoiseSpec::Gaussian(1), 1);
  return *SampleSubGaussian(t, n, 2);
}

TEST(DatasetCsvTest, RoundTripsExactly) {
  const Dataset data = Sample(50, 4);
  std::stringstream buf;
  ASSERT_TRUE(WriteDatasetCsv(data, buf).ok());
  EXPECT_EQ(buf.str().substr(0, 12), "x0,x1,x2,x3,");
  absl::StatusOr<Dataset> back = ReadDatasetCsv(buf);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, data);
}

TEST(DatasetCsvTest, RejectsMalformed) {
  std::stringstream bad_header("a,b\n1,2\n");
  EXPECT_FALSE(ReadDatasetCsv(bad_header).ok());
  std::stringstream ragged("x0,y\n1,2,3\n");
  EXPECT_FALSE(ReadDatasetCsv(ragged).ok());
  std::stringstream nonnumeric("x0,y\n1,abc\n");
  EXPECT_FALSE(ReadDatasetCsv(nonnumeric).ok());
  std::stringstream empty("");
  EXPECT_FALSE(ReadDatasetCsv(empty).ok());
}

TEST(DatasetBinaryTest, RoundTripsAndHasDocumentedHeader) {
  const Dataset data = Sample(20, 3);
  std::stringstream buf;
  ASSERT_TRUE(WriteDatasetBinary(data, buf).ok());
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 32u + 8u * 20u * 4u);
  EXPECT_EQ(std::memcmp(bytes.data(), "LDPSRDS\0", 8), 0);
  uint64_t n = 0, d = 0;
  std::memcpy(&n, bytes.data() + 16, 8);
  std::memcpy(&d, bytes.data() + 24, 8);
  EXPECT_EQ(n, 20u);
  EXPECT_EQ(d, 3u);
  double first = 0;
  std::memcpy(&first, bytes.data() + 32, 8);
  EXPECT_EQ(first, data.x(0)[0]);
  absl::StatusOr<Dataset> back = ReadDatasetBinary(buf);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, data);
}

TEST(DatasetBinaryTest, RejectsTruncatedAndBadMagic) {
  const Dataset data = Sample(5, 2);
  std::stringstream buf;
  ASSERT_TRUE(WriteDatasetBinary(data, buf).ok());
  std::string bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_FALSE(ReadDatasetBinary(truncated).ok());
  bytes[0] = 'X';
  std::stringstream magic(bytes);
  EXPECT_FALSE(ReadDatasetBinary(magic).ok());
}

TEST(DatasetFileTest, ExtensionSelectsFormat) {
  const Dataset data = Sample(10, 2);
  const std::string dir = ::testing::TempDir();
  ASSERT_TRUE(SaveDataset(data, dir + "/ds.bin").ok());
  ASSERT_TRUE(SaveDataset(data, dir + "/ds.csv").ok());
  EXPECT_EQ(*LoadDataset(dir + "/ds.bin"), data);
  EXPECT_EQ(*LoadDataset(dir + "/ds.csv"), data);
  EXPECT_FALSE(LoadDataset(dir + "/missing.csv").ok());
}

TEST(GroundTruthJsonTest, Fields) {
  const GroundTruth t =
      *MakeGroundTruth(3, 2, CovarianceSpec::Toeplitz(0.5),
                       NoiseSpec::StudentT(1.0, 2.0), 4);
  const nlohmann::json j = nlohmann::json::parse(GroundTruthToJson(t));
  EXPECT_EQ(j["theta_star"].get<std::vector<double>>(), t.theta_star);
  EXPECT_EQ(j["sparsity_k"], 2);
  EXPECT_EQ(j["covariance"][0][2], 0.25);
  EXPECT_EQ(j["noise"]["family"], "student_t");
  // Symmetric eigenvectors (a, b, a) reduce to [[1.25, 0.5], [1, 1]].
  EXPECT_NEAR(j["covariance_min_eigenvalue"].get<double>(),
              (2.25 - std::sqrt(2.0625)) / 2.0, 1e-12);
}

}  // namespace
}  // namespace ldpsr
