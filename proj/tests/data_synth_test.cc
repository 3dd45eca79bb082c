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

#include "ldpsr/data_synth.h"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "ldpsr/linalg.h"

namespace ldpsr {
namespace {

GroundTruth Truth(std::size_t d, int k, NoiseSpec noise, uint64_t seed = 1,
                  CovarianceSpec cov = CovarianceSpec::Identity()) {
  absl::StatusOr<GroundTruth> t = MakeGroundTruth(d, k, cov, noise, seed);
  EXPECT_TRUE(t.ok()) << t.status();
  return *t;
}

TEST(GroundTruthTest, FullSupportHitsL1Budget) {
  const GroundTruth t = Truth(4, 4, NoiseSpec::Gaussian(1.0));
  EXPECT_NEAR(NormL1(t.theta_star), 0.9, 1e-15);
  EXPECT_EQ(CountNonZero(t.theta_star), 4u);
}

TEST(GroundTruthTest, ExactSparsity) {
  const GroundTruth t = Truth(10, 3, NoiseSpec::Gaussian(1.0));
  EXPECT_EQ(CountNonZero(t.theta_star), 3u);
}

TEST(GroundTruthTest, DeterministicInSeed) {
  EXPECT_EQ(Truth(20, 5, NoiseSpec::Gaussian(1.0), 9).theta_star,
            Truth(20, 5, NoiseSpec::Gaussian(1.0), 9).theta_star);
  EXPECT_NE(Truth(20, 5, NoiseSpec::Gaussian(1.0), 9).theta_star,
            Truth(20, 5, NoiseSpec::Gaussian(1.0), 10).theta_star);
}

TEST(GroundTruthTest, InvariantsHoldOnEveryDraw) {
  for (uint64_t seed = 0; seed < 500; ++seed) {
    const int k = 1 + seed % 8;
    const GroundTruth t = Truth(16, k, NoiseSpec::Gaussian(1.0), seed,
                                CovarianceSpec::Toeplitz(0.5));
    ASSERT_LE(CountNonZero(t.theta_star), static_cast<std::size_t>(k));
    ASSERT_LE(NormL1(t.theta_star), 1.0);
    ASSERT_TRUE(ValidateGroundTruth(t).ok());
  }
}

TEST(GroundTruthTest, RejectsBadK) {
  EXPECT_FALSE(MakeGroundTruth(3, 4, {}, NoiseSpec::Gaussian(1), 0).ok());
  EXPECT_FALSE(MakeGroundTruth(3, 0, {}, NoiseSpec::Gaussian(1), 0).ok());
}

TEST(GroundTruthTest, SupportIsUniform) {
  // Each of the d coordinates lands in a k-subset with probability k/d.
  constexpr int kDraws = 20000;
  std::vector<int> hits(6, 0);
  for (int s = 0; s < kDraws; ++s) {
    const GroundTruth t = Truth(6, 2, NoiseSpec::Gaussian(1), s);
    for (std::size_t i = 0; i < 6; ++i) hits[i] += t.theta_star[i] != 0.0;
  }
  const double p = 2.0 / 6.0;
  const double sd = std::sqrt(kDraws * p * (1 - p));
  for (int h : hits) EXPECT_NEAR(h, kDraws * p, 4.0 * sd);
}

TEST(CovarianceTest, ToeplitzEntries) {
  const SymMat m = *BuildCovariance(4, CovarianceSpec::Toeplitz(0.5));
  EXPECT_EQ(m(0, 3), 0.125);
  EXPECT_EQ(m(2, 1), 0.5);
  EXPECT_FALSE(BuildCovariance(3, CovarianceSpec::Toeplitz(1.0)).ok());
}

TEST(SubGaussianTest, EmpiricalCovarianceConcentrates) {
  constexpr std::size_t kN = 100000, kD = 8;
  const Dataset data = *SampleSubGaussian(
      Truth(kD, 2, NoiseSpec::Gaussian(1.0)), kN, 3);
  SymMat cov(kD);
  Vec mean(kD, 0.0);
  for (std::size_t i = 0; i < kN; ++i) {
    cov.AddOuter(data.x(i), 1.0 / kN);
    for (std::size_t j = 0; j < kD; ++j) mean[j] += data.x(i)[j] / kN;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < kD; ++i)
    for (std::size_t j = 0; j < kD; ++j)
      worst = std::max(worst, std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)));
  EXPECT_LE(worst, 5.0 * std::sqrt(std::log(kD) / kN));
  for (double m : mean) EXPECT_LE(std::abs(m), 4.0 / std::sqrt(kN));
}

TEST(SubGaussianTest, ToeplitzCovarianceRecovered) {
  constexpr std::size_t kN = 100000, kD = 4;
  const GroundTruth t = Truth(kD, 1, NoiseSpec::Gaussian(1.0), 1,
                              CovarianceSpec::Toeplitz(0.6));
  const Dataset data = *SampleSubGaussian(t, kN, 4);
  SymMat cov(kD);
  for (std::size_t i = 0; i < kN; ++i) cov.AddOuter(data.x(i), 1.0 / kN);
  for (std::size_t i = 0; i < kD; ++i)
    for (std::size_t j = 0; j < kD; ++j)
      EXPECT_NEAR(cov(i, j), t.covariance(i, j), 0.02);
}

TEST(SubGaussianTest, NoiselessIsExactlyLinear) {
  const GroundTruth t = Truth(6, 3, NoiseSpec::Gaussian(0.0));
  const Dataset data = *SampleSubGaussian(t, 500, 5);
  for (std::size_t i = 0; i < data.n(); ++i) {
    ASSERT_NEAR(data.y(i), Dot(data.x(i), t.theta_star), 1e-12);
  }
}

TEST(SubGaussianTest, NoiseVarianceMatchesSigma) {
  constexpr std::size_t kN = 100000;
  const GroundTruth t = Truth(3, 1, NoiseSpec::Gaussian(2.0));
  const Dataset data = *SampleSubGaussian(t, kN, 6);
  double s2 = 0.0;
  for (std::size_t i = 0; i < kN; ++i) {
    const double z = data.y(i) - Dot(data.x(i), t.theta_star);
    s2 += z * z / kN;
  }
  EXPECT_NEAR(s2, 4.0, 4.0 * 4.0 * std::sqrt(2.0 / kN));
}

TEST(SubGaussianTest, DeterministicAndSeedSensitive) {
  const GroundTruth t = Truth(5, 2, NoiseSpec::Gaussian(1.0));
  EXPECT_EQ(*SampleSubGaussian(t, 100, 7), *SampleSubGaussian(t, 100, 7));
  EXPECT_FALSE(*SampleSubGaussian(t, 100, 7) == *SampleSubGaussian(t, 100, 8));
  EXPECT_FALSE(SampleSubGaussian(t, 0, 7).ok());
}

TEST(SubGaussianTest, RowsAreIndependentOfN) {
  const GroundTruth t = Truth(5, 2, NoiseSpec::Gaussian(1.0));
  const Dataset small = *SampleSubGaussian(t, 10, 7);
  const Dataset large = *SampleSubGaussian(t, 50, 7);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(Vec(small.x(i).begin(), small.x(i).end()),
              Vec(large.x(i).begin(), large.x(i).end()));
    EXPECT_EQ(small.y(i), large.y(i));
  }
}

TEST(HardNonInteractiveTest, ZeroParameterIsFairCoin) {
  constexpr std::size_t kN = 100000;
  auto [inst, data] = *SampleHardNonInteractive(8, 2, 0.0, kN, 1);
  EXPECT_EQ(NormL1(inst.truth.theta_star), 0.0);
  double plus = 0;
  for (std::size_t i = 0; i < kN; ++i) plus += data.y(i) > 0;
  EXPECT_NEAR(plus / kN, 0.5, 4.0 * 0.5 / std::sqrt(kN));
}

TEST(HardNonInteractiveTest, EntriesAreSignsAndNoiseBounded) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto [inst, data] =
        *SampleHardNonInteractive(12, 3, 1.0 / std::sqrt(3.0), 200, seed);
    ASSERT_LE(CountNonZero(inst.truth.theta_star), 3u);
    ASSERT_LE(NormL1(inst.truth.theta_star), 1.0);
    for (std::size_t i = 0; i < 12; ++i) {
      ASSERT_EQ(inst.truth.theta_star[i], inst.gamma * inst.z[i]);
    }
    for (std::size_t i = 0; i < data.n(); ++i) {
      ASSERT_EQ(std::abs(data.y(i)), 1.0);
      for (double v : data.x(i)) ASSERT_EQ(std::abs(v), 1.0);
      const double zeta = data.y(i) - Dot(data.x(i), inst.truth.theta_star);
      // |<x, theta_z>| <= ||theta_z||_1 <= k gamma = nu sqrt(k).
      ASSERT_LE(std::abs(zeta), 1.0 + 3.0 * inst.gamma + 1e-12);
      ASSERT_LE(std::abs(zeta), 2.0);
    }
  }
}

TEST(HardNonInteractiveTest, CrossMomentRecoversTheta) {
  constexpr std::size_t kN = 1000000, kD = 6;
  auto [inst, data] = *SampleHardNonInteractive(kD, 3, 1.0 / std::sqrt(3.0),
                                                kN, 11);
  Vec m(kD, 0.0);
  for (std::size_t i = 0; i < kN; ++i)
    for (std::size_t j = 0; j < kD; ++j) m[j] += data.y(i) * data.x(i)[j] / kN;
  for (std::size_t j = 0; j < kD; ++j) {
    EXPECT_NEAR(m[j], inst.truth.theta_star[j], 4.0 / std::sqrt(kN));
  }
}

TEST(HardNonInteractiveTest, RejectsLargeNu) {
  EXPECT_FALSE(SampleHardNonInteractive(8, 4, 0.51, 10, 0).ok());
  EXPECT_TRUE(SampleHardNonInteractive(8, 4, 0.5, 10, 0).ok());
}

TEST(HardInteractiveTest, AllMinusIsFairCoin) {
  constexpr std::size_t kN = 100000;
  auto [inst, data] = *SampleHardInteractive(8, 2, 0.0, kN, 2);
  EXPECT_EQ(NormL1(inst.truth.theta_star), 0.0);
  double plus = 0;
  for (std::size_t i = 0; i < kN; ++i) plus += data.y(i) > 0;
  EXPECT_NEAR(plus / kN, 0.5, 4.0 * 0.5 / std::sqrt(kN));
}

TEST(HardInteractiveTest, StructureAndL1Bound) {
  const int k = 3;
  const double nu = 1.0 / (4.0 * std::sqrt(2.0 * k));
  for (uint64_t seed = 0; seed < 50; ++seed) {
    auto [inst, data] = *SampleHardInteractive(10, k, nu, 50, seed);
    int plus = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      ASSERT_TRUE(inst.z[i] == 1 || inst.z[i] == -1);
      plus += inst.z[i] == 1;
      ASSERT_EQ(inst.truth.theta_star[i], inst.gamma * (inst.z[i] + 1) / 2.0);
    }
    ASSERT_LE(plus, k);
    ASSERT_LE(NormL1(inst.truth.theta_star), 4.0 * std::sqrt(2.0 * k) * nu + 1e-12);
  }
}

TEST(HardInteractiveTest, CrossMomentRecoversTheta) {
  constexpr std::size_t kN = 1000000, kD = 6;
  const int k = 3;
  auto [inst, data] =
      *SampleHardInteractive(kD, k, 1.0 / (4.0 * std::sqrt(2.0 * k)), kN, 12);
  Vec m(kD, 0.0);
  for (std::size_t i = 0; i < kN; ++i)
    for (std::size_t j = 0; j < kD; ++j) m[j] += data.y(i) * data.x(i)[j] / kN;
  for (std::size_t j = 0; j < kD; ++j) {
    EXPECT_NEAR(m[j], inst.truth.theta_star[j], 4.0 / std::sqrt(kN));
  }
}

TEST(HardInteractiveTest, RejectsLargeNu) {
  EXPECT_FALSE(SampleHardInteractive(8, 2, 0.2, 10, 0).ok());
}

TEST(HeavyTailedTest, FourthMomentMatchesStudentT) {
  // t with nu = 5 degrees of freedom: E[t^4] = 3 nu^2 / ((nu-2)(nu-4)) = 25.
  constexpr std::size_t kN = 1000000;
  const double scale = 0.5;
  const GroundTruth t = Truth(2, 1, NoiseSpec::StudentT(scale, 2.0));
  const Dataset data = *SampleHeavyTailed(t, kN, 13);
  double m4 = 0.0;
  for (std::size_t i = 0; i < kN; ++i) {
    const double z = data.y(i) - Dot(data.x(i), t.theta_star);
    m4 += z * z * z * z / kN;
  }
  const double analytic = 25.0 * std::pow(scale, 4);
  EXPECT_TRUE(std::isfinite(m4));
  EXPECT_NEAR(m4, analytic, 0.2 * analytic);
}

TEST(HeavyTailedTest, ScaleZeroIsNoiseless) {
  const GroundTruth t = Truth(4, 2, NoiseSpec::StudentT(0.0, 2.0));
  const Dataset data = *SampleHeavyTailed(t, 300, 14);
  for (std::size_t i = 0; i < data.n(); ++i) {
    ASSERT_NEAR(data.y(i), Dot(data.x(i), t.theta_star), 1e-12);
  }
}

TEST(HeavyTailedTest, DeterministicAndNeedsStudentT) {
  const GroundTruth t = Truth(4, 2, NoiseSpec::StudentT(1.0, 2.0));
  EXPECT_EQ(*SampleHeavyTailed(t, 100, 15), *SampleHeavyTailed(t, 100, 15));
  EXPECT_FALSE(
      SampleHeavyTailed(Truth(4, 2, NoiseSpec::Gaussian(1.0)), 10, 0).ok());
  EXPECT_FALSE(SampleHeavyTailed(Truth(4, 2, NoiseSpec::StudentT(1.0, 1.0)),
                                 10, 0)
                   .ok());
}

TEST(DatasetTest, FromBuffersValidates) {
  EXPECT_TRUE(Dataset::FromBuffers(2, 1, {1, 2}, {3, 4}, {}).ok());
  EXPECT_FALSE(Dataset::FromBuffers(2, 1, {1}, {3, 4}, {}).ok());
  EXPECT_FALSE(Dataset::FromBuffers(0, 1, {}, {}, {}).ok());
  EXPECT_FALSE(Dataset::FromBuffers(1, 1, {NAN}, {0}, {}).ok());
}

}  // namespace
}  // namespace ldpsr
