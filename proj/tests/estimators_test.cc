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

#include "ldpsr/estimators.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "ldpsr/rng.h"
#include "test_oracles.h"

namespace ldpsr {
namespace {

using ::testing::DoubleNear;
using ::testing::Each;
using ::testing::Pointwise;

struct Instance {
  GroundTruth truth;
  Dataset data;
};

Instance MakeInstance(std::size_t d, int k, std::size_t n, uint64_t seed,
                      double sigma = 1.0) {
  GroundTruth t = *MakeGroundTruth(d, k, {}, NoiseSpec::Gaussian(sigma),
                                   DeriveSeed(seed, {0}));
  Dataset data = *SampleSubGaussian(t, n, DeriveSeed(seed, {1}));
  return {std::move(t), std::move(data)};
}

// Plain least squares from the normal equations via Gauss-Jordan.
Vec OracleOls(const Dataset& data) {
  const std::size_t d = data.d();
  std::vector<double> a(d * d, 0.0);
  Vec b(d, 0.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) a[r * d + c] += data.x(i)[r] * data.x(i)[c];
      b[r] += data.x(i)[r] * data.y(i);
    }
  }
  return ldpsr_oracle::GaussSolve(a, b, d);
}

TEST(OlsSoftThresholdTest, OrthonormalDesignRecoversTruth) {
  // Rows sqrt(d) e_i give (1/n) X^T X = I exactly.
  const std::size_t d = 6;
  const GroundTruth t = *MakeGroundTruth(d, 3, {}, NoiseSpec::Gaussian(0), 1);
  std::vector<double> x(d * d, 0.0), y(d);
  for (std::size_t i = 0; i < d; ++i) {
    x[i * d + i] = std::sqrt(static_cast<double>(d));
    y[i] = std::sqrt(static_cast<double>(d)) * t.theta_star[i];
  }
  const Dataset data = *Dataset::FromBuffers(d, d, x, y, {});
  EXPECT_THAT(*OlsSoftThreshold(data, 0.0),
              Pointwise(DoubleNear(1e-10), t.theta_star));
}

TEST(OlsSoftThresholdTest, LargeLambdaKillsEverything) {
  const Instance inst = MakeInstance(8, 2, 500, 2);
  const Vec ols = *OlsSoftThreshold(inst.data, 0.0);
  EXPECT_THAT(*OlsSoftThreshold(inst.data, NormLInf(ols) * 1.001), Each(0.0));
}

TEST(OlsSoftThresholdTest, MatchesNormalEquationOracle) {
  const Instance inst = MakeInstance(7, 3, 300, 3);
  EXPECT_THAT(*OlsSoftThreshold(inst.data, 0.0),
              Pointwise(DoubleNear(1e-10), OracleOls(inst.data)));
}

TEST(OlsSoftThresholdTest, RankDeficientFails) {
  const Instance inst = MakeInstance(10, 2, 5, 4);
  absl::StatusOr<Vec> t = OlsSoftThreshold(inst.data, 0.1);
  ASSERT_FALSE(t.ok());
  EXPECT_TRUE(IsCovarianceNotInvertible(t.status()));
}

TEST(OlsSoftThresholdTest, ErrorBoundsHoldOnEveryInstance) {
  Philox4x32 gen(5, 0);
  std::uniform_int_distribution<int> dim(2, 32);
  for (uint64_t rep = 0; rep < 200; ++rep) {
    const std::size_t d = dim(gen);
    const int k = std::uniform_int_distribution<int>(
        1, std::min<int>(8, static_cast<int>(d)))(gen);
    const Instance inst = MakeInstance(d, k, 4 * d + 20, 100 + rep);
    const Vec ols = *OlsSoftThreshold(inst.data, 0.0);
    const double lambda = NormLInf(Subtract(inst.truth.theta_star, ols));
    const Vec diff =
        Subtract(*OlsSoftThreshold(inst.data, lambda), inst.truth.theta_star);
    ASSERT_LE(NormLInf(diff), 2.0 * lambda * (1 + 1e-12)) << rep;
    ASSERT_LE(NormL2(diff), 4.0 * std::sqrt(1.0 * k) * lambda * (1 + 1e-12)) << rep;
    ASSERT_LE(NormL1(diff), 8.0 * k * lambda * (1 + 1e-12)) << rep;
  }
}

TEST(ResolveLambdaTest, RulesMatchFormulas) {
  const PrivacyBudget b{2.0, 1e-5, BudgetSplit::kHalfHalf};
  const double n = 1e4, d = 10, k = 3;
  const double ln = std::log(n), ld = std::log(d), lq = std::log(1e5);
  EXPECT_NEAR(*ResolveLambda(LambdaRule::SubGaussian(0.5), 10000, 10, 3, b),
              0.5 * d * ln * std::sqrt(lq) / (std::sqrt(n) * 2.0), 1e-12);
  EXPECT_NEAR(*ResolveLambda(LambdaRule::HeavyTailed(2.0), 10000, 10, 3, b),
              d * ln * std::sqrt(lq) * std::pow(ld / (n * 4.0), 0.25), 1e-12);
  EXPECT_NEAR(*ResolveLambda(LambdaRule::Public(), 10000, 10, 3, b),
              ln * std::sqrt(d * k * ld * lq) / (2.0 * std::sqrt(n)), 1e-12);
  EXPECT_EQ(*ResolveLambda(LambdaRule::Explicit(0.7), 10000, 10, 3, b), 0.7);
}

TEST(ResolveLambdaTest, InfiniteEpsilonAndErrors) {
  const PrivacyBudget inf{kInfinity, 1e-5, BudgetSplit::kHalfHalf};
  EXPECT_EQ(*ResolveLambda(LambdaRule::SubGaussian(), 100, 5, 2, inf), 0.0);
  const PrivacyBudget b{1.0, 1e-5, BudgetSplit::kHalfHalf};
  EXPECT_FALSE(ResolveLambda(LambdaRule::Explicit(-1), 100, 5, 2, b).ok());
  EXPECT_FALSE(ResolveLambda(LambdaRule::HeavyTailed(1.0), 100, 5, 2, b).ok());
  EXPECT_FALSE(ResolveLambda(LambdaRule::Public(), 100, 5, 0, b).ok());
  EXPECT_FALSE(ResolveLambda(LambdaRule::SubGaussian(), 1, 5, 2, b).ok());
}

TEST(ResolveLambdaTest, HeavyTailedTau2) {
  EXPECT_NEAR(HeavyTailedTau2(10000, 10, 2.0),
              std::pow(10000.0 / std::log(10.0), 0.25), 1e-12);
}

NldpConfig NoiselessConfig(double lambda) {
  NldpConfig c;
  c.clip = ClipConfig::Disabled();
  c.budget = PrivacyBudget{kInfinity, 1e-5, BudgetSplit::kHalfHalf};
  c.lambda_rule = LambdaRule::Explicit(lambda);
  return c;
}

TEST(NldpTest, NoiselessUnclippedEqualsOls) {
  for (uint64_t rep = 0; rep < 50; ++rep) {
    const Instance inst = MakeInstance(3 + rep % 10, 2, 200, 200 + rep);
    const double lambda = 0.01 * (rep % 7);
    const Vec ols = *OlsSoftThreshold(inst.data, lambda);
    const NldpRun run = *RunNldp(inst.data, NoiselessConfig(lambda), rep);
    ASSERT_THAT(run.theta_hat, Pointwise(DoubleNear(1e-10), ols)) << rep;
  }
}

TEST(NldpTest, NoiselessZeroLambdaEqualsPlainOls) {
  const Instance inst = MakeInstance(6, 2, 400, 7);
  EXPECT_THAT(RunNldp(inst.data, NoiselessConfig(0.0), 1)->theta_hat,
              Pointwise(DoubleNear(1e-10), OracleOls(inst.data)));
}

std::vector<PerturbedMessage> Messages(const Dataset& data,
                                       const NldpConfig& c, uint64_t seed) {
  PerturbFn f = [&c](const UserView& u) {
    return PerturbStats(u.x, u.y, c.clip, c.budget, u.user_id, u.key);
  };
  return RunNonInteractive(data, f, seed)->rounds[0].messages;
}

TEST(NldpTest, PermutationInvariant) {
  const Instance inst = MakeInstance(4, 2, 2000, 8);
  NldpConfig c;
  c.clip = ClipConfig{3.0, 3.0, 6.0};
  c.budget = PrivacyBudget{50.0, 1e-5, BudgetSplit::kHalfHalf};
  c.lambda_rule = LambdaRule::Explicit(0.05);
  std::vector<PerturbedMessage> msgs = Messages(inst.data, c, 3);
  const Vec base = *NldpEstimate(msgs, c, msgs.size());
  Philox4x32 gen(9, 0);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(msgs.begin(), msgs.end(), gen);
    EXPECT_THAT(*NldpEstimate(msgs, c, msgs.size()),
                Pointwise(DoubleNear(1e-10), base));
  }
}

TEST(NldpTest, EstimateValidatesMessages) {
  const Instance inst = MakeInstance(3, 1, 50, 10);
  const NldpConfig c = NoiselessConfig(0.0);
  std::vector<PerturbedMessage> msgs = Messages(inst.data, c, 1);
  EXPECT_FALSE(NldpEstimate({}, c, 0).ok());
  EXPECT_FALSE(NldpEstimate(msgs, c, 49).ok());
  msgs[4].kind = MessageKind::kCrossMoment;
  EXPECT_FALSE(NldpEstimate(msgs, c, msgs.size()).ok());
}

TEST(NldpTest, DeterministicInSeedAndRecordsTranscript) {
  const Instance inst = MakeInstance(3, 2, 5000, 11);
  NldpConfig c;
  c.clip = ClipConfig{2.0, 2.0, 2.45};
  c.budget = PrivacyBudget{50.0, 1e-5, BudgetSplit::kHalfHalf};
  Transcript t;
  const NldpRun a = *RunNldp(inst.data, c, 5, &t);
  EXPECT_EQ(RunNldp(inst.data, c, 5)->theta_hat, a.theta_hat);
  EXPECT_NE(RunNldp(inst.data, c, 6)->theta_hat, a.theta_hat);
  EXPECT_EQ(t.rounds.at(0).messages.size(), 5000u);
  EXPECT_TRUE(AuditTranscript(t).passed);
}

TEST(NldpTest, SmallSampleReportsCovNotInvertible) {
  const Instance inst = MakeInstance(50, 3, 100, 12);
  NldpConfig c;
  c.clip = ClipConfig::Defaults(1.0, 100, 50);
  c.budget = PrivacyBudget{1.0, 1e-5, BudgetSplit::kHalfHalf};
  Transcript t;
  absl::StatusOr<NldpRun> run = RunNldp(inst.data, c, 1, &t);
  ASSERT_FALSE(run.ok());
  EXPECT_TRUE(IsCovarianceNotInvertible(run.status()));
  EXPECT_TRUE(AuditTranscript(t).passed);
}

TEST(NldpPublicTest, SamePublicDataNoiselessEqualsOls) {
  const Instance inst = MakeInstance(5, 2, 300, 13);
  NldpConfig c = NoiselessConfig(0.0);
  EXPECT_THAT(RunNldpPublic(inst.data, inst.data, c, 1)->theta_hat,
              Pointwise(DoubleNear(1e-10), OracleOls(inst.data)));
}

TEST(NldpPublicTest, TooFewPublicRowsFails) {
  const Instance inst = MakeInstance(6, 2, 300, 14);
  const Dataset pub = *SampleCovariatesOnly(inst.truth, 5, 3);
  absl::StatusOr<NldpRun> run = RunNldpPublic(inst.data, pub, NoiselessConfig(0), 1);
  ASSERT_FALSE(run.ok());
  EXPECT_TRUE(IsCovarianceNotInvertible(run.status()));
}

TEST(NldpPublicTest, MessagesCarryOnlyCrossMoment) {
  const Instance inst = MakeInstance(4, 2, 100, 15);
  const Dataset pub = *SampleCovariatesOnly(inst.truth, 50, 3);
  NldpConfig c;
  c.clip = ClipConfig{2.0, 2.0, 3.0};
  c.budget = PrivacyBudget{2.0, 1e-5, BudgetSplit::kHalfHalf};
  c.lambda_rule = LambdaRule::Public();
  c.k = 2;
  Transcript t;
  ASSERT_TRUE(RunNldpPublic(inst.data, pub, c, 1, &t).ok());
  for (const PerturbedMessage& m : t.rounds.at(0).messages) {
    EXPECT_EQ(m.kind, MessageKind::kCrossMoment);
  }
}

// Monte-Carlo comparisons run where the noisy covariance is reliably
// positive definite: d = 3 with r = sqrt(2d) and eps = 8.
constexpr std::size_t kMcDim = 3;
constexpr int kMcK = 2;
constexpr int kMcTrials = 20;

struct McSetting {
  std::size_t n = 200000;
  double epsilon = 8.0;
  LambdaRule rule = LambdaRule::SubGaussian();
  bool use_public = false;
  std::size_t public_m = 10000;
};

double McMedianError(const McSetting& s) {
  std::vector<double> errs;
  for (uint64_t t = 0; t < kMcTrials; ++t) {
    const Instance inst = MakeInstance(kMcDim, kMcK, s.n, 1000 + t);
    NldpConfig c;
    c.clip = ClipConfig::Defaults(1.0, s.n, kMcDim);
    c.clip.r = std::sqrt(2.0 * kMcDim);
    c.budget = PrivacyBudget{s.epsilon, 1e-5, BudgetSplit::kHalfHalf};
    c.lambda_rule = s.rule;
    c.k = kMcK;
    absl::StatusOr<NldpRun> run;
    if (s.use_public) {
      const Dataset pub =
          *SampleCovariatesOnly(inst.truth, s.public_m, DeriveSeed(1000 + t, {3}));
      run = RunNldpPublic(inst.data, pub, c, DeriveSeed(1000 + t, {2}));
    } else {
      run = RunNldp(inst.data, c, DeriveSeed(1000 + t, {2}));
    }
    errs.push_back(run.ok() ? NormL2(Subtract(run->theta_hat, inst.truth.theta_star))
                            : INFINITY);
  }
  return ldpsr_oracle::Median(errs);
}

TEST(NldpMonteCarloTest, ThresholdingBeatsNoThresholding) {
  McSetting zero;
  zero.rule = LambdaRule::Explicit(0.0);
  EXPECT_LT(McMedianError(McSetting{}), McMedianError(zero));
}

TEST(NldpMonteCarloTest, ErrorDecreasesWithN) {
  McSetting small;
  small.n = 50000;
  EXPECT_LT(McMedianError(McSetting{}), McMedianError(small));
}

TEST(NldpMonteCarloTest, ErrorMonotoneInEpsilon) {
  McSetting e1, e4, einf;
  e1.epsilon = 1.0;
  e4.epsilon = 4.0;
  einf.epsilon = kInfinity;
  const double m1 = McMedianError(e1), m4 = McMedianError(e4),
               minf = McMedianError(einf);
  EXPECT_GE(m1, m4);
  EXPECT_GE(m4, minf);
}

TEST(NldpMonteCarloTest, PublicCovariatesDoNotHurt) {
  McSetting pub;
  pub.use_public = true;
  pub.rule = LambdaRule::Public();
  EXPECT_LE(McMedianError(pub), McMedianError(McSetting{}));
}

IhtConfig SmallIht(std::size_t n, std::size_t d, std::size_t k, double eps) {
  IhtConfig c = IhtConfig::Isotropic(n, d, k, eps, ClipConfig{0.5, 1.0, 1.0});
  c.eta = 0.3;
  return c;
}

TEST(IhtConfigTest, Defaults) {
  const IhtConfig c = IhtConfig::Isotropic(100000, 20, 2, 4.0, ClipConfig{});
  EXPECT_EQ(c.T, 12u);
  EXPECT_EQ(c.eta, 1.0);
  EXPECT_EQ(c.k_prime, 16u);
  EXPECT_EQ(c.ball_radius, 1.0);
  EXPECT_EQ(IhtConfig::Isotropic(100, 10, 2, 1.0, {}).k_prime, 10u);
  const ClipConfig clip{0.5, 2.0, 1.0};
  EXPECT_NEAR(IhtConfig::Isotropic(100, 9, 2, 1.0, clip).GradientRadius(9),
              3.0 * 0.5 * (3.0 * 0.5 + 2.0), 1e-12);  // k' = 9
}

TEST(IhtConfigTest, GeneralModeFromSpectrum) {
  const SymMat cov = SymMat::Diagonal(Vec{2.0, 1.0, 1.0, 1.0});
  const IhtConfig c = *IhtConfig::General(1000, 4, 1, 2.0, ClipConfig{}, cov);
  EXPECT_NEAR(c.eta, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(c.k_prime, 4u);  // ceil(72 * 4) capped at d
  EXPECT_EQ(c.ball_radius, 2.0);
  EXPECT_EQ(c.mode, IhtMode::kGeneral);
  EXPECT_NEAR(c.GradientRadius(4), 2.0 * (2.0 * 2.0 + 1.0), 1e-12);
  EXPECT_FALSE(
      IhtConfig::General(10, 2, 1, 1.0, {}, SymMat::Diagonal(Vec{1, 0})).ok());
}

TEST(IhtConfigTest, Validation) {
  IhtConfig c = SmallIht(100, 5, 1, 1.0);
  EXPECT_TRUE(c.Validate(100, 5).ok());
  c.T = 101;
  EXPECT_FALSE(c.Validate(100, 5).ok());
  c = SmallIht(100, 5, 1, 1.0);
  c.k_prime = 6;
  EXPECT_FALSE(c.Validate(100, 5).ok());
  c = SmallIht(100, 5, 1, 1.0);
  c.clip = ClipConfig::Disabled();
  EXPECT_FALSE(c.Validate(100, 5).ok());
  c.epsilon = kInfinity;
  EXPECT_TRUE(c.Validate(100, 5).ok());
}

TEST(WarmStartTest, Condition) {
  EXPECT_TRUE(WarmStartAdmissible(Vec{0.1, 0}, Vec{0, 0}, 2.0, 1.0));
  EXPECT_FALSE(WarmStartAdmissible(Vec{0.3, 0}, Vec{0, 0}, 2.0, 1.0));
}

TEST(LdpIhtTest, InvariantsEveryRound) {
  const Instance inst = MakeInstance(20, 2, 20000, 16);
  const IhtConfig c = SmallIht(20000, 20, 2, 4.0);
  const IhtResult r = *LdpIht(inst.data, c, 3, std::nullopt,
                              std::span<const double>(inst.truth.theta_star));
  ASSERT_EQ(r.trace.size(), c.T);
  EXPECT_EQ(r.iterations, c.T);
  for (const IhtRoundTrace& tr : r.trace) {
    EXPECT_LE(tr.nonzeros, c.k_prime);
    EXPECT_LE(tr.norm, c.ball_radius * (1 + 1e-12));
    EXPECT_TRUE(std::isfinite(tr.error));
  }
  EXPECT_LE(CountNonZero(r.theta), c.k_prime);
  EXPECT_LE(r.max_gradient_norm, c.GradientRadius(20));
}

TEST(LdpIhtTest, UsersCoveredExactlyOnce) {
  const Instance inst = MakeInstance(5, 1, 1003, 17);
  const IhtConfig c = SmallIht(1003, 5, 1, 2.0);
  const IhtResult r = *LdpIht(inst.data, c, 4);
  const Transcript& t = r.transcript;
  EXPECT_EQ(t.protocol_kind, ProtocolKind::kSequential);
  ASSERT_EQ(t.rounds.size(), c.T);
  std::set<uint64_t> ids;
  std::size_t total = 0;
  for (const Round& round : t.rounds) {
    ASSERT_TRUE(round.broadcast.has_value());
    for (const PerturbedMessage& m : round.messages) {
      ids.insert(m.user_id);
      ++total;
      EXPECT_EQ(m.kind, MessageKind::kRandomizedGradient);
    }
  }
  EXPECT_EQ(total, 1003u);
  EXPECT_EQ(ids.size(), 1003u);
  EXPECT_TRUE(AuditTranscript(t).passed);
}

TEST(LdpIhtTest, GradientsStayWithinSensitivityBound) {
  // Heavy responses and large covariates hit every clip.
  const Instance inst = MakeInstance(8, 2, 5000, 18, 10.0);
  IhtConfig c = SmallIht(5000, 8, 1, 1.0);
  c.clip = ClipConfig{0.3, 0.7, 1.0};
  const IhtResult r = *LdpIht(inst.data, c, 5);
  EXPECT_GT(r.max_gradient_norm, 0.0);
  EXPECT_LE(r.max_gradient_norm, c.GradientRadius(8) * (1 + 1e-12));
}

TEST(LdpIhtTest, NonPrivateConvergesOnNoiselessData) {
  const std::size_t n = 30000, d = 20;
  const int k = 3;
  const Instance inst = MakeInstance(d, k, n, 19, 0.0);
  IhtConfig c = IhtConfig::Isotropic(n, d, k, kInfinity, ClipConfig::Disabled());
  c.T = 30;
  c.k_prime = k;
  const IhtResult r = *LdpIht(inst.data, c, 6);
  EXPECT_LE(NormL2(Subtract(r.theta, inst.truth.theta_star)),
            0.1 * NormL2(inst.truth.theta_star));
}

TEST(LdpIhtTest, PrivateRunImprovesOnZero) {
  const std::size_t n = 100000, d = 20;
  std::vector<double> errs, zero;
  for (uint64_t t = 0; t < 5; ++t) {
    const Instance inst = MakeInstance(d, 2, n, 2000 + t, 0.5);
    const IhtResult r = *LdpIht(inst.data, SmallIht(n, d, 2, 4.0), t);
    errs.push_back(NormL2(Subtract(r.theta, inst.truth.theta_star)));
    zero.push_back(NormL2(inst.truth.theta_star));
  }
  EXPECT_LT(ldpsr_oracle::Median(errs), ldpsr_oracle::Median(zero));
}

TEST(LdpIhtTest, DeterministicAndWarmStartChecked) {
  const Instance inst = MakeInstance(6, 1, 2000, 20);
  const IhtConfig c = SmallIht(2000, 6, 1, 2.0);
  EXPECT_EQ(LdpIht(inst.data, c, 7)->theta, LdpIht(inst.data, c, 7)->theta);
  EXPECT_FALSE(LdpIht(inst.data, c, 7, Vec{2, 0, 0, 0, 0, 0}).ok());
  EXPECT_FALSE(LdpIht(inst.data, c, 7, Vec{0.1}).ok());
  EXPECT_TRUE(LdpIht(inst.data, c, 7, Vec{0.1, 0, 0, 0, 0, 0}).ok());
}

TEST(LdpIhtTest, GeneralModeRespectsRadiusTwo) {
  const std::size_t n = 20000, d = 6;
  GroundTruth t = *MakeGroundTruth(d, 1, CovarianceSpec::Toeplitz(0.3),
                                   NoiseSpec::Gaussian(0.5), 21);
  const Dataset data = *SampleSubGaussian(t, n, 22);
  const IhtConfig c = *IhtConfig::General(n, d, 1, 4.0, ClipConfig{0.5, 1.0, 1.0},
                                          t.covariance);
  const IhtResult r = *LdpIht(data, c, 8, std::nullopt,
                              std::span<const double>(t.theta_star));
  for (const IhtRoundTrace& tr : r.trace) {
    EXPECT_LE(tr.norm, 2.0 * (1 + 1e-12));
    EXPECT_LE(tr.nonzeros, c.k_prime);
  }
}

TEST(EvaluateTest, PerfectAndZeroEstimates) {
  const Vec star{0.5, 0.0, -0.3};
  const EstimateReport same = *Evaluate(star, star);
  EXPECT_EQ(same.l2_err, 0.0);
  EXPECT_EQ(same.linf_err, 0.0);
  EXPECT_EQ(same.l1_err, 0.0);
  EXPECT_EQ(same.support_precision, 1.0);
  EXPECT_EQ(same.support_recall, 1.0);
  const EstimateReport zero = *Evaluate(Vec(3, 0.0), star);
  EXPECT_EQ(zero.l2_err, NormL2(star));
  EXPECT_EQ(zero.support_recall, 0.0);
  EXPECT_EQ(zero.support_precision, 1.0);
  EXPECT_FALSE(Evaluate(Vec{1.0}, star).ok());
}

TEST(EvaluateTest, MatchesNaiveRecomputation) {
  Philox4x32 gen(23, 0);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 100; ++rep) {
    Vec a(9), b(9);
    for (std::size_t i = 0; i < 9; ++i) {
      a[i] = i % 3 ? normal(gen) : 0.0;
      b[i] = i % 2 ? normal(gen) : 0.0;
    }
    double l1 = 0, l2 = 0, linf = 0;
    int sel = 0, hit = 0, sup = 0;
    for (std::size_t i = 0; i < 9; ++i) {
      const double e = std::abs(a[i] - b[i]);
      l1 += e;
      l2 += e * e;
      linf = std::max(linf, e);
      sel += std::abs(a[i]) > 1e-6;
      sup += b[i] != 0.0;
      hit += std::abs(a[i]) > 1e-6 && b[i] != 0.0;
    }
    const EstimateReport r = *Evaluate(a, b);
    ASSERT_NEAR(r.l1_err, l1, 1e-12);
    ASSERT_NEAR(r.l2_err, std::sqrt(l2), 1e-12);
    ASSERT_EQ(r.linf_err, linf);
    ASSERT_NEAR(r.support_precision, sel ? 1.0 * hit / sel : 1.0, 1e-15);
    ASSERT_NEAR(r.support_recall, sup ? 1.0 * hit / sup : 1.0, 1e-15);
  }
}

TEST(EvaluateTest, JsonFieldsAndFailure) {
  const nlohmann::json ok =
      nlohmann::json::parse(EstimateReportToJson(*Evaluate(Vec{1, 0}, Vec{1, 0})));
  for (const char* key : {"theta_hat", "l2_err", "linf_err", "l1_err",
                          "support_precision", "support_recall",
                          "iterations_run", "failure"}) {
    EXPECT_TRUE(ok.contains(key)) << key;
  }
  EXPECT_TRUE(ok["failure"].is_null());
  const EstimateReport f = FailureReport(EstimatorFailure::kCovNotInvertible);
  EXPECT_TRUE(std::isnan(f.l2_err));
  const nlohmann::json bad = nlohmann::json::parse(EstimateReportToJson(f));
  EXPECT_EQ(bad["failure"], "cov_not_invertible");
  EXPECT_TRUE(bad["l2_err"].is_null());
}

}  // namespace
}  // namespace ldpsr
