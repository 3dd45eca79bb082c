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

// Sparse linear regression estimators: the closed-form soft-thresholded OLS
// baseline, its non-interactive private counterpart (with and without public
// covariates) and private iterative hard thresholding.

#ifndef LDPSR_ESTIMATORS_H_
#define LDPSR_ESTIMATORS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ldpsr/data_synth.h"
#include "ldpsr/linalg.h"
#include "ldpsr/privacy.h"
#include "ldpsr/protocol.h"

namespace ldpsr {

enum class LambdaRuleKind {
  kExplicit,
  // c d log n sqrt(log(1/delta)) / (sqrt(n) eps)
  kSubGaussian,
  // c d log n sqrt(log(1/delta)) (log d / (n eps^2))^((p-1)/(2p))
  kHeavyTailed,
  // c log n sqrt(d k log d log(1/delta)) / (eps sqrt(n))
  kPublic,
};

struct LambdaRule {
  LambdaRuleKind kind = LambdaRuleKind::kSubGaussian;
  double c_lambda = 1.0;
  double explicit_value = 0.0;  // kExplicit
  double moment_p = 2.0;        // kHeavyTailed

  static LambdaRule Explicit(double lambda) {
    return {LambdaRuleKind::kExplicit, 1.0, lambda, 2.0};
  }
  static LambdaRule SubGaussian(double c = 1.0) {
    return {LambdaRuleKind::kSubGaussian, c, 0.0, 2.0};
  }
  static LambdaRule HeavyTailed(double p, double c = 1.0) {
    return {LambdaRuleKind::kHeavyTailed, c, 0.0, p};
  }
  static LambdaRule Public(double c = 1.0) {
    return {LambdaRuleKind::kPublic, c, 0.0, 2.0};
  }
};

// Evaluates the rule; every data-driven rule yields 0 at epsilon = infinity.
// `k` is only read by kPublic.
absl::StatusOr<double> ResolveLambda(const LambdaRule& rule, std::size_t n,
                                     std::size_t d, std::size_t k,
                                     const PrivacyBudget& budget);

// Response clip for bounded 2p-th moments: (n / log d)^(1/(2p)).
double HeavyTailedTau2(std::size_t n, std::size_t d, double p);

struct NldpConfig {
  ClipConfig clip;
  PrivacyBudget budget;
  LambdaRule lambda_rule;
  // Sparsity hyperparameter, read by LambdaRuleKind::kPublic.
  std::size_t k = 0;
  double pivot_floor = kDefaultPivotFloor;
};

// S_lambda(Sigma_XX^-1 Sigma_XY) with Sigma_XX = (1/n) sum x x^T and
// Sigma_XY = (1/n) sum x y.
absl::StatusOr<Vec> OlsSoftThreshold(const Dataset& data, double lambda,
                                     double pivot_floor = kDefaultPivotFloor);

// Running sums of the server-side channels. Accepts kStatPair messages, or
// kCrossMoment messages when built with `cross_moment_only`.
class StatAggregator {
 public:
  explicit StatAggregator(std::size_t d, bool cross_moment_only = false);

  absl::Status Add(const PerturbedMessage& msg);

  std::size_t count() const { return count_; }
  std::size_t dim() const { return dim_; }
  // Channel means; meaningless before the first Add.
  SymMat MeanXX() const;
  Vec MeanXY() const;

 private:
  std::size_t dim_;
  bool cross_moment_only_;
  std::size_t count_ = 0;
  SymMat sum_xx_;
  Vec sum_xy_;
};

// Server side of the two-release protocol: averages both channels, solves
// and soft-thresholds with `lambda`.
absl::StatusOr<Vec> NldpFinish(const StatAggregator& agg, double lambda,
                               double pivot_floor = kDefaultPivotFloor);

// Same, from a message list. All messages must be kStatPair and there must
// be exactly n of them.
absl::StatusOr<Vec> NldpEstimate(std::span<const PerturbedMessage> messages,
                                 const NldpConfig& config, std::size_t n);

// Public-covariate server: Sigma_pub = (1/m) sum over public rows of x x^T
// (unclipped), theta = S_lambda(Sigma_pub^-1 mean(noisy x~ y~)).
absl::StatusOr<Vec> NldpPublicEstimate(
    std::span<const PerturbedMessage> messages, const Dataset& public_x,
    const NldpConfig& config);

struct NldpRun {
  Vec theta_hat;
  double lambda = 0.0;
};

// Runs the non-interactive protocol over `data` and the two-release server.
// When `transcript` is given it receives the (payload-free) transcript as
// soon as the protocol completes, so it survives a failing server solve.
absl::StatusOr<NldpRun> RunNldp(const Dataset& data, const NldpConfig& config,
                                uint64_t run_seed,
                                Transcript* transcript = nullptr);

// Runs the cross-moment-only protocol over `data` and the public-covariate
// server with covariates `public_x`.
absl::StatusOr<NldpRun> RunNldpPublic(const Dataset& data,
                                      const Dataset& public_x,
                                      const NldpConfig& config,
                                      uint64_t run_seed,
                                      Transcript* transcript = nullptr);

enum class IhtMode { kIsotropic, kGeneral };

struct IhtConfig {
  std::size_t T = 1;
  double eta = 1.0;
  std::size_t k_prime = 1;
  double epsilon = 1.0;
  ClipConfig clip;
  double ball_radius = 1.0;
  IhtMode mode = IhtMode::kIsotropic;
  // Spectrum used to set eta and k' in general mode (0 when unknown).
  double gamma = 0.0;
  double mu = 0.0;

  // Isotropic: sqrt(d) tau1 (sqrt(k') tau1 + tau2).
  // General:   sqrt(d) tau1 (2 sqrt(k') tau1 + tau2).
  double GradientRadius(std::size_t d) const;

  // T = ceil(log n), eta = 1, k' = min(8k, d), radius 1.
  static IhtConfig Isotropic(std::size_t n, std::size_t d, std::size_t k,
                             double epsilon, const ClipConfig& clip);
  // gamma, mu from the spectrum of `covariance`; eta = 2/(3 gamma),
  // k' = min(ceil(72 (gamma/mu)^2 k), d), radius 2, T = ceil(log n).
  static absl::StatusOr<IhtConfig> General(std::size_t n, std::size_t d,
                                           std::size_t k, double epsilon,
                                           const ClipConfig& clip,
                                           const SymMat& covariance);

  absl::Status Validate(std::size_t n, std::size_t d) const;
};

// True when ||theta0 - theta*||_2 <= (1/2)(mu/gamma), the warm-start
// condition of the general mode.
bool WarmStartAdmissible(std::span<const double> theta0,
                         std::span<const double> theta_star, double gamma,
                         double mu);

struct IhtRoundTrace {
  std::size_t round = 0;
  std::size_t nonzeros = 0;
  double norm = 0.0;
  // ||theta_t - theta*||_2, NaN when no truth was supplied.
  double error = 0.0;
};

struct IhtResult {
  Vec theta;
  std::vector<IhtRoundTrace> trace;
  double max_gradient_norm = 0.0;
  std::size_t iterations = 0;
  Transcript transcript;
};

// Sequentially interactive private IHT. Round t: each user in group t
// computes grad = x~ (<theta, x~> - y~), checks ||grad|| <= r_grad and
// releases the sphere-randomized gradient; the server takes
// theta <- Proj_radius(Trunc(theta - eta * mean(grads), k')).
// `theta_star` only feeds the per-round error trace.
absl::StatusOr<IhtResult> LdpIht(
    const Dataset& data, const IhtConfig& config, uint64_t run_seed,
    std::optional<Vec> warm_start = std::nullopt,
    std::optional<std::span<const double>> theta_star = std::nullopt,
    const ProtocolOptions& options = ProtocolOptions{.retain_payloads = false, .shuffle_seed = std::nullopt});

enum class EstimatorFailure { kCovNotInvertible };

const char* EstimatorFailureName(EstimatorFailure failure);

struct EstimateReport {
  Vec theta_hat;
  double l2_err = 0.0;
  double linf_err = 0.0;
  double l1_err = 0.0;
  double support_precision = 0.0;
  double support_recall = 0.0;
  std::size_t iterations_run = 0;
  std::optional<EstimatorFailure> failure;
};

inline constexpr double kDefaultSupportThreshold = 1e-6;

// Error norms of theta_hat - theta*. Entries with |value| > threshold count
// as selected. Precision is 1 when nothing is selected; recall is 1 when
// theta* has empty support.
absl::StatusOr<EstimateReport> Evaluate(
    std::span<const double> theta_hat, std::span<const double> theta_star,
    double support_threshold = kDefaultSupportThreshold);

// NaN errors and the failure tag.
EstimateReport FailureReport(EstimatorFailure failure);

std::string EstimateReportToJson(const EstimateReport& report);

}  // namespace ldpsr

#endif  // LDPSR_ESTIMATORS_H_
