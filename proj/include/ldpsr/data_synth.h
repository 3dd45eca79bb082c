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

// Ground truths and synthetic regression datasets y = <theta*, x> + zeta.
//
// Every generator is a pure function of its parameters and seed. Row i draws
// from the stream (seed, i), so rows can be produced in any order.

#ifndef LDPSR_DATA_SYNTH_H_
#define LDPSR_DATA_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "ldpsr/linalg.h"

namespace ldpsr {

enum class NoiseFamily { kGaussian, kBoundedHypercube, kStudentT };

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::kGaussian;
  // Gaussian: standard deviation. Student-t: multiplier on a standard t draw.
  double scale = 0.0;
  // Student-t only: the response has a finite 2p-th moment.
  double moment_p = 0.0;

  static NoiseSpec Gaussian(double sigma) {
    return {NoiseFamily::kGaussian, sigma, 0.0};
  }
  static NoiseSpec StudentT(double scale, double p) {
    return {NoiseFamily::kStudentT, scale, p};
  }
  static NoiseSpec BoundedHypercube() {
    return {NoiseFamily::kBoundedHypercube, 1.0, 0.0};
  }
  // Degrees of freedom 2p + 1 for the Student-t family.
  double DegreesOfFreedom() const { return 2.0 * moment_p + 1.0; }
};

enum class CovarianceKind { kIdentity, kToeplitz, kCustom };

struct CovarianceSpec {
  CovarianceKind kind = CovarianceKind::kIdentity;
  double rho = 0.0;   // Toeplitz: Sigma_ij = rho^|i-j|.
  SymMat custom;      // Custom: used as given (must be SPD).

  static CovarianceSpec Identity() { return {}; }
  static CovarianceSpec Toeplitz(double rho) {
    return {CovarianceKind::kToeplitz, rho, {}};
  }
  static CovarianceSpec Custom(SymMat m) {
    return {CovarianceKind::kCustom, 0.0, std::move(m)};
  }
};

absl::StatusOr<SymMat> BuildCovariance(std::size_t d,
                                       const CovarianceSpec& spec);

struct GroundTruth {
  Vec theta_star;
  int sparsity_k = 0;
  SymMat covariance;
  NoiseSpec noise;

  std::size_t dim() const { return theta_star.size(); }
};

// Checks ||theta*||_0 <= k, ||theta*||_1 <= 1 and that the covariance is SPD.
absl::Status ValidateGroundTruth(const GroundTruth& truth);

struct Provenance {
  std::string generator;
  uint64_t seed = 0;
};

// n rows of d covariates (row-major) plus n responses.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t n, std::size_t d, Provenance provenance)
      : n_(n), d_(d), x_(n * d, 0.0), y_(n, 0.0),
        provenance_(std::move(provenance)) {}

  // Takes ownership of the buffers; fails on shape mismatch, n == 0 or
  // non-finite entries.
  static absl::StatusOr<Dataset> FromBuffers(std::size_t n, std::size_t d,
                                             std::vector<double> x,
                                             std::vector<double> y,
                                             Provenance provenance);

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  std::span<const double> x(std::size_t i) const {
    return {x_.data() + i * d_, d_};
  }
  std::span<double> mutable_x(std::size_t i) { return {x_.data() + i * d_, d_}; }
  double y(std::size_t i) const { return y_[i]; }
  double& mutable_y(std::size_t i) { return y_[i]; }
  const std::vector<double>& x_data() const { return x_; }
  const std::vector<double>& y_data() const { return y_; }
  const Provenance& provenance() const { return provenance_; }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.x_ == b.x_ && a.y_ == b.y_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
  Provenance provenance_;
};

// Lower-bound construction. Non-interactive: z in {-1,0,+1}^d and
// theta_i = gamma z_i. Interactive: z in {-1,+1}^d and
// theta_i = gamma (z_i + 1) / 2.
struct HardInstance {
  std::vector<int> z;
  double gamma = 0.0;
  bool interactive = false;
  GroundTruth truth;
};

// Support uniform over all k-subsets, magnitudes U[0.5, 1] / k with random
// signs, then rescaled so ||theta*||_1 = 0.9.
absl::StatusOr<GroundTruth> MakeGroundTruth(std::size_t d, int k,
                                            const CovarianceSpec& covariance,
                                            const NoiseSpec& noise,
                                            uint64_t seed);

inline constexpr double kThetaL1Budget = 0.9;

// x = L g with L L^T = Sigma and g standard normal; y = <x, theta*> + zeta.
// Accepts Gaussian and Student-t noise specs.
absl::StatusOr<Dataset> SampleSubGaussian(const GroundTruth& truth,
                                          std::size_t n, uint64_t seed);

// Same covariates, zeta = scale * t_{2p+1}. Requires moment_p > 1.
absl::StatusOr<Dataset> SampleHeavyTailed(const GroundTruth& truth,
                                          std::size_t n, uint64_t seed);

// Draws n unlabeled covariate rows (responses left at zero) from the same
// design; used as the public sample of the public-data estimator.
absl::StatusOr<Dataset> SampleCovariatesOnly(const GroundTruth& truth,
                                             std::size_t m, uint64_t seed);

// x uniform on {-1,+1}^d and P(y = +1 | x) = (1 + <x, theta_z>) / 2, which is
// y = <theta_z, x> + zeta with E[zeta | x] = 0 and |zeta| <= 2.
// gamma = nu / sqrt(k), P(z_i = +1) = P(z_i = -1) = k / 4d, and z is redrawn
// until ||z||_0 <= k. Requires nu <= 1 / sqrt(k).
absl::StatusOr<std::pair<HardInstance, Dataset>> SampleHardNonInteractive(
    std::size_t d, int k, double nu, std::size_t n, uint64_t seed);

// gamma = 4 sqrt(2) nu / sqrt(k), P(z_i = +1) = k / 2d, z redrawn until at
// most k coordinates equal +1. Requires nu <= 1 / (4 sqrt(2k)).
absl::StatusOr<std::pair<HardInstance, Dataset>> SampleHardInteractive(
    std::size_t d, int k, double nu, std::size_t n, uint64_t seed);

// Draws hypercube rows for an already constructed hard instance.
absl::StatusOr<Dataset> SampleHypercube(const GroundTruth& truth,
                                        std::size_t n, uint64_t seed,
                                        std::string generator_name);

}  // namespace ldpsr

#endif  // LDPSR_DATA_SYNTH_H_
