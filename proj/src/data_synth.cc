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
#include <numeric>
#include <random>

#include "absl/strings/str_format.h"
#include "ldpsr/rng.h"

namespace ldpsr {
namespace {

constexpr int kMaxPriorRedraws = 100000;

bool IsIdentity(const SymMat& m) {
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j)
      if (m(i, j) != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

absl::Status CheckDimAndK(std::size_t d, int k) {
  if (d == 0) return absl::InvalidArgumentError("dimension must be >= 1");
  if (k < 1 || static_cast<std::size_t>(k) > d) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sparsity k=%d must lie in [1, d=%d]", k, d));
  }
  return absl::OkStatus();
}

// Shared body of the Gaussian-design samplers.
absl::StatusOr<Dataset> SampleGaussianDesign(const GroundTruth& truth,
                                             std::size_t n, uint64_t seed,
                                             bool with_response,
                                             std::string generator) {
  if (n == 0) return absl::InvalidArgumentError("n must be >= 1");
  const std::size_t d = truth.dim();
  if (truth.covariance.dim() != d) {
    return absl::InvalidArgumentError("covariance dimension mismatch");
  }
  const NoiseSpec& noise = truth.noise;
  if (with_response) {
    if (noise.family == NoiseFamily::kBoundedHypercube) {
      return absl::InvalidArgumentError(
          "hypercube noise is only produced by the hard-instance samplers");
    }
    if (noise.scale < 0.0 || !std::isfinite(noise.scale)) {
      return absl::InvalidArgumentError("noise scale must be finite and >= 0");
    }
    if (noise.family == NoiseFamily::kStudentT && !(noise.moment_p > 1.0)) {
      return absl::InvalidArgumentError("Student-t noise needs moment_p > 1");
    }
  }
  absl::StatusOr<CholeskyFactor> chol = Cholesky(truth.covariance, 0.0);
  if (!chol.ok()) {
    return absl::InvalidArgumentError("covariance is not positive definite");
  }
  const bool identity = IsIdentity(truth.covariance);

  Dataset data(n, d, Provenance{std::move(generator), seed});
  Vec g(d);
  for (std::size_t i = 0; i < n; ++i) {
    Philox4x32 gen(seed, i);
    std::normal_distribution<double> normal;
    for (double& v : g) v = normal(gen);
    std::span<double> row = data.mutable_x(i);
    if (identity) {
      std::copy(g.begin(), g.end(), row.begin());
    } else {
      const Vec x = chol->MultiplyLower(g);
      std::copy(x.begin(), x.end(), row.begin());
    }
    if (!with_response) continue;
    double zeta = 0.0;
    if (noise.family == NoiseFamily::kGaussian) {
      zeta = noise.scale * normal(gen);
    } else {
      std::student_t_distribution<double> t(noise.DegreesOfFreedom());
      zeta = noise.scale * t(gen);
    }
    data.mutable_y(i) = Dot(row, truth.theta_star) + zeta;
  }
  return data;
}

}  // namespace

absl::StatusOr<SymMat> BuildCovariance(std::size_t d,
                                       const CovarianceSpec& spec) {
  switch (spec.kind) {
    case CovarianceKind::kIdentity:
      return SymMat::Identity(d);
    case CovarianceKind::kToeplitz: {
      if (!(std::abs(spec.rho) < 1.0)) {
        return absl::InvalidArgumentError("Toeplitz rho must satisfy |rho| < 1");
      }
      SymMat m(d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
          m.Set(i, j, std::pow(spec.rho, static_cast<double>(j - i)));
      return m;
    }
    case CovarianceKind::kCustom: {
      if (spec.custom.dim() != d) {
        return absl::InvalidArgumentError("custom covariance dimension mismatch");
      }
      if (!Spectrum(spec.custom).is_positive_definite) {
        return absl::InvalidArgumentError("custom covariance is not SPD");
      }
      return spec.custom;
    }
  }
  return absl::InvalidArgumentError("unknown covariance kind");
}

absl::Status ValidateGroundTruth(const GroundTruth& truth) {
  const std::size_t d = truth.dim();
  if (CountNonZero(truth.theta_star) >
      static_cast<std::size_t>(truth.sparsity_k)) {
    return absl::InternalError("theta* has more than k nonzeros");
  }
  if (NormL1(truth.theta_star) > 1.0 + 1e-12) {
    return absl::InternalError("||theta*||_1 exceeds 1");
  }
  if (truth.covariance.dim() != d) {
    return absl::InternalError("covariance dimension mismatch");
  }
  if (!Spectrum(truth.covariance).is_positive_definite) {
    return absl::InternalError("covariance is not positive definite");
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> Dataset::FromBuffers(std::size_t n, std::size_t d,
                                             std::vector<double> x,
                                             std::vector<double> y,
                                             Provenance provenance) {
  if (n == 0) return absl::InvalidArgumentError("dataset needs n >= 1");
  if (x.size() != n * d || y.size() != n) {
    return absl::InvalidArgumentError("dataset buffer shape mismatch");
  }
  if (!AllFinite(x) || !AllFinite(y)) {
    return absl::InvalidArgumentError("dataset contains non-finite values");
  }
  Dataset data;
  data.n_ = n;
  data.d_ = d;
  data.x_ = std::move(x);
  data.y_ = std::move(y);
  data.provenance_ = std::move(provenance);
  return data;
}

absl::StatusOr<GroundTruth> MakeGroundTruth(std::size_t d, int k,
                                            const CovarianceSpec& covariance,
                                            const NoiseSpec& noise,
                                            uint64_t seed) {
  if (absl::Status s = CheckDimAndK(d, k); !s.ok()) return s;
  absl::StatusOr<SymMat> cov = BuildCovariance(d, covariance);
  if (!cov.ok()) return cov.status();

  Philox4x32 gen(seed, 0);
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, d - 1);
    std::swap(idx[i], idx[pick(gen)]);
  }
  std::uniform_real_distribution<double> magnitude(0.5, 1.0);
  std::bernoulli_distribution positive(0.5);
  GroundTruth truth;
  truth.theta_star.assign(d, 0.0);
  double l1 = 0.0;
  for (int i = 0; i < k; ++i) {
    const double m = magnitude(gen) / k;
    truth.theta_star[idx[i]] = positive(gen) ? m : -m;
    l1 += m;
  }
  for (double& t : truth.theta_star) t *= kThetaL1Budget / l1;
  truth.sparsity_k = k;
  truth.covariance = *std::move(cov);
  truth.noise = noise;
  if (absl::Status s = ValidateGroundTruth(truth); !s.ok()) return s;
  return truth;
}

absl::StatusOr<Dataset> SampleSubGaussian(const GroundTruth& truth,
                                          std::size_t n, uint64_t seed) {
  return SampleGaussianDesign(truth, n, seed, /*with_response=*/true,
                              "subgaussian");
}

absl::StatusOr<Dataset> SampleHeavyTailed(const GroundTruth& truth,
                                          std::size_t n, uint64_t seed) {
  if (truth.noise.family != NoiseFamily::kStudentT) {
    return absl::InvalidArgumentError(
        "heavy-tailed sampling needs a Student-t noise spec");
  }
  return SampleGaussianDesign(truth, n, seed, /*with_response=*/true,
                              "heavy_tailed");
}

absl::StatusOr<Dataset> SampleCovariatesOnly(const GroundTruth& truth,
                                             std::size_t m, uint64_t seed) {
  return SampleGaussianDesign(truth, m, seed, /*with_response=*/false,
                              "public_covariates");
}

absl::StatusOr<Dataset> SampleHypercube(const GroundTruth& truth,
                                        std::size_t n, uint64_t seed,
                                        std::string generator_name) {
  if (n == 0) return absl::InvalidArgumentError("n must be >= 1");
  if (NormL1(truth.theta_star) > 1.0 + 1e-12) {
    return absl::InvalidArgumentError(
        "hypercube responses need ||theta||_1 <= 1");
  }
  const std::size_t d = truth.dim();
  Dataset data(n, d, Provenance{std::move(generator_name), seed});
  for (std::size_t i = 0; i < n; ++i) {
    Philox4x32 gen(seed, i);
    std::bernoulli_distribution coin(0.5);
    std::span<double> row = data.mutable_x(i);
    for (double& v : row) v = coin(gen) ? 1.0 : -1.0;
    const double p_plus = 0.5 * (1.0 + Dot(row, truth.theta_star));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    data.mutable_y(i) = unif(gen) < p_plus ? 1.0 : -1.0;
  }
  return data;
}

absl::StatusOr<std::pair<HardInstance, Dataset>> SampleHardNonInteractive(
    std::size_t d, int k, double nu, std::size_t n, uint64_t seed) {
  if (absl::Status s = CheckDimAndK(d, k); !s.ok()) return s;
  if (!(nu >= 0.0) || nu > 1.0 / std::sqrt(static_cast<double>(k))) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "nu=%g must lie in [0, 1/sqrt(k)=%g]", nu, 1.0 / std::sqrt(k * 1.0)));
  }
  HardInstance inst;
  inst.gamma = nu / std::sqrt(static_cast<double>(k));
  inst.interactive = false;
  const double p_side = static_cast<double>(k) / (4.0 * d);

  Philox4x32 gen(DeriveSeed(seed, {0}), 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxPriorRedraws) {
      return absl::InternalError("could not draw a k-sparse hard instance");
    }
    inst.z.assign(d, 0);
    int nonzero = 0;
    for (int& z : inst.z) {
      const double u = unif(gen);
      z = u < p_side ? 1 : (u < 2.0 * p_side ? -1 : 0);
      nonzero += z != 0;
    }
    if (nonzero <= k) break;
  }
  GroundTruth& truth = inst.truth;
  truth.theta_star.resize(d);
  for (std::size_t i = 0; i < d; ++i) truth.theta_star[i] = inst.gamma * inst.z[i];
  truth.sparsity_k = k;
  truth.covariance = SymMat::Identity(d);
  truth.noise = NoiseSpec::BoundedHypercube();
  if (absl::Status s = ValidateGroundTruth(truth); !s.ok()) return s;

  absl::StatusOr<Dataset> data =
      SampleHypercube(truth, n, DeriveSeed(seed, {1}), "hard_noninteractive");
  if (!data.ok()) return data.status();
  return std::make_pair(std::move(inst), *std::move(data));
}

absl::StatusOr<std::pair<HardInstance, Dataset>> SampleHardInteractive(
    std::size_t d, int k, double nu, std::size_t n, uint64_t seed) {
  if (absl::Status s = CheckDimAndK(d, k); !s.ok()) return s;
  const double nu_max = 1.0 / (4.0 * std::sqrt(2.0 * k));
  if (!(nu >= 0.0) || nu > nu_max) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "nu=%g must lie in [0, 1/(4 sqrt(2k))=%g]", nu, nu_max));
  }
  HardInstance inst;
  inst.gamma = 4.0 * std::sqrt(2.0) * nu / std::sqrt(static_cast<double>(k));
  inst.interactive = true;
  const double p_plus = static_cast<double>(k) / (2.0 * d);

  Philox4x32 gen(DeriveSeed(seed, {0}), 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxPriorRedraws) {
      return absl::InternalError("could not draw a k-sparse hard instance");
    }
    inst.z.assign(d, -1);
    int plus = 0;
    for (int& z : inst.z) {
      if (unif(gen) < p_plus) {
        z = 1;
        ++plus;
      }
    }
    if (plus <= k) break;
  }
  GroundTruth& truth = inst.truth;
  truth.theta_star.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    truth.theta_star[i] = inst.gamma * (inst.z[i] + 1) / 2.0;
  }
  truth.sparsity_k = k;
  truth.covariance = SymMat::Identity(d);
  truth.noise = NoiseSpec::BoundedHypercube();
  if (absl::Status s = ValidateGroundTruth(truth); !s.ok()) return s;

  absl::StatusOr<Dataset> data =
      SampleHypercube(truth, n, DeriveSeed(seed, {1}), "hard_interactive");
  if (!data.ok()) return data.status();
  return std::make_pair(std::move(inst), *std::move(data));
}

}  // namespace ldpsr
