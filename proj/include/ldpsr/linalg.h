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

// Small dense linear algebra and thresholding primitives. Dimensions are
// expected to stay in the low hundreds; every routine is O(d^2) or O(d^3)
// with no blocking.

#ifndef LDPSR_LINALG_H_
#define LDPSR_LINALG_H_

#include <cstddef>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace ldpsr {

using Vec = std::vector<double>;

// Symmetric d x d matrix. Storage is full row-major; every write goes to both
// (i, j) and (j, i), so symmetry holds exactly at all times.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {}

  static SymMat Identity(std::size_t dim);
  static SymMat Diagonal(std::span<const double> diag);
  // Builds from a row-major d x d buffer; fails unless it is exactly
  // symmetric.
  static absl::StatusOr<SymMat> FromRowMajor(std::size_t dim,
                                             std::span<const double> values);

  std::size_t dim() const { return dim_; }
  bool empty() const { return dim_ == 0; }

  double operator()(std::size_t i, std::size_t j) const {
    return a_[i * dim_ + j];
  }
  void Set(std::size_t i, std::size_t j, double v) {
    a_[i * dim_ + j] = v;
    a_[j * dim_ + i] = v;
  }
  void Add(std::size_t i, std::size_t j, double v) {
    a_[i * dim_ + j] += v;
    if (i != j) a_[j * dim_ + i] += v;
  }

  // this += scale * x x^T.
  void AddOuter(std::span<const double> x, double scale = 1.0);
  SymMat& operator+=(const SymMat& other);
  SymMat& operator*=(double s);

  Vec Multiply(std::span<const double> x) const;
  std::span<const double> row(std::size_t i) const {
    return {a_.data() + i * dim_, dim_};
  }
  const std::vector<double>& data() const { return a_; }

  friend bool operator==(const SymMat&, const SymMat&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> a_;
};

struct SpectrumReport {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool is_positive_definite = false;
};

// Lower-triangular Cholesky factor L with A = L L^T.
class CholeskyFactor {
 public:
  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const {
    return l_[i * dim_ + j];
  }
  Vec Solve(std::span<const double> b) const;
  // Returns L * g.
  Vec MultiplyLower(std::span<const double> g) const;

 private:
  friend absl::StatusOr<CholeskyFactor> Cholesky(const SymMat&, double);
  std::size_t dim_ = 0;
  std::vector<double> l_;
};

inline constexpr double kDefaultPivotFloor = 1e-10;

// Fails with CovarianceNotInvertibleError when a pivot drops below
// `pivot_floor`.
absl::StatusOr<CholeskyFactor> Cholesky(const SymMat& a,
                                        double pivot_floor = kDefaultPivotFloor);

// Solves A x = b through a Cholesky factorization. There is no
// pseudo-inverse fallback.
absl::StatusOr<Vec> SolveSpd(const SymMat& a, std::span<const double> b,
                             double pivot_floor = kDefaultPivotFloor);

// Extreme eigenvalues via cyclic Jacobi rotations, converged to 1e-8 relative
// off-diagonal mass.
SpectrumReport Spectrum(const SymMat& a);
// All eigenvalues in ascending order (same Jacobi iteration).
Vec Eigenvalues(const SymMat& a);

absl::Status CovarianceNotInvertibleError(absl::string_view detail);
bool IsCovarianceNotInvertible(const absl::Status& status);

// [S_lambda(u)]_i = sgn(u_i) max(|u_i| - lambda, 0), with sgn(0) = 0.
absl::StatusOr<Vec> SoftThreshold(std::span<const double> u, double lambda);

// Keeps the k_keep largest-magnitude entries; ties keep the lower index.
absl::StatusOr<Vec> HardTruncate(std::span<const double> v,
                                 std::size_t k_keep);

// Euclidean projection onto the centered ball of the given radius (> 0).
// Vectors within 1e-14 relative of the sphere are returned unchanged.
Vec ProjectL2Ball(std::span<const double> v, double radius);

double Dot(std::span<const double> a, std::span<const double> b);
double NormL1(std::span<const double> v);
double NormL2(std::span<const double> v);
double NormLInf(std::span<const double> v);
std::size_t CountNonZero(std::span<const double> v);
Vec Subtract(std::span<const double> a, std::span<const double> b);
bool AllFinite(std::span<const double> v);

}  // namespace ldpsr

#endif  // LDPSR_LINALG_H_
