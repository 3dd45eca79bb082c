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

#include "ldpsr/linalg.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "absl/strings/cord.h"
#include "absl/strings/str_format.h"

namespace ldpsr {
namespace {

constexpr char kCovNotInvertibleUrl[] = "type.ldpsr/cov_not_invertible";
constexpr double kJacobiTolerance = 1e-8;
constexpr int kMaxJacobiSweeps = 100;
constexpr double kProjectionSlack = 1e-14;

double Sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Cyclic Jacobi on a full copy; returns the diagonal once the off-diagonal
// Frobenius mass falls below tolerance * ||A||_F.
Vec JacobiDiagonal(const SymMat& m) {
  const std::size_t d = m.dim();
  std::vector<double> a = m.data();
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * d + j]; };

  double frob = 0.0;
  for (double v : a) frob += v * v;
  frob = std::sqrt(frob);

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (i != j) off += at(i, j) * at(i, j);
    if (std::sqrt(off) <= kJacobiTolerance * frob || off == 0.0) break;

    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
      }
    }
  }
  Vec diag(d);
  for (std::size_t i = 0; i < d; ++i) diag[i] = at(i, i);
  return diag;
}

}  // namespace

SymMat SymMat::Identity(std::size_t dim) {
  SymMat m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.Set(i, i, 1.0);
  return m;
}

SymMat SymMat::Diagonal(std::span<const double> diag) {
  SymMat m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m.Set(i, i, diag[i]);
  return m;
}

absl::StatusOr<SymMat> SymMat::FromRowMajor(std::size_t dim,
                                            std::span<const double> values) {
  if (values.size() != dim * dim) {
    return absl::InvalidArgumentError(
        absl::StrFormat("expected %d entries, got %d", dim * dim, values.size()));
  }
  SymMat m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      if (values[i * dim + j] != values[j * dim + i]) {
        return absl::InvalidArgumentError(
            absl::StrFormat("matrix not symmetric at (%d, %d)", i, j));
      }
      m.Set(i, j, values[i * dim + j]);
    }
  }
  return m;
}

void SymMat::AddOuter(std::span<const double> x, double scale) {
  assert(x.size() == dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    const double xi = scale * x[i];
    for (std::size_t j = i; j < dim_; ++j) {
      const double v = xi * x[j];
      a_[i * dim_ + j] += v;
      if (j != i) a_[j * dim_ + i] += v;
    }
  }
}

SymMat& SymMat::operator+=(const SymMat& other) {
  assert(other.dim_ == dim_);
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += other.a_[i];
  return *this;
}

SymMat& SymMat::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

Vec SymMat::Multiply(std::span<const double> x) const {
  assert(x.size() == dim_);
  Vec out(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    const double* r = a_.data() + i * dim_;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) acc += r[j] * x[j];
    out[i] = acc;
  }
  return out;
}

absl::Status CovarianceNotInvertibleError(absl::string_view detail) {
  absl::Status status = absl::FailedPreconditionError(
      absl::StrFormat("covariance not invertible: %s", detail));
  status.SetPayload(kCovNotInvertibleUrl, absl::Cord("1"));
  return status;
}

bool IsCovarianceNotInvertible(const absl::Status& status) {
  return status.GetPayload(kCovNotInvertibleUrl).has_value();
}

absl::StatusOr<CholeskyFactor> Cholesky(const SymMat& a, double pivot_floor) {
  const std::size_t d = a.dim();
  CholeskyFactor f;
  f.dim_ = d;
  f.l_.assign(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double pivot = a(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= f.l_[j * d + k] * f.l_[j * d + k];
    if (!(pivot >= pivot_floor)) {
      return CovarianceNotInvertibleError(absl::StrFormat(
          "pivot %g at column %d is below floor %g", pivot, j, pivot_floor));
    }
    const double ljj = std::sqrt(pivot);
    f.l_[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= f.l_[i * d + k] * f.l_[j * d + k];
      f.l_[i * d + j] = s / ljj;
    }
  }
  return f;
}

Vec CholeskyFactor::Solve(std::span<const double> b) const {
  assert(b.size() == dim_);
  const std::size_t d = dim_;
  Vec y(b.begin(), b.end());
  for (std::size_t i = 0; i < d; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_[i * d + k] * y[k];
    y[i] = s / l_[i * d + i];
  }
  for (std::size_t ii = d; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < d; ++k) s -= l_[k * d + ii] * y[k];
    y[ii] = s / l_[ii * d + ii];
  }
  return y;
}

Vec CholeskyFactor::MultiplyLower(std::span<const double> g) const {
  assert(g.size() == dim_);
  Vec out(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += l_[i * dim_ + k] * g[k];
    out[i] = s;
  }
  return out;
}

absl::StatusOr<Vec> SolveSpd(const SymMat& a, std::span<const double> b,
                             double pivot_floor) {
  if (b.size() != a.dim()) {
    return absl::InvalidArgumentError("dimension mismatch in SolveSpd");
  }
  absl::StatusOr<CholeskyFactor> f = Cholesky(a, pivot_floor);
  if (!f.ok()) return f.status();
  Vec x = f->Solve(b);
  if (!AllFinite(x)) {
    return CovarianceNotInvertibleError("solution is not finite");
  }
  return x;
}

Vec Eigenvalues(const SymMat& a) {
  Vec ev = JacobiDiagonal(a);
  std::sort(ev.begin(), ev.end());
  return ev;
}

SpectrumReport Spectrum(const SymMat& a) {
  SpectrumReport report;
  if (a.empty()) return report;
  const Vec ev = Eigenvalues(a);
  report.min_eigenvalue = ev.front();
  report.max_eigenvalue = ev.back();
  report.is_positive_definite = report.min_eigenvalue > 0.0;
  return report;
}

absl::StatusOr<Vec> SoftThreshold(std::span<const double> u, double lambda) {
  if (!(lambda >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("soft-threshold level must be >= 0, got %g", lambda));
  }
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = Sgn(u[i]) * std::max(std::abs(u[i]) - lambda, 0.0);
  }
  return out;
}

absl::StatusOr<Vec> HardTruncate(std::span<const double> v,
                                 std::size_t k_keep) {
  if (k_keep > v.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cannot keep %d entries of a %d-vector", k_keep, v.size()));
  }
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + k_keep, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double fa = std::abs(v[a]);
                      const double fb = std::abs(v[b]);
                      return fa > fb || (fa == fb && a < b);
                    });
  Vec out(v.size(), 0.0);
  for (std::size_t i = 0; i < k_keep; ++i) out[order[i]] = v[order[i]];
  return out;
}

Vec ProjectL2Ball(std::span<const double> v, double radius) {
  assert(radius > 0.0);
  Vec out(v.begin(), v.end());
  const double norm = NormL2(v);
  // The slack absorbs the rounding of a previous projection, so projecting
  // twice returns the same vector.
  if (norm > radius * (1.0 + kProjectionSlack)) {
    const double scale = radius / norm;
    for (double& x : out) x *= scale;
  }
  return out;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double NormL1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double NormL2(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

double NormLInf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::size_t CountNonZero(std::span<const double> v) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; }));
}

Vec Subtract(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace ldpsr
