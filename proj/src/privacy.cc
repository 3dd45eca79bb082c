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

#include "ldpsr/privacy.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "absl/strings/str_format.h"

namespace ldpsr {
namespace {

bool Positive(double v) { return v > 0.0; }  // false for NaN

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

absl::Status PrivacyBudget::Validate() const {
  if (!Positive(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be > 0, got %g", epsilon));
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in [0, 1), got %g", delta));
  }
  return absl::OkStatus();
}

ClipConfig ClipConfig::Defaults(double sigma, std::size_t n, std::size_t d) {
  const double nd = static_cast<double>(n) * static_cast<double>(d);
  const double tau = sigma * std::sqrt(2.0 * std::log(2.0 * nd));
  const double r = 4.0 * sigma *
                   std::sqrt(static_cast<double>(d) *
                             std::log(static_cast<double>(std::max<std::size_t>(n, 2))));
  return {tau, tau, r};
}

absl::Status ClipConfig::Validate() const {
  if (!Positive(tau1) || !Positive(tau2) || !Positive(r)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "clip thresholds must be > 0 (tau1=%g tau2=%g r=%g)", tau1, tau2, r));
  }
  return absl::OkStatus();
}

absl::Status PerturbedMessage::Validate() const {
  switch (kind) {
    case MessageKind::kStatPair:
      if (noisy_xxT.empty() || noisy_xy.size() != noisy_xxT.dim() ||
          !grad.empty()) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "user %d: stat_pair message has a malformed payload", user_id));
      }
      if (!AllFinite(noisy_xxT.data()) || !AllFinite(noisy_xy)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("user %d: non-finite payload", user_id));
      }
      return absl::OkStatus();
    case MessageKind::kCrossMoment:
      if (!noisy_xxT.empty() || noisy_xy.empty() || !grad.empty()) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "user %d: cross_moment message has a malformed payload", user_id));
      }
      if (!AllFinite(noisy_xy)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("user %d: non-finite payload", user_id));
      }
      return absl::OkStatus();
    case MessageKind::kRandomizedGradient:
      if (!noisy_xxT.empty() || !noisy_xy.empty() || grad.empty()) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "user %d: gradient message has a malformed payload", user_id));
      }
      if (!AllFinite(grad)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("user %d: non-finite payload", user_id));
      }
      return absl::OkStatus();
  }
  return absl::InvalidArgumentError(
      absl::StrFormat("user %d: unknown message kind %d", user_id,
                      static_cast<int>(kind)));
}

std::size_t PerturbedMessage::dim() const {
  switch (kind) {
    case MessageKind::kStatPair:
      return noisy_xxT.dim();
    case MessageKind::kCrossMoment:
      return noisy_xy.size();
    case MessageKind::kRandomizedGradient:
      return grad.size();
  }
  return 0;
}

void PerturbedMessage::ClearPayload() {
  noisy_xxT = SymMat();
  noisy_xy.clear();
  noisy_xy.shrink_to_fit();
  grad.clear();
  grad.shrink_to_fit();
}

Vec ShrinkCoordinates(std::span<const double> x, double tau1) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = Sign(x[i]) * std::min(std::abs(x[i]), tau1);
  }
  return out;
}

Vec ClipL2(std::span<const double> x, double r) { return ProjectL2Ball(x, r); }

double ClipResponse(double y, double tau2) {
  return Sign(y) * std::min(std::abs(y), tau2);
}

double MatrixNoiseStddev(double r, const PrivacyBudget& budget) {
  if (budget.is_noiseless()) return 0.0;
  const double r2 = r * r;
  if (budget.split == BudgetSplit::kHalfHalf) {
    return std::sqrt(32.0 * std::log(2.5 / budget.delta)) * r2 /
           budget.epsilon;
  }
  return std::sqrt(8.0 * std::log(1.25 / budget.delta)) * r2 / budget.epsilon;
}

double VectorNoiseStddev(std::size_t d, double tau1, double tau2,
                         const PrivacyBudget& budget) {
  if (budget.is_noiseless()) return 0.0;
  const double dd = static_cast<double>(d);
  if (budget.split == BudgetSplit::kHalfHalf) {
    return std::sqrt(32.0 * dd * std::log(2.5 / budget.delta)) * tau1 * tau2 /
           budget.epsilon;
  }
  return std::sqrt(2.0 * dd * std::log(1.25 / budget.delta)) * tau1 * tau2 /
         budget.epsilon;
}

namespace {

absl::Status CheckGaussianInputs(std::span<const double> x, double y,
                                 const ClipConfig& clip,
                                 const PrivacyBudget& budget) {
  if (absl::Status s = budget.Validate(); !s.ok()) return s;
  if (absl::Status s = clip.Validate(); !s.ok()) return s;
  if (!budget.is_noiseless() && budget.delta <= 0.0) {
    return absl::UnimplementedError(
        "the Gaussian mechanism needs delta > 0 for finite epsilon");
  }
  if (x.empty()) return absl::InvalidArgumentError("empty covariate vector");
  if (!AllFinite(x) || !std::isfinite(y)) {
    return absl::InvalidArgumentError("non-finite user datum");
  }
  return absl::OkStatus();
}

absl::Status CheckFiniteNoise(double stddev) {
  if (!std::isfinite(stddev)) {
    return absl::InvalidArgumentError(
        "infinite clip thresholds require the noiseless sentinel");
  }
  return absl::OkStatus();
}

Vec NoisyCrossMoment(std::span<const double> x, double y,
                     const ClipConfig& clip, double stddev,
                     Philox4x32& gen) {
  Vec xy = ShrinkCoordinates(x, clip.tau1);
  const double y_clip = ClipResponse(y, clip.tau2);
  for (double& v : xy) v *= y_clip;
  if (stddev > 0.0) {
    std::normal_distribution<double> normal(0.0, stddev);
    for (double& v : xy) v += normal(gen);
  }
  return xy;
}

}  // namespace

absl::StatusOr<PerturbedMessage> PerturbStats(std::span<const double> x,
                                              double y, const ClipConfig& clip,
                                              const PrivacyBudget& budget,
                                              uint64_t user_id,
                                              StreamKey key) {
  if (absl::Status s = CheckGaussianInputs(x, y, clip, budget); !s.ok()) {
    return s;
  }
  if (budget.split != BudgetSplit::kHalfHalf) {
    return absl::InvalidArgumentError(
        "the two-release mechanism requires a half/half budget split");
  }
  const std::size_t d = x.size();
  const double m_std = MatrixNoiseStddev(clip.r, budget);
  const double v_std = VectorNoiseStddev(d, clip.tau1, clip.tau2, budget);
  if (absl::Status s = CheckFiniteNoise(m_std); !s.ok()) return s;
  if (absl::Status s = CheckFiniteNoise(v_std); !s.ok()) return s;

  Philox4x32 gen(key);
  PerturbedMessage msg;
  msg.kind = MessageKind::kStatPair;
  msg.user_id = user_id;
  msg.noisy_xxT = SymMat(d);
  const Vec x_bar = ClipL2(x, clip.r);
  msg.noisy_xxT.AddOuter(x_bar);
  if (m_std > 0.0) {
    std::normal_distribution<double> normal(0.0, m_std);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) msg.noisy_xxT.Add(i, j, normal(gen));
    }
  }
  msg.noisy_xy = NoisyCrossMoment(x, y, clip, v_std, gen);
  return msg;
}

absl::StatusOr<PerturbedMessage> PerturbCrossMoment(
    std::span<const double> x, double y, const ClipConfig& clip,
    const PrivacyBudget& budget, uint64_t user_id, StreamKey key) {
  if (absl::Status s = CheckGaussianInputs(x, y, clip, budget); !s.ok()) {
    return s;
  }
  PrivacyBudget full = budget;
  full.split = BudgetSplit::kFull;
  const double v_std = VectorNoiseStddev(x.size(), clip.tau1, clip.tau2, full);
  if (absl::Status s = CheckFiniteNoise(v_std); !s.ok()) return s;

  Philox4x32 gen(key);
  PerturbedMessage msg;
  msg.kind = MessageKind::kCrossMoment;
  msg.user_id = user_id;
  msg.noisy_xy = NoisyCrossMoment(x, y, clip, v_std, gen);
  return msg;
}

double HemisphereMeanProjection(std::size_t d) {
  const double h = static_cast<double>(d);
  return std::exp(std::lgamma(h / 2.0) - std::lgamma((h + 1.0) / 2.0)) /
         std::sqrt(std::numbers::pi);
}

SphereRandomizer::SphereRandomizer(std::size_t dim, double r, double epsilon)
    : dim_(dim), r_(r), epsilon_(epsilon) {
  if (epsilon == kInfinity) {
    agree_prob_ = 1.0;
    scale_ = r / HemisphereMeanProjection(dim);
  } else {
    agree_prob_ = 1.0 / (1.0 + std::exp(-epsilon));
    // (e^eps + 1) / (e^eps - 1) = 1 / tanh(eps / 2).
    scale_ = r / std::tanh(epsilon / 2.0) / HemisphereMeanProjection(dim);
  }
}

absl::StatusOr<SphereRandomizer> SphereRandomizer::Create(std::size_t dim,
                                                          double r,
                                                          double epsilon) {
  if (dim == 0) return absl::InvalidArgumentError("dimension must be >= 1");
  if (!Positive(r) || !std::isfinite(r)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("radius must be finite and > 0, got %g", r));
  }
  if (!Positive(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be > 0, got %g", epsilon));
  }
  return SphereRandomizer(dim, r, epsilon);
}

absl::StatusOr<Vec> SphereRandomizer::Randomize(std::span<const double> v,
                                                Philox4x32& gen) const {
  if (v.size() != dim_) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "randomizer expects dimension %d, got %d", dim_, v.size()));
  }
  const double norm = NormL2(v);
  if (!(norm <= r_ * (1.0 + 1e-9))) {
    return absl::OutOfRangeError(absl::StrFormat(
        "sensitivity violation: ||v|| = %.17g exceeds r = %.17g", norm, r_));
  }
  if (epsilon_ == kInfinity) return Vec(v.begin(), v.end());

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_direction = [&] {
    Vec g(dim_);
    double n2 = 0.0;
    do {
      for (double& c : g) c = normal(gen);
      n2 = Dot(g, g);
    } while (n2 == 0.0);
    const double inv = 1.0 / std::sqrt(n2);
    for (double& c : g) c *= inv;
    return g;
  };

  // Only the direction of x~ matters below; its length r is implied.
  Vec dir;
  if (norm == 0.0) {
    dir = random_direction();
  } else {
    const double p_plus = std::min(1.0, 0.5 + norm / (2.0 * r_));
    const double b = unit(gen) < p_plus ? 1.0 : -1.0;
    dir.assign(v.begin(), v.end());
    for (double& c : dir) c *= b / norm;
  }

  const bool agree = unit(gen) < agree_prob_;
  Vec u;
  for (;;) {
    u = random_direction();
    double dot = Dot(u, dir);
    if (agree) {
      if (dot == 0.0) continue;
      if (dot < 0.0) {
        for (double& c : u) c = -c;
      }
    } else if (dot > 0.0) {
      for (double& c : u) c = -c;
    }
    break;
  }
  for (double& c : u) c *= scale_;
  return u;
}

}  // namespace ldpsr
