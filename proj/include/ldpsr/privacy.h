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

// User-side randomization: clipping, the Gaussian mechanism on sufficient
// statistics, and the epsilon-LDP unit-sphere randomizer for bounded vectors.
//
// Every mechanism accepts epsilon = +infinity as a sentinel that keeps all
// clipping but adds no noise. It exists for oracle-equivalence tests only.

#ifndef LDPSR_PRIVACY_H_
#define LDPSR_PRIVACY_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ldpsr/linalg.h"
#include "ldpsr/rng.h"

namespace ldpsr {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class BudgetSplit {
  // Two releases, each (epsilon/2, delta/2)-DP.
  kHalfHalf,
  // A single release using the whole (epsilon, delta).
  kFull,
};

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;
  BudgetSplit split = BudgetSplit::kHalfHalf;

  bool is_noiseless() const { return epsilon == kInfinity; }
  // epsilon > 0 and delta in [0, 1).
  absl::Status Validate() const;
};

struct ClipConfig {
  double tau1 = 1.0;  // per-coordinate shrink of x
  double tau2 = 1.0;  // response clip
  double r = 1.0;     // l2 clip radius of x

  // tau1 = tau2 = sigma sqrt(2 log(2 n d)), r = 4 sigma sqrt(d log n).
  static ClipConfig Defaults(double sigma, std::size_t n, std::size_t d);
  // All thresholds infinite: every clip is the identity.
  static ClipConfig Disabled() { return {kInfinity, kInfinity, kInfinity}; }

  absl::Status Validate() const;
};

enum class MessageKind : uint8_t {
  // Noisy x x^T and noisy x y (two-release non-interactive protocol).
  kStatPair = 1,
  // One randomized gradient (sequentially interactive protocol).
  kRandomizedGradient = 2,
  // Noisy x y only (public-covariance protocol, no matrix release).
  kCrossMoment = 3,
};

// One user's release. Exactly the payload fields belonging to `kind` are
// populated; the rest stay empty.
struct PerturbedMessage {
  MessageKind kind = MessageKind::kStatPair;
  uint64_t user_id = 0;
  SymMat noisy_xxT;  // kStatPair
  Vec noisy_xy;      // kStatPair, kCrossMoment
  Vec grad;          // kRandomizedGradient

  // Checks the payload/kind correspondence and finiteness.
  absl::Status Validate() const;
  std::size_t dim() const;
  // Drops the payload but keeps kind and user id (for audit-only records).
  void ClearPayload();

  friend bool operator==(const PerturbedMessage&,
                         const PerturbedMessage&) = default;
};

Vec ShrinkCoordinates(std::span<const double> x, double tau1);
Vec ClipL2(std::span<const double> x, double r);
double ClipResponse(double y, double tau2);

// Standard deviation of each upper-triangular entry added to x x^T.
// kHalfHalf: variance 32 r^4 log(2.5/delta) / eps^2.
// kFull:     variance  8 r^4 log(1.25/delta) / eps^2.
double MatrixNoiseStddev(double r, const PrivacyBudget& budget);

// Standard deviation of each coordinate added to x~ y~.
// kHalfHalf: variance 32 d tau1^2 tau2^2 log(2.5/delta) / eps^2.
// kFull:     variance  2 d tau1^2 tau2^2 log(1.25/delta) / eps^2.
double VectorNoiseStddev(std::size_t d, double tau1, double tau2,
                         const PrivacyBudget& budget);

// Non-interactive release of (clip_r(x) clip_r(x)^T + N1,
// shrink(x) clip(y) + n2). N1 is symmetric with i.i.d. upper triangle.
// The budget must use kHalfHalf, and delta must be > 0 unless epsilon is
// infinite.
absl::StatusOr<PerturbedMessage> PerturbStats(std::span<const double> x,
                                              double y, const ClipConfig& clip,
                                              const PrivacyBudget& budget,
                                              uint64_t user_id,
                                              StreamKey key);

// Release of shrink(x) clip(y) + n2 alone, using the whole budget
// (kFull). Used when the server estimates the covariance from public data.
absl::StatusOr<PerturbedMessage> PerturbCrossMoment(
    std::span<const double> x, double y, const ClipConfig& clip,
    const PrivacyBudget& budget, uint64_t user_id, StreamKey key);

// E[<u, e_1> | <u, e_1> > 0] for u uniform on the unit sphere in R^d:
// Gamma(d/2) / (sqrt(pi) Gamma((d+1)/2)).
double HemisphereMeanProjection(std::size_t d);

// epsilon-LDP randomizer for vectors with ||v||_2 <= r.
//
// 1. b ~ Ber(1/2 + ||v||/(2r)) on {-1,+1}; x~ = b r v / ||v||. For v = 0, x~
//    is r times a uniform unit vector.
// 2. s ~ Ber(e^eps / (e^eps + 1)).
// 3. u uniform on the unit sphere, restricted to <u, x~> > 0 when s = 1 and
//    <u, x~> <= 0 when s = 0.
// 4. Output C u with C = r (e^eps + 1) / ((e^eps - 1) m_d), where m_d is
//    HemisphereMeanProjection(d). This makes E[output] = v.
class SphereRandomizer {
 public:
  // r > 0, epsilon > 0 (kInfinity disables randomization).
  static absl::StatusOr<SphereRandomizer> Create(std::size_t dim, double r,
                                                 double epsilon);

  std::size_t dim() const { return dim_; }
  double radius() const { return r_; }
  double epsilon() const { return epsilon_; }
  // Output norm; every non-sentinel release has exactly this length.
  double scale() const { return scale_; }
  // P(s = 1) = e^eps / (e^eps + 1).
  double agree_probability() const { return agree_prob_; }

  // Fails with OutOfRange when ||v||_2 > r (1 + 1e-9).
  absl::StatusOr<Vec> Randomize(std::span<const double> v,
                                Philox4x32& gen) const;

 private:
  SphereRandomizer(std::size_t dim, double r, double epsilon);

  std::size_t dim_;
  double r_;
  double epsilon_;
  double agree_prob_;
  double scale_;
};

}  // namespace ldpsr

#endif  // LDPSR_PRIVACY_H_
