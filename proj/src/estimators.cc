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
#include <limits>
#include <utility>

#include "absl/strings/str_format.h"
#include "json.hpp"

namespace ldpsr {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

absl::StatusOr<Vec> SolveAndThreshold(const SymMat& cov, const Vec& xy,
                                      double lambda, double pivot_floor) {
  absl::StatusOr<Vec> ols = SolveSpd(cov, xy, pivot_floor);
  if (!ols.ok()) return ols.status();
  return SoftThreshold(*ols, lambda);
}

}  // namespace

double HeavyTailedTau2(std::size_t n, std::size_t d, double p) {
  const double log_d = std::log(std::max<double>(static_cast<double>(d), 2.0));
  return std::pow(static_cast<double>(n) / log_d, 1.0 / (2.0 * p));
}

absl::StatusOr<double> ResolveLambda(const LambdaRule& rule, std::size_t n,
                                     std::size_t d, std::size_t k,
                                     const PrivacyBudget& budget) {
  if (rule.kind == LambdaRuleKind::kExplicit) {
    if (!(rule.explicit_value >= 0.0)) {
      return absl::InvalidArgumentError("explicit lambda must be >= 0");
    }
    return rule.explicit_value;
  }
  if (!(rule.c_lambda >= 0.0)) {
    return absl::InvalidArgumentError("c_lambda must be >= 0");
  }
  if (n < 2 || d == 0) {
    return absl::InvalidArgumentError("lambda rules need n >= 2 and d >= 1");
  }
  if (absl::Status s = budget.Validate(); !s.ok()) return s;
  if (budget.is_noiseless()) return 0.0;
  if (!(budget.delta > 0.0)) {
    return absl::InvalidArgumentError("lambda rules need delta > 0");
  }
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double log_n = std::log(nn);
  const double log_d = std::log(std::max(dd, 2.0));
  const double log_delta = std::log(1.0 / budget.delta);
  const double eps = budget.epsilon;
  switch (rule.kind) {
    case LambdaRuleKind::kSubGaussian:
      return rule.c_lambda * dd * log_n * std::sqrt(log_delta) /
             (std::sqrt(nn) * eps);
    case LambdaRuleKind::kHeavyTailed: {
      const double p = rule.moment_p;
      if (!(p > 1.0)) {
        return absl::InvalidArgumentError("heavy-tailed rule needs p > 1");
      }
      return rule.c_lambda * dd * log_n * std::sqrt(log_delta) *
             std::pow(log_d / (nn * eps * eps), (p - 1.0) / (2.0 * p));
    }
    case LambdaRuleKind::kPublic:
      if (k == 0) {
        return absl::InvalidArgumentError("public rule needs k >= 1");
      }
      return rule.c_lambda * log_n *
             std::sqrt(dd * static_cast<double>(k) * log_d * log_delta) /
             (eps * std::sqrt(nn));
    case LambdaRuleKind::kExplicit:
      break;
  }
  return absl::InternalError("unhandled lambda rule");
}

absl::StatusOr<Vec> OlsSoftThreshold(const Dataset& data, double lambda,
                                     double pivot_floor) {
  if (data.n() == 0) return absl::InvalidArgumentError("empty dataset");
  const std::size_t d = data.d();
  SymMat cov(d);
  Vec xy(d, 0.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto x = data.x(i);
    cov.AddOuter(x);
    for (std::size_t j = 0; j < d; ++j) xy[j] += x[j] * data.y(i);
  }
  const double inv_n = 1.0 / static_cast<double>(data.n());
  cov *= inv_n;
  for (double& v : xy) v *= inv_n;
  return SolveAndThreshold(cov, xy, lambda, pivot_floor);
}

StatAggregator::StatAggregator(std::size_t d, bool cross_moment_only)
    : dim_(d),
      cross_moment_only_(cross_moment_only),
      sum_xx_(cross_moment_only ? 0 : d),
      sum_xy_(d, 0.0) {}

absl::Status StatAggregator::Add(const PerturbedMessage& msg) {
  const MessageKind want =
      cross_moment_only_ ? MessageKind::kCrossMoment : MessageKind::kStatPair;
  if (msg.kind != want) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "user %d: unexpected message kind %d", msg.user_id,
        static_cast<int>(msg.kind)));
  }
  if (msg.dim() != dim_) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "user %d: message dimension %d, expected %d", msg.user_id, msg.dim(),
        dim_));
  }
  if (!cross_moment_only_) sum_xx_ += msg.noisy_xxT;
  for (std::size_t j = 0; j < dim_; ++j) sum_xy_[j] += msg.noisy_xy[j];
  ++count_;
  return absl::OkStatus();
}

SymMat StatAggregator::MeanXX() const {
  SymMat m = sum_xx_;
  m *= 1.0 / static_cast<double>(count_);
  return m;
}

Vec StatAggregator::MeanXY() const {
  Vec v = sum_xy_;
  for (double& c : v) c *= 1.0 / static_cast<double>(count_);
  return v;
}

absl::StatusOr<Vec> NldpFinish(const StatAggregator& agg, double lambda,
                               double pivot_floor) {
  if (agg.count() == 0) return absl::InvalidArgumentError("no messages");
  return SolveAndThreshold(agg.MeanXX(), agg.MeanXY(), lambda, pivot_floor);
}

absl::StatusOr<Vec> NldpEstimate(std::span<const PerturbedMessage> messages,
                                 const NldpConfig& config, std::size_t n) {
  if (messages.empty()) return absl::InvalidArgumentError("no messages");
  if (messages.size() != n) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "expected %d messages, got %d", n, messages.size()));
  }
  const std::size_t d = messages.front().dim();
  absl::StatusOr<double> lambda =
      ResolveLambda(config.lambda_rule, n, d, config.k, config.budget);
  if (!lambda.ok()) return lambda.status();
  StatAggregator agg(d);
  for (const PerturbedMessage& m : messages) {
    if (absl::Status s = agg.Add(m); !s.ok()) return s;
  }
  return NldpFinish(agg, *lambda, config.pivot_floor);
}

namespace {

absl::StatusOr<SymMat> PublicCovariance(const Dataset& public_x,
                                        std::size_t d) {
  if (public_x.d() != d) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "public covariates have dimension %d, expected %d", public_x.d(), d));
  }
  if (public_x.n() < d) {
    return CovarianceNotInvertibleError(absl::StrFormat(
        "public sample of %d rows cannot span dimension %d", public_x.n(), d));
  }
  SymMat cov(d);
  for (std::size_t i = 0; i < public_x.n(); ++i) cov.AddOuter(public_x.x(i));
  cov *= 1.0 / static_cast<double>(public_x.n());
  return cov;
}

}  // namespace

absl::StatusOr<Vec> NldpPublicEstimate(
    std::span<const PerturbedMessage> messages, const Dataset& public_x,
    const NldpConfig& config) {
  if (messages.empty()) return absl::InvalidArgumentError("no messages");
  const std::size_t d = messages.front().dim();
  absl::StatusOr<SymMat> cov = PublicCovariance(public_x, d);
  if (!cov.ok()) return cov.status();
  absl::StatusOr<double> lambda = ResolveLambda(
      config.lambda_rule, messages.size(), d, config.k, config.budget);
  if (!lambda.ok()) return lambda.status();
  StatAggregator agg(d, /*cross_moment_only=*/true);
  for (const PerturbedMessage& m : messages) {
    if (absl::Status s = agg.Add(m); !s.ok()) return s;
  }
  return SolveAndThreshold(*cov, agg.MeanXY(), *lambda, config.pivot_floor);
}

absl::StatusOr<NldpRun> RunNldp(const Dataset& data, const NldpConfig& config,
                                uint64_t run_seed, Transcript* transcript) {
  absl::StatusOr<double> lambda = ResolveLambda(
      config.lambda_rule, data.n(), data.d(), config.k, config.budget);
  if (!lambda.ok()) return lambda.status();
  StatAggregator agg(data.d());
  PerturbFn perturb = [&config](const UserView& u) {
    return PerturbStats(u.x, u.y, config.clip, config.budget, u.user_id,
                        u.key);
  };
  MessageObserver observe = [&agg](const PerturbedMessage& m) {
    return agg.Add(m);
  };
  absl::StatusOr<Transcript> t = RunNonInteractive(
      data, perturb, run_seed, ProtocolOptions{.retain_payloads = false, .shuffle_seed = std::nullopt}, observe);
  if (!t.ok()) return t.status();
  if (transcript != nullptr) *transcript = *std::move(t);
  absl::StatusOr<Vec> theta = NldpFinish(agg, *lambda, config.pivot_floor);
  if (!theta.ok()) return theta.status();
  return NldpRun{*std::move(theta), *lambda};
}

absl::StatusOr<NldpRun> RunNldpPublic(const Dataset& data,
                                      const Dataset& public_x,
                                      const NldpConfig& config,
                                      uint64_t run_seed,
                                      Transcript* transcript) {
  absl::StatusOr<SymMat> cov = PublicCovariance(public_x, data.d());
  if (!cov.ok()) return cov.status();
  absl::StatusOr<double> lambda = ResolveLambda(
      config.lambda_rule, data.n(), data.d(), config.k, config.budget);
  if (!lambda.ok()) return lambda.status();
  StatAggregator agg(data.d(), /*cross_moment_only=*/true);
  PerturbFn perturb = [&config](const UserView& u) {
    return PerturbCrossMoment(u.x, u.y, config.clip, config.budget, u.user_id,
                              u.key);
  };
  MessageObserver observe = [&agg](const PerturbedMessage& m) {
    return agg.Add(m);
  };
  absl::StatusOr<Transcript> t = RunNonInteractive(
      data, perturb, run_seed, ProtocolOptions{.retain_payloads = false, .shuffle_seed = std::nullopt}, observe);
  if (!t.ok()) return t.status();
  if (transcript != nullptr) *transcript = *std::move(t);
  absl::StatusOr<Vec> theta =
      SolveAndThreshold(*cov, agg.MeanXY(), *lambda, config.pivot_floor);
  if (!theta.ok()) return theta.status();
  return NldpRun{*std::move(theta), *lambda};
}

double IhtConfig::GradientRadius(std::size_t d) const {
  const double lead = mode == IhtMode::kGeneral ? 2.0 : 1.0;
  return std::sqrt(static_cast<double>(d)) * clip.tau1 *
         (lead * std::sqrt(static_cast<double>(k_prime)) * clip.tau1 +
          clip.tau2);
}

namespace {

std::size_t DefaultRounds(std::size_t n) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(std::log(static_cast<double>(std::max<std::size_t>(n, 1))))));
}

}  // namespace

IhtConfig IhtConfig::Isotropic(std::size_t n, std::size_t d, std::size_t k,
                               double epsilon, const ClipConfig& clip) {
  IhtConfig c;
  c.T = DefaultRounds(n);
  c.eta = 1.0;
  c.k_prime = std::min(8 * k, d);
  c.epsilon = epsilon;
  c.clip = clip;
  c.ball_radius = 1.0;
  c.mode = IhtMode::kIsotropic;
  c.gamma = 1.0;
  c.mu = 1.0;
  return c;
}

absl::StatusOr<IhtConfig> IhtConfig::General(std::size_t n, std::size_t d,
                                             std::size_t k, double epsilon,
                                             const ClipConfig& clip,
                                             const SymMat& covariance) {
  if (covariance.dim() != d) {
    return absl::InvalidArgumentError("covariance dimension mismatch");
  }
  const SpectrumReport spec = Spectrum(covariance);
  if (!spec.is_positive_definite) {
    return CovarianceNotInvertibleError(
        "general-mode IHT needs a positive definite covariance");
  }
  IhtConfig c;
  c.T = DefaultRounds(n);
  c.gamma = spec.max_eigenvalue;
  c.mu = spec.min_eigenvalue;
  c.eta = 2.0 / (3.0 * c.gamma);
  const double ratio = c.gamma / c.mu;
  const double kp = std::ceil(72.0 * ratio * ratio * static_cast<double>(k));
  c.k_prime = kp >= static_cast<double>(d) ? d : static_cast<std::size_t>(kp);
  c.epsilon = epsilon;
  c.clip = clip;
  c.ball_radius = 2.0;
  c.mode = IhtMode::kGeneral;
  return c;
}

absl::Status IhtConfig::Validate(std::size_t n, std::size_t d) const {
  if (T == 0 || T > n) {
    return absl::InvalidArgumentError(
        absl::StrFormat("need 1 <= T <= n, got T = %d, n = %d", T, n));
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    return absl::InvalidArgumentError("eta must be finite and > 0");
  }
  if (k_prime == 0 || k_prime > d) {
    return absl::InvalidArgumentError(
        absl::StrFormat("need 1 <= k' <= d, got k' = %d", k_prime));
  }
  if (!(epsilon > 0.0)) {
    return absl::InvalidArgumentError("epsilon must be > 0");
  }
  if (absl::Status s = clip.Validate(); !s.ok()) return s;
  if (!(ball_radius > 0.0)) {
    return absl::InvalidArgumentError("ball radius must be > 0");
  }
  if (epsilon != kInfinity && !std::isfinite(GradientRadius(d))) {
    return absl::InvalidArgumentError(
        "private IHT needs finite clip thresholds");
  }
  return absl::OkStatus();
}

bool WarmStartAdmissible(std::span<const double> theta0,
                         std::span<const double> theta_star, double gamma,
                         double mu) {
  if (theta0.size() != theta_star.size() || !(gamma > 0.0)) return false;
  return NormL2(Subtract(theta0, theta_star)) <= 0.5 * mu / gamma;
}

absl::StatusOr<IhtResult> LdpIht(
    const Dataset& data, const IhtConfig& config, uint64_t run_seed,
    std::optional<Vec> warm_start,
    std::optional<std::span<const double>> theta_star,
    const ProtocolOptions& options) {
  const std::size_t d = data.d();
  if (absl::Status s = config.Validate(data.n(), d); !s.ok()) return s;
  if (theta_star.has_value() && theta_star->size() != d) {
    return absl::InvalidArgumentError("theta* dimension mismatch");
  }
  Vec theta0(d, 0.0);
  if (warm_start.has_value()) {
    if (warm_start->size() != d || !AllFinite(*warm_start)) {
      return absl::InvalidArgumentError("malformed warm start");
    }
    if (NormL2(*warm_start) > config.ball_radius * (1.0 + 1e-12)) {
      return absl::InvalidArgumentError("warm start lies outside the ball");
    }
    theta0 = *std::move(warm_start);
  }

  const double r_grad = config.GradientRadius(d);
  std::optional<SphereRandomizer> randomizer;
  if (config.epsilon != kInfinity) {
    absl::StatusOr<SphereRandomizer> rz =
        SphereRandomizer::Create(d, r_grad, config.epsilon);
    if (!rz.ok()) return rz.status();
    randomizer = *std::move(rz);
  }

  IhtResult result;
  // Per-user gradient norms feed the sensitivity audit. Users run one at a
  // time here, so a plain max is enough.
  double max_grad = 0.0;
  PerturbFn perturb = [&](const UserView& u) -> absl::StatusOr<PerturbedMessage> {
    if (!u.broadcast.has_value()) {
      return absl::FailedPreconditionError("gradient user without broadcast");
    }
    const Vec x_t = ShrinkCoordinates(u.x, config.clip.tau1);
    const double y_t = ClipResponse(u.y, config.clip.tau2);
    const double resid = Dot(*u.broadcast, x_t) - y_t;
    Vec grad(d);
    for (std::size_t j = 0; j < d; ++j) grad[j] = x_t[j] * resid;
    const double g = NormL2(grad);
    max_grad = std::max(max_grad, g);
    if (std::isfinite(r_grad) && g > r_grad * (1.0 + 1e-9)) {
      return absl::InternalError(absl::StrFormat(
          "gradient norm %.17g exceeds the sensitivity bound %.17g", g,
          r_grad));
    }
    PerturbedMessage msg;
    msg.kind = MessageKind::kRandomizedGradient;
    msg.user_id = u.user_id;
    if (randomizer.has_value()) {
      Philox4x32 gen(u.key);
      absl::StatusOr<Vec> z = randomizer->Randomize(grad, gen);
      if (!z.ok()) return z.status();
      msg.grad = *std::move(z);
    } else {
      msg.grad = std::move(grad);
    }
    return msg;
  };

  ServerStep step = [&](std::size_t round,
                        std::span<const PerturbedMessage> msgs)
      -> absl::StatusOr<Vec> {
    Vec mean(d, 0.0);
    for (const PerturbedMessage& m : msgs) {
      for (std::size_t j = 0; j < d; ++j) mean[j] += m.grad[j];
    }
    const Vec& theta = result.trace.empty() ? theta0 : result.theta;
    Vec next(d);
    const double scale = config.eta / static_cast<double>(msgs.size());
    for (std::size_t j = 0; j < d; ++j) next[j] = theta[j] - scale * mean[j];
    absl::StatusOr<Vec> trunc = HardTruncate(next, config.k_prime);
    if (!trunc.ok()) return trunc.status();
    Vec projected = ProjectL2Ball(*trunc, config.ball_radius);
    IhtRoundTrace tr;
    tr.round = round;
    tr.nonzeros = CountNonZero(projected);
    tr.norm = NormL2(projected);
    tr.error = theta_star.has_value()
                   ? NormL2(Subtract(projected, *theta_star))
                   : kNaN;
    result.trace.push_back(tr);
    result.theta = projected;
    return projected;
  };

  absl::StatusOr<SequentialResult> run =
      RunSequential(data, config.T, theta0, step, perturb, run_seed, options);
  if (!run.ok()) return run.status();
  result.theta = std::move(run->final_iterate);
  result.transcript = std::move(run->transcript);
  result.max_gradient_norm = max_grad;
  result.iterations = result.trace.size();
  return result;
}

const char* EstimatorFailureName(EstimatorFailure failure) {
  switch (failure) {
    case EstimatorFailure::kCovNotInvertible:
      return "cov_not_invertible";
  }
  return "unknown";
}

absl::StatusOr<EstimateReport> Evaluate(std::span<const double> theta_hat,
                                        std::span<const double> theta_star,
                                        double support_threshold) {
  if (theta_hat.size() != theta_star.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "dimension mismatch: %d vs %d", theta_hat.size(), theta_star.size()));
  }
  EstimateReport r;
  r.theta_hat.assign(theta_hat.begin(), theta_hat.end());
  const Vec diff = Subtract(theta_hat, theta_star);
  r.l2_err = NormL2(diff);
  r.linf_err = NormLInf(diff);
  r.l1_err = NormL1(diff);
  std::size_t selected = 0, true_support = 0, hits = 0;
  for (std::size_t i = 0; i < theta_hat.size(); ++i) {
    const bool sel = std::abs(theta_hat[i]) > support_threshold;
    const bool truth = theta_star[i] != 0.0;
    selected += sel;
    true_support += truth;
    hits += sel && truth;
  }
  r.support_precision =
      selected == 0 ? 1.0 : static_cast<double>(hits) / selected;
  r.support_recall =
      true_support == 0 ? 1.0 : static_cast<double>(hits) / true_support;
  return r;
}

EstimateReport FailureReport(EstimatorFailure failure) {
  EstimateReport r;
  r.l2_err = r.linf_err = r.l1_err = kNaN;
  r.support_precision = r.support_recall = kNaN;
  r.failure = failure;
  return r;
}

std::string EstimateReportToJson(const EstimateReport& report) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  nlohmann::json j;
  j["theta_hat"] = report.theta_hat;
  j["l2_err"] = num(report.l2_err);
  j["linf_err"] = num(report.linf_err);
  j["l1_err"] = num(report.l1_err);
  j["support_precision"] = num(report.support_precision);
  j["support_recall"] = num(report.support_recall);
  j["iterations_run"] = report.iterations_run;
  if (report.failure.has_value()) {
    j["failure"] = EstimatorFailureName(*report.failure);
  } else {
    j["failure"] = nullptr;
  }
  return j.dump(2);
}

}  // namespace ldpsr
