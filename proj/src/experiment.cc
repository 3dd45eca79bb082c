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

#include "ldpsr/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "json.hpp"
#include "ldpsr/estimators.h"
#include "ldpsr/privacy.h"
#include "ldpsr/rng.h"

namespace ldpsr {
namespace {

using Json = nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct TrialData {
  GroundTruth truth;
  Dataset data;
};

absl::StatusOr<TrialData> MakeTrialData(const ExperimentConfig& cfg,
                                        const GridPoint& p, uint64_t truth_seed,
                                        uint64_t data_seed) {
  const int k = static_cast<int>(p.k);
  const double kk = static_cast<double>(p.k);
  switch (cfg.data_family) {
    case DataFamily::kSubGaussian:
    case DataFamily::kHeavyTailed: {
      const bool heavy = cfg.data_family == DataFamily::kHeavyTailed;
      const NoiseSpec noise = heavy
                                  ? NoiseSpec::StudentT(cfg.noise_sigma, cfg.moment_p)
                                  : NoiseSpec::Gaussian(cfg.noise_sigma);
      absl::StatusOr<GroundTruth> truth =
          MakeGroundTruth(p.d, k, cfg.covariance, noise, truth_seed);
      if (!truth.ok()) return truth.status();
      absl::StatusOr<Dataset> data =
          heavy ? SampleHeavyTailed(*truth, p.n, data_seed)
                : SampleSubGaussian(*truth, p.n, data_seed);
      if (!data.ok()) return data.status();
      return TrialData{*std::move(truth), *std::move(data)};
    }
    case DataFamily::kHardNonInteractive:
    case DataFamily::kHardInteractive: {
      const bool inter = cfg.data_family == DataFamily::kHardInteractive;
      const double nu = cfg.nu > 0.0 ? cfg.nu
                        : inter      ? 1.0 / (4.0 * std::sqrt(2.0 * kk))
                                     : 1.0 / std::sqrt(kk);
      auto pair = inter ? SampleHardInteractive(p.d, k, nu, p.n, data_seed)
                        : SampleHardNonInteractive(p.d, k, nu, p.n, data_seed);
      if (!pair.ok()) return pair.status();
      return TrialData{std::move(pair->first.truth), std::move(pair->second)};
    }
  }
  return absl::InternalError("unhandled data family");
}

absl::StatusOr<Dataset> MakePublicSample(const ExperimentConfig& cfg,
                                         const GridPoint& p,
                                         const GroundTruth& truth,
                                         uint64_t seed) {
  const std::size_t m =
      cfg.public_m > 0 ? cfg.public_m : std::max<std::size_t>(p.n / 5, 1);
  if (cfg.data_family == DataFamily::kHardInteractive ||
      cfg.data_family == DataFamily::kHardNonInteractive) {
    return SampleHypercube(truth, m, seed, "public_hypercube");
  }
  return SampleCovariatesOnly(truth, m, seed);
}

ClipConfig ResolveClip(const ExperimentConfig& cfg, const GridPoint& p) {
  ClipConfig clip = ClipConfig::Defaults(cfg.clip_sigma, p.n, p.d);
  if (cfg.tau1) clip.tau1 = *cfg.tau1;
  if (cfg.tau2) clip.tau2 = *cfg.tau2;
  if (cfg.clip_r) clip.r = *cfg.clip_r;
  return clip;
}

void ApplyIhtOverrides(const ExperimentConfig& cfg, IhtConfig& ic) {
  if (cfg.iht_rounds) ic.T = *cfg.iht_rounds;
  if (cfg.iht_eta) ic.eta = *cfg.iht_eta;
  if (cfg.iht_k_prime) ic.k_prime = *cfg.iht_k_prime;
}

struct EstimateOutput {
  Vec theta;
  std::size_t iterations = 0;
};

// `transcript` receives the protocol transcript whenever the protocol ran,
// including runs whose server solve failed.
absl::StatusOr<EstimateOutput> Estimate(const ExperimentConfig& cfg,
                                        const GridPoint& p,
                                        const TrialData& td, double c_lambda,
                                        uint64_t mech_seed,
                                        uint64_t public_seed,
                                        Transcript* transcript) {
  ClipConfig clip = ResolveClip(cfg, p);
  const PrivacyBudget budget{p.epsilon, cfg.delta, BudgetSplit::kHalfHalf};
  NldpConfig nc;
  nc.clip = clip;
  nc.budget = budget;
  nc.k = p.k;
  switch (cfg.estimator) {
    case EstimatorKind::kOlsSt: {
      const double lambda =
          c_lambda * std::sqrt(std::log(std::max<double>(p.d, 2.0)) /
                               static_cast<double>(p.n));
      absl::StatusOr<Vec> theta = OlsSoftThreshold(td.data, lambda);
      if (!theta.ok()) return theta.status();
      return EstimateOutput{*std::move(theta), 1};
    }
    case EstimatorKind::kNldp:
    case EstimatorKind::kNldpHeavy: {
      if (cfg.estimator == EstimatorKind::kNldpHeavy) {
        if (!cfg.tau2) nc.clip.tau2 = HeavyTailedTau2(p.n, p.d, cfg.moment_p);
        nc.lambda_rule = LambdaRule::HeavyTailed(cfg.moment_p, c_lambda);
      } else {
        nc.lambda_rule = LambdaRule::SubGaussian(c_lambda);
      }
      absl::StatusOr<NldpRun> run = RunNldp(td.data, nc, mech_seed, transcript);
      if (!run.ok()) return run.status();
      return EstimateOutput{std::move(run->theta_hat), 1};
    }
    case EstimatorKind::kNldpPublic: {
      nc.lambda_rule = LambdaRule::Public(c_lambda);
      absl::StatusOr<Dataset> pub = MakePublicSample(cfg, p, td.truth, public_seed);
      if (!pub.ok()) return pub.status();
      absl::StatusOr<NldpRun> run =
          RunNldpPublic(td.data, *pub, nc, mech_seed, transcript);
      if (!run.ok()) return run.status();
      return EstimateOutput{std::move(run->theta_hat), 1};
    }
    case EstimatorKind::kIhtIsotropic:
    case EstimatorKind::kIhtGeneral: {
      IhtConfig ic;
      if (cfg.estimator == EstimatorKind::kIhtIsotropic) {
        ic = IhtConfig::Isotropic(p.n, p.d, p.k, p.epsilon, clip);
      } else {
        absl::StatusOr<IhtConfig> g = IhtConfig::General(
            p.n, p.d, p.k, p.epsilon, clip, td.truth.covariance);
        if (!g.ok()) return g.status();
        ic = *g;
      }
      ApplyIhtOverrides(cfg, ic);
      absl::StatusOr<IhtResult> res =
          LdpIht(td.data, ic, mech_seed, std::nullopt,
                 std::span<const double>(td.truth.theta_star));
      if (!res.ok()) return res.status();
      *transcript = std::move(res->transcript);
      return EstimateOutput{std::move(res->theta), res->iterations};
    }
  }
  return absl::InternalError("unhandled estimator");
}

// Linear-interpolated quantile of an ascending list.
double Quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  if (std::isinf(sorted[hi]) || std::isinf(sorted[lo])) return kInf;
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> RankFailures(std::vector<double> values) {
  for (double& v : values) {
    if (!std::isfinite(v)) v = kInf;
  }
  std::sort(values.begin(), values.end());
  return values;
}

std::string FormatDouble(double v) { return absl::StrFormat("%.17g", v); }

Json JsonNumber(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

uint64_t TrialSeed(uint64_t base_seed, std::size_t grid_index,
                   std::size_t trial) {
  return DeriveSeed(base_seed, {grid_index, trial});
}

absl::StatusOr<TrialOutput> RunTrial(const ExperimentConfig& cfg,
                                     const GridPoint& point, std::size_t trial,
                                     double c_lambda) {
  const auto start = std::chrono::steady_clock::now();
  const uint64_t seed = TrialSeed(cfg.base_seed, point.index, trial);
  absl::StatusOr<TrialData> td = MakeTrialData(
      cfg, point, DeriveSeed(seed, {0}), DeriveSeed(seed, {1}));
  if (!td.ok()) return td.status();

  TrialOutput out;
  ResultRow& row = out.row;
  row.estimator = EstimatorName(cfg.estimator);
  row.n = point.n;
  row.d = point.d;
  row.k = point.k;
  row.epsilon = point.epsilon;
  row.trial = trial;
  row.seed = seed;
  row.grid_index = point.index;
  row.c_lambda = c_lambda;

  absl::StatusOr<EstimateOutput> est =
      Estimate(cfg, point, *td, c_lambda, DeriveSeed(seed, {2}),
               DeriveSeed(seed, {3}), &out.transcript);
  EstimateReport report;
  if (est.ok()) {
    absl::StatusOr<EstimateReport> r =
        Evaluate(est->theta, td->truth.theta_star, cfg.support_threshold);
    if (!r.ok()) return r.status();
    report = *std::move(r);
    report.iterations_run = est->iterations;
  } else if (IsCovarianceNotInvertible(est.status())) {
    report = FailureReport(EstimatorFailure::kCovNotInvertible);
  } else {
    return absl::Status(
        est.status().code(),
        absl::StrFormat("grid point %d trial %d: %s", point.index, trial,
                        est.status().message()));
  }
  row.l2_err = report.l2_err;
  row.linf_err = report.linf_err;
  row.l1_err = report.l1_err;
  row.support_precision = report.support_precision;
  row.support_recall = report.support_recall;
  if (report.failure) row.failure = EstimatorFailureName(*report.failure);
  if (cfg.record_wall_time) {
    row.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  }
  return out;
}

double MedianWithFailures(std::vector<double> values) {
  return Quantile(RankFailures(std::move(values)), 0.5);
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& cfg,
                                               int threads) {
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  const std::vector<GridPoint> points = cfg.Expand();
  const std::vector<double> cands =
      cfg.uses_lambda() ? cfg.c_lambda : std::vector<double>{cfg.c_lambda[0]};
  const std::size_t per_point = cands.size() * cfg.trials;
  const std::size_t jobs = points.size() * per_point;

  std::vector<ResultRow> slots(jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mu;
  absl::Status first_error;
  std::size_t first_error_job = jobs;

  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs || failed.load()) return;
      const std::size_t pi = job / per_point;
      const std::size_t ci = (job % per_point) / cfg.trials;
      const std::size_t trial = job % cfg.trials;
      absl::StatusOr<TrialOutput> out = RunTrial(cfg, points[pi], trial, cands[ci]);
      if (!out.ok()) {
        std::lock_guard<std::mutex> lock(error_mu);
        // Report the lowest failing job so the message does not depend on
        // scheduling.
        if (job < first_error_job) {
          first_error_job = job;
          first_error = out.status();
        }
        failed.store(true);
        return;
      }
      slots[job] = std::move(out->row);
    }
  };

  const int n_threads =
      static_cast<int>(std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(jobs, 1)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failed.load()) return first_error;

  ExperimentResult result;
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    GridSummary summary;
    summary.point = points[pi];
    std::size_t best = 0;
    double best_median = kInf;
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      std::vector<double> errs;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        errs.push_back(slots[pi * per_point + ci * cfg.trials + t].l2_err);
      }
      const double med = MedianWithFailures(errs);
      summary.median_by_c_lambda[cands[ci]] = med;
      if (med < best_median) {
        best_median = med;
        best = ci;
      }
    }
    summary.chosen_c_lambda = cands[best];
    std::vector<double> errs;
    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      ResultRow& row = slots[pi * per_point + best * cfg.trials + t];
      errs.push_back(row.l2_err);
      if (row.failure.empty() && std::isfinite(row.l2_err)) {
        sum += row.l2_err;
        ++ok;
      } else {
        ++summary.failures;
      }
      result.rows.push_back(std::move(row));
    }
    const std::vector<double> ranked = RankFailures(errs);
    summary.median_l2 = Quantile(ranked, 0.5);
    summary.iqr_l2 = Quantile(ranked, 0.75) - Quantile(ranked, 0.25);
    if (std::isnan(summary.iqr_l2)) summary.iqr_l2 = kInf;
    summary.mean_l2 =
        ok > 0 ? sum / static_cast<double>(ok)
               : std::numeric_limits<double>::quiet_NaN();
    result.summaries.push_back(std::move(summary));
  }
  return result;
}

std::string ResultsToCsv(const std::vector<ResultRow>& rows) {
  std::string out = absl::StrCat(kResultCsvHeader, "\n");
  for (const ResultRow& r : rows) {
    absl::StrAppend(&out, r.estimator, ",", r.n, ",", r.d, ",", r.k, ",",
                    FormatDouble(r.epsilon), ",", r.trial, ",", r.seed, ",",
                    FormatDouble(r.l2_err), ",", FormatDouble(r.linf_err), ",",
                    FormatDouble(r.l1_err), ",",
                    FormatDouble(r.support_precision), ",",
                    FormatDouble(r.support_recall), ",",
                    FormatDouble(r.wall_time_ms), ",", r.failure, "\n");
  }
  return out;
}

absl::StatusOr<std::vector<ResultRow>> ParseResultsCsv(const std::string& text) {
  std::vector<absl::string_view> lines = absl::StrSplit(text, '\n');
  if (lines.empty() ||
      absl::StripTrailingAsciiWhitespace(lines[0]) != kResultCsvHeader) {
    return absl::InvalidArgumentError("results CSV header mismatch");
  }
  std::vector<ResultRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    absl::string_view line = absl::StripTrailingAsciiWhitespace(lines[li]);
    if (line.empty()) continue;
    std::vector<std::string> f = absl::StrSplit(line, ',');
    if (f.size() != 14) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: expected 14 fields, got %d", li + 1,
                          f.size()));
    }
    ResultRow r;
    r.estimator = f[0];
    uint64_t n, d, k, trial;
    bool ok = absl::SimpleAtoi(f[1], &n) && absl::SimpleAtoi(f[2], &d) &&
              absl::SimpleAtoi(f[3], &k) && absl::SimpleAtod(f[4], &r.epsilon) &&
              absl::SimpleAtoi(f[5], &trial) && absl::SimpleAtoi(f[6], &r.seed) &&
              absl::SimpleAtod(f[7], &r.l2_err) &&
              absl::SimpleAtod(f[8], &r.linf_err) &&
              absl::SimpleAtod(f[9], &r.l1_err) &&
              absl::SimpleAtod(f[10], &r.support_precision) &&
              absl::SimpleAtod(f[11], &r.support_recall) &&
              absl::SimpleAtod(f[12], &r.wall_time_ms);
    if (!ok) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: malformed number", li + 1));
    }
    r.n = n;
    r.d = d;
    r.k = k;
    r.trial = trial;
    r.failure = f[13];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string SummariesToJson(const ExperimentConfig& cfg,
                            const std::vector<GridSummary>& summaries) {
  Json j;
  j["config"] = Json::parse(ExperimentConfigToJson(cfg));
  j["grid_points"] = Json::array();
  for (const GridSummary& s : summaries) {
    Json by_c = Json::array();
    for (const auto& [c, med] : s.median_by_c_lambda) {
      by_c.push_back({{"c_lambda", c}, {"median_l2_err", JsonNumber(med)}});
    }
    j["grid_points"].push_back({
        {"grid_index", s.point.index},
        {"n", s.point.n},
        {"d", s.point.d},
        {"k", s.point.k},
        {"epsilon", JsonNumber(s.point.epsilon)},
        {"chosen_c_lambda", s.chosen_c_lambda},
        {"c_lambda_candidates", by_c},
        {"median_l2_err", JsonNumber(s.median_l2)},
        {"mean_l2_err", JsonNumber(s.mean_l2)},
        {"iqr_l2_err", JsonNumber(s.iqr_l2)},
        {"failures", s.failures},
    });
  }
  return j.dump(2);
}

absl::StatusOr<RateFit> FitRate(const std::vector<ResultRow>& rows,
                                RateAxis axis) {
  if (rows.empty()) return absl::InvalidArgumentError("no rows to fit");
  const ResultRow& ref = rows.front();
  std::map<double, std::vector<double>> groups;
  for (const ResultRow& r : rows) {
    const bool same = r.estimator == ref.estimator && r.d == ref.d &&
                      r.k == ref.k &&
                      (axis == RateAxis::kN ? r.epsilon == ref.epsilon
                                            : r.n == ref.n);
    if (!same) {
      return absl::InvalidArgumentError(
          "rows vary in a coordinate other than the fit axis");
    }
    const double x = axis == RateAxis::kN ? static_cast<double>(r.n) : r.epsilon;
    groups[x].push_back(r.failure.empty() ? r.l2_err : kInf);
  }
  std::vector<double> xs, ys;
  for (const auto& [x, errs] : groups) {
    const double med = MedianWithFailures(errs);
    if (!std::isfinite(x) || !(x > 0.0) || !std::isfinite(med) || !(med > 0.0)) {
      continue;
    }
    xs.push_back(std::log(x));
    ys.push_back(std::log(med));
  }
  if (xs.size() < 3) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "rate fit needs >= 3 axis values with finite medians, have %d",
        xs.size()));
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.grid_points_used = xs.size();
  return fit;
}

std::string RateFitToJson(const RateFit& fit) {
  Json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.r_squared;
  j["grid_points_used"] = fit.grid_points_used;
  return j.dump(2);
}

}  // namespace ldpsr
