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

// Monte-Carlo experiment harness: configuration, seeded trials, result rows,
// summaries and log-log rate fits.
//
// Seeding. Grid points are enumerated with n outermost, then d, k and
// epsilon innermost; `grid_index` is the position in that order. Then
//
//   trial_seed = DeriveSeed(base_seed, {grid_index, trial})
//   truth  = DeriveSeed(trial_seed, {0})    data    = DeriveSeed(trial_seed, {1})
//   mechanism = DeriveSeed(trial_seed, {2}) public  = DeriveSeed(trial_seed, {3})
//
// Every c_lambda candidate reuses the same seeds, so candidates are compared
// on identical data and noise.

#ifndef LDPSR_EXPERIMENT_H_
#define LDPSR_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ldpsr/data_synth.h"
#include "ldpsr/protocol.h"

namespace ldpsr {

enum class EstimatorKind {
  kOlsSt,
  kNldp,
  kNldpPublic,
  kNldpHeavy,
  kIhtIsotropic,
  kIhtGeneral,
};

enum class DataFamily {
  kSubGaussian,
  kHardNonInteractive,
  kHardInteractive,
  kHeavyTailed,
};

const char* EstimatorName(EstimatorKind kind);
const char* DataFamilyName(DataFamily family);
absl::StatusOr<EstimatorKind> ParseEstimatorName(const std::string& name);
absl::StatusOr<DataFamily> ParseDataFamilyName(const std::string& name);

struct Grid {
  std::vector<std::size_t> n;
  std::vector<std::size_t> d;
  std::vector<std::size_t> k;
  std::vector<double> epsilon;

  std::size_t size() const {
    return n.size() * d.size() * k.size() * epsilon.size();
  }
};

struct GridPoint {
  std::size_t index = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  double epsilon = 0.0;
};

struct ExperimentConfig {
  EstimatorKind estimator = EstimatorKind::kNldp;
  DataFamily data_family = DataFamily::kSubGaussian;
  // Moment order for nldp_heavy and heavy_tailed data.
  double moment_p = 2.0;
  Grid grid;
  double delta = 1e-5;
  std::size_t trials = 1;
  uint64_t base_seed = 0;
  // One value, or several to pick the best per grid point by median error.
  std::vector<double> c_lambda = {1.0};
  std::string output_path;

  // Response noise scale (Gaussian sigma or Student-t multiplier).
  double noise_sigma = 1.0;
  CovarianceSpec covariance;
  // Sub-Gaussian parameter fed to the default clip thresholds.
  double clip_sigma = 1.0;
  std::optional<double> tau1;
  std::optional<double> tau2;
  std::optional<double> clip_r;
  // Hard instances: 0 selects the largest admissible nu.
  double nu = 0.0;
  // Public sample size for nldp_public; 0 selects n / 5.
  std::size_t public_m = 0;
  std::optional<std::size_t> iht_rounds;
  std::optional<double> iht_eta;
  std::optional<std::size_t> iht_k_prime;
  double support_threshold = 1e-6;
  // Off by default so that result files are byte-reproducible.
  bool record_wall_time = false;

  absl::Status Validate() const;
  std::vector<GridPoint> Expand() const;
  bool uses_lambda() const;
};

// TOML first; `.json` files (or text starting with '{') parse as JSON.
absl::StatusOr<ExperimentConfig> ParseExperimentConfig(
    const std::string& text, bool json);
absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path);
std::string ExperimentConfigToJson(const ExperimentConfig& cfg);

struct ResultRow {
  std::string estimator;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  double epsilon = 0.0;
  std::size_t trial = 0;
  uint64_t seed = 0;
  double l2_err = 0.0;
  double linf_err = 0.0;
  double l1_err = 0.0;
  double support_precision = 0.0;
  double support_recall = 0.0;
  double wall_time_ms = 0.0;
  std::string failure;  // empty on success

  // Not serialized.
  std::size_t grid_index = 0;
  double c_lambda = 0.0;
};

uint64_t TrialSeed(uint64_t base_seed, std::size_t grid_index,
                   std::size_t trial);

struct TrialOutput {
  ResultRow row;
  Transcript transcript;
};

// Runs one (grid point, trial, c_lambda) cell.
absl::StatusOr<TrialOutput> RunTrial(const ExperimentConfig& cfg,
                                     const GridPoint& point,
                                     std::size_t trial, double c_lambda);

struct GridSummary {
  GridPoint point;
  double chosen_c_lambda = 0.0;
  // c_lambda -> median l2 error (inf when at least half the trials fail).
  std::map<double, double> median_by_c_lambda;
  double median_l2 = 0.0;
  double mean_l2 = 0.0;  // over successful trials
  double iqr_l2 = 0.0;
  std::size_t failures = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // sorted by grid index, then trial
  std::vector<GridSummary> summaries;
};

// Runs every grid point x trial (x c_lambda candidate) on `threads` workers.
// Output is identical for every thread count.
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& cfg,
                                               int threads);

inline constexpr char kResultCsvHeader[] =
    "estimator,n,d,k,epsilon,trial,seed,l2_err,linf_err,l1_err,"
    "support_precision,support_recall,wall_time_ms,failure";

std::string ResultsToCsv(const std::vector<ResultRow>& rows);
absl::StatusOr<std::vector<ResultRow>> ParseResultsCsv(const std::string& text);
std::string SummariesToJson(const ExperimentConfig& cfg,
                            const std::vector<GridSummary>& summaries);

// Median with non-finite values ranked as +infinity.
double MedianWithFailures(std::vector<double> values);

enum class RateAxis { kN, kEpsilon };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t grid_points_used = 0;
};

// Least squares of log(median l2 error) on log(axis value). Every other grid
// coordinate and the estimator must be constant across rows. Axis values
// whose median is not finite (or infinite epsilon) are skipped; at least 3
// must remain.
absl::StatusOr<RateFit> FitRate(const std::vector<ResultRow>& rows,
                                RateAxis axis);
std::string RateFitToJson(const RateFit& fit);

}  // namespace ldpsr

#endif  // LDPSR_EXPERIMENT_H_
