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

// ldpsr command-line harness.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "ldpsr/dataset_io.h"
#include "ldpsr/experiment.h"
#include "ldpsr/protocol.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int Fail(int code, const absl::Status& status) {
  std::cerr << "error: " << status.message() << "\n";
  return code;
}

int ConfigOrRuntime(const absl::Status& status) {
  const bool config = status.code() == absl::StatusCode::kInvalidArgument ||
                      status.code() == absl::StatusCode::kNotFound;
  return Fail(config ? kExitConfig : kExitRuntime, status);
}

int DefaultThreads() {
  if (const char* env = std::getenv("LDPSR_THREADS")) {
    int v = 0;
    if (absl::SimpleAtoi(env, &v) && v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

absl::Status WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::NotFoundError("cannot open " + path);
  out << text;
  if (!out) return absl::DataLossError("failed writing " + path);
  return absl::OkStatus();
}

struct RunArgs {
  std::string config;
  std::string out;
  std::string transcript;
  int threads = 0;
};

int RunOrSweep(const RunArgs& args, bool single_point) {
  absl::StatusOr<ldpsr::ExperimentConfig> cfg =
      ldpsr::LoadExperimentConfig(args.config);
  if (!cfg.ok()) return Fail(kExitConfig, cfg.status());
  if (single_point && cfg->grid.size() != 1) {
    return Fail(kExitConfig,
                absl::InvalidArgumentError(
                    "run expects a single grid point; use sweep for grids"));
  }
  const std::string out = args.out.empty() ? cfg->output_path : args.out;
  if (out.empty()) {
    return Fail(kExitConfig, absl::InvalidArgumentError(
                                 "no output path (--out or output_path)"));
  }
  absl::StatusOr<ldpsr::ExperimentResult> result =
      ldpsr::RunExperiment(*cfg, args.threads);
  if (!result.ok()) return Fail(kExitRuntime, result.status());
  if (absl::Status s = WriteText(out, ldpsr::ResultsToCsv(result->rows));
      !s.ok()) {
    return ConfigOrRuntime(s);
  }
  if (absl::Status s = WriteText(out + ".summary.json",
                                 ldpsr::SummariesToJson(*cfg, result->summaries) +
                                     "\n");
      !s.ok()) {
    return ConfigOrRuntime(s);
  }
  if (!args.transcript.empty()) {
    const ldpsr::GridPoint point = cfg->Expand().front();
    absl::StatusOr<ldpsr::TrialOutput> trial = ldpsr::RunTrial(
        *cfg, point, 0, result->summaries.front().chosen_c_lambda);
    if (!trial.ok()) return Fail(kExitRuntime, trial.status());
    const std::string meta = ldpsr::ExperimentConfigToJson(*cfg);
    if (absl::Status s =
            ldpsr::SaveTranscript(trial->transcript, args.transcript, meta);
        !s.ok()) {
      return ConfigOrRuntime(s);
    }
  }
  std::cout << "wrote " << result->rows.size() << " rows to " << out << "\n";
  return kExitOk;
}

int Generate(const std::string& config_path, const std::string& out) {
  absl::StatusOr<ldpsr::ExperimentConfig> cfg =
      ldpsr::LoadExperimentConfig(config_path);
  if (!cfg.ok()) return Fail(kExitConfig, cfg.status());
  const ldpsr::GridPoint p = cfg->Expand().front();
  const uint64_t seed = ldpsr::TrialSeed(cfg->base_seed, p.index, 0);
  const uint64_t truth_seed = ldpsr::DeriveSeed(seed, {0});
  const uint64_t data_seed = ldpsr::DeriveSeed(seed, {1});
  const int k = static_cast<int>(p.k);

  absl::StatusOr<ldpsr::GroundTruth> truth;
  absl::StatusOr<ldpsr::Dataset> data;
  switch (cfg->data_family) {
    case ldpsr::DataFamily::kSubGaussian:
      truth = ldpsr::MakeGroundTruth(p.d, k, cfg->covariance,
                                     ldpsr::NoiseSpec::Gaussian(cfg->noise_sigma),
                                     truth_seed);
      if (truth.ok()) data = ldpsr::SampleSubGaussian(*truth, p.n, data_seed);
      break;
    case ldpsr::DataFamily::kHeavyTailed:
      truth = ldpsr::MakeGroundTruth(
          p.d, k, cfg->covariance,
          ldpsr::NoiseSpec::StudentT(cfg->noise_sigma, cfg->moment_p),
          truth_seed);
      if (truth.ok()) data = ldpsr::SampleHeavyTailed(*truth, p.n, data_seed);
      break;
    case ldpsr::DataFamily::kHardNonInteractive:
    case ldpsr::DataFamily::kHardInteractive: {
      const bool inter =
          cfg->data_family == ldpsr::DataFamily::kHardInteractive;
      const double kk = static_cast<double>(p.k);
      const double nu = cfg->nu > 0.0 ? cfg->nu
                        : inter ? 1.0 / (4.0 * std::sqrt(2.0 * kk))
                                : 1.0 / std::sqrt(kk);
      auto pair = inter
                      ? ldpsr::SampleHardInteractive(p.d, k, nu, p.n, data_seed)
                      : ldpsr::SampleHardNonInteractive(p.d, k, nu, p.n,
                                                        data_seed);
      if (!pair.ok()) {
        truth = pair.status();
        break;
      }
      truth = std::move(pair->first.truth);
      data = std::move(pair->second);
      break;
    }
  }
  if (!truth.ok()) return ConfigOrRuntime(truth.status());
  if (!data.ok()) return ConfigOrRuntime(data.status());
  if (absl::Status s = ldpsr::SaveDataset(*data, out); !s.ok()) {
    return ConfigOrRuntime(s);
  }
  if (absl::Status s =
          WriteText(out + ".truth.json", ldpsr::GroundTruthToJson(*truth) + "\n");
      !s.ok()) {
    return ConfigOrRuntime(s);
  }
  std::cout << "wrote " << data->n() << " rows to " << out << "\n";
  return kExitOk;
}

int Fit(const std::string& csv, const std::string& axis) {
  std::ifstream in(csv);
  if (!in) return Fail(kExitConfig, absl::NotFoundError("cannot open " + csv));
  std::stringstream buf;
  buf << in.rdbuf();
  absl::StatusOr<std::vector<ldpsr::ResultRow>> rows =
      ldpsr::ParseResultsCsv(buf.str());
  if (!rows.ok()) return Fail(kExitConfig, rows.status());
  absl::StatusOr<ldpsr::RateFit> fit = ldpsr::FitRate(
      *rows, axis == "n" ? ldpsr::RateAxis::kN : ldpsr::RateAxis::kEpsilon);
  if (!fit.ok()) return Fail(kExitRuntime, fit.status());
  std::cout << ldpsr::RateFitToJson(*fit) << "\n";
  return kExitOk;
}

int Audit(const std::string& path) {
  absl::StatusOr<ldpsr::Transcript> t = ldpsr::LoadTranscript(path);
  if (!t.ok()) return ConfigOrRuntime(t.status());
  const ldpsr::AuditReport report = ldpsr::AuditTranscript(*t);
  std::cout << ldpsr::AuditReportToJson(report) << "\n";
  return report.passed ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally private sparse linear regression harness"};
  app.require_subcommand(1);

  RunArgs run_args;
  run_args.threads = DefaultThreads();
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", run_args.config, "Experiment config (TOML or JSON)")
        ->required();
    sub->add_option("--out", run_args.out, "Result CSV path");
    sub->add_option("--threads", run_args.threads,
                    "Worker threads (default: $LDPSR_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--transcript", run_args.transcript,
                    "Also save the transcript of the first trial");
  };
  CLI::App* run = app.add_subcommand("run", "Run a single-grid-point config");
  add_run_flags(run);
  CLI::App* sweep = app.add_subcommand("sweep", "Run every grid point");
  add_run_flags(sweep);

  std::string gen_config, gen_out;
  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen->add_option("--config", gen_config, "Experiment config")->required();
  gen->add_option("--out", gen_out, "Dataset path (.bin or .csv)")->required();

  std::string fit_csv, fit_axis = "n";
  CLI::App* fit = app.add_subcommand("fit", "Fit a log-log error rate");
  fit->add_option("--csv", fit_csv, "Result CSV")->required();
  fit->add_option("--axis", fit_axis, "n or epsilon")
      ->check(CLI::IsMember({"n", "epsilon"}));

  std::string audit_path;
  CLI::App* audit = app.add_subcommand("audit", "Audit a transcript file");
  audit->add_option("--transcript", audit_path, "Transcript path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (run->parsed()) return RunOrSweep(run_args, /*single_point=*/true);
  if (sweep->parsed()) return RunOrSweep(run_args, /*single_point=*/false);
  if (gen->parsed()) return Generate(gen_config, gen_out);
  if (fit->parsed()) return Fit(fit_csv, fit_axis);
  if (audit->parsed()) return Audit(audit_path);
  return kExitConfig;
}
