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

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/match.h"
#include "json.hpp"
#include "ldpsr/experiment.h"
#include "ldpsr/privacy.h"
#include "toml.hpp"

namespace ldpsr {
namespace {

using Json = nlohmann::json;

constexpr std::pair<EstimatorKind, const char*> kEstimatorNames[] = {
    {EstimatorKind::kOlsSt, "ols_st"},
    {EstimatorKind::kNldp, "nldp"},
    {EstimatorKind::kNldpPublic, "nldp_public"},
    {EstimatorKind::kNldpHeavy, "nldp_heavy"},
    {EstimatorKind::kIhtIsotropic, "iht_isotropic"},
    {EstimatorKind::kIhtGeneral, "iht_general"},
};

constexpr std::pair<DataFamily, const char*> kFamilyNames[] = {
    {DataFamily::kSubGaussian, "subgaussian"},
    {DataFamily::kHardNonInteractive, "hard_noninteractive"},
    {DataFamily::kHardInteractive, "hard_interactive"},
    {DataFamily::kHeavyTailed, "heavy_tailed"},
};

absl::Status ConfigError(const std::string& msg) {
  return absl::InvalidArgumentError(absl::StrCat("config: ", msg));
}

Json TomlToJson(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    Json j = Json::object();
    for (const auto& [key, value] : *t) {
      j[std::string(key.str())] = TomlToJson(value);
    }
    return j;
  }
  if (const auto* a = node.as_array()) {
    Json j = Json::array();
    for (const auto& value : *a) j.push_back(TomlToJson(value));
    return j;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  return nullptr;  // dates and times are not used
}

// Typed accessors over a JSON object that record which keys were read, so
// misspelled keys can be reported.
class Reader {
 public:
  Reader(const Json& obj, std::string scope) : obj_(obj), scope_(std::move(scope)) {}

  bool Has(const std::string& key) const { return obj_.contains(key); }

  absl::Status Number(const std::string& key, double& out) {
    seen_.insert(key);
    if (!Has(key)) return absl::OkStatus();
    return ToNumber(obj_.at(key), key, out);
  }

  absl::Status Integer(const std::string& key, uint64_t& out) {
    seen_.insert(key);
    if (!Has(key)) return absl::OkStatus();
    const Json& v = obj_.at(key);
    const bool ok = v.is_number_unsigned() ||
                    (v.is_number_integer() && v.get<int64_t>() >= 0);
    if (!ok) {
      return ConfigError(absl::StrCat(Path(key), " must be a non-negative integer"));
    }
    out = v.get<uint64_t>();
    return absl::OkStatus();
  }

  absl::Status Size(const std::string& key, std::size_t& out) {
    uint64_t v = out;
    if (absl::Status s = Integer(key, v); !s.ok()) return s;
    out = static_cast<std::size_t>(v);
    return absl::OkStatus();
  }

  absl::Status String(const std::string& key, std::string& out) {
    seen_.insert(key);
    if (!Has(key)) return absl::OkStatus();
    if (!obj_.at(key).is_string()) {
      return ConfigError(absl::StrCat(Path(key), " must be a string"));
    }
    out = obj_.at(key).get<std::string>();
    return absl::OkStatus();
  }

  absl::Status Bool(const std::string& key, bool& out) {
    seen_.insert(key);
    if (!Has(key)) return absl::OkStatus();
    if (!obj_.at(key).is_boolean()) {
      return ConfigError(absl::StrCat(Path(key), " must be a boolean"));
    }
    out = obj_.at(key).get<bool>();
    return absl::OkStatus();
  }

  // Accepts a scalar or an array.
  absl::Status NumberList(const std::string& key, std::vector<double>& out) {
    seen_.insert(key);
    if (!Has(key)) return absl::OkStatus();
    const Json& v = obj_.at(key);
    out.clear();
    if (!v.is_array()) {
      double x;
      if (absl::Status s = ToNumber(v, key, x); !s.ok()) return s;
      out.push_back(x);
      return absl::OkStatus();
    }
    for (const Json& e : v) {
      double x;
      if (absl::Status s = ToNumber(e, key, x); !s.ok()) return s;
      out.push_back(x);
    }
    return absl::OkStatus();
  }

  absl::Status SizeList(const std::string& key, std::vector<std::size_t>& out) {
    seen_.insert(key);
    if (!Has(key)) return absl::OkStatus();
    const Json& v = obj_.at(key);
    out.clear();
    auto one = [&](const Json& e) -> absl::Status {
      if (!e.is_number_unsigned() &&
          !(e.is_number_integer() && e.get<int64_t>() >= 0)) {
        return ConfigError(
            absl::StrCat(Path(key), " must hold non-negative integers"));
      }
      out.push_back(e.get<std::size_t>());
      return absl::OkStatus();
    };
    if (!v.is_array()) return one(v);
    for (const Json& e : v) {
      if (absl::Status s = one(e); !s.ok()) return s;
    }
    return absl::OkStatus();
  }

  absl::StatusOr<Reader> Table(const std::string& key) {
    seen_.insert(key);
    static const Json kEmpty = Json::object();
    if (!Has(key)) return Reader(kEmpty, Path(key));
    if (!obj_.at(key).is_object()) {
      return ConfigError(absl::StrCat(Path(key), " must be a table"));
    }
    return Reader(obj_.at(key), Path(key));
  }

  absl::Status CheckUnknown() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) {
        return ConfigError(absl::StrCat("unknown key '", Path(key), "'"));
      }
    }
    return absl::OkStatus();
  }

 private:
  std::string Path(const std::string& key) const {
    return scope_.empty() ? key : absl::StrCat(scope_, ".", key);
  }

  absl::Status ToNumber(const Json& v, const std::string& key, double& out) const {
    if (v.is_number()) {
      out = v.get<double>();
      return absl::OkStatus();
    }
    if (v.is_string()) {
      const std::string s = absl::AsciiStrToLower(v.get<std::string>());
      if (s == "inf" || s == "infinity" || s == "+inf") {
        out = kInfinity;
        return absl::OkStatus();
      }
    }
    return ConfigError(absl::StrCat(Path(key), " must be a number"));
  }

  const Json& obj_;
  std::string scope_;
  std::set<std::string> seen_;
};

absl::StatusOr<ExperimentConfig> FromJson(const Json& root) {
  if (!root.is_object()) return ConfigError("top level must be a table");
  ExperimentConfig cfg;
  Reader r(root, "");
  std::string estimator = EstimatorName(cfg.estimator);
  std::string family = DataFamilyName(cfg.data_family);
  std::vector<absl::Status> st;
  st.push_back(r.String("estimator", estimator));
  st.push_back(r.String("data_family", family));
  st.push_back(r.Number("moment_p", cfg.moment_p));
  st.push_back(r.Number("delta", cfg.delta));
  st.push_back(r.Size("trials", cfg.trials));
  st.push_back(r.Integer("base_seed", cfg.base_seed));
  st.push_back(r.NumberList("c_lambda", cfg.c_lambda));
  st.push_back(r.String("output_path", cfg.output_path));
  st.push_back(r.Number("noise_sigma", cfg.noise_sigma));
  st.push_back(r.Number("clip_sigma", cfg.clip_sigma));
  st.push_back(r.Number("nu", cfg.nu));
  st.push_back(r.Number("support_threshold", cfg.support_threshold));
  st.push_back(r.Bool("record_wall_time", cfg.record_wall_time));
  for (const absl::Status& s : st) {
    if (!s.ok()) return s;
  }
  st.clear();

  absl::StatusOr<EstimatorKind> est = ParseEstimatorName(estimator);
  if (!est.ok()) return est.status();
  cfg.estimator = *est;
  absl::StatusOr<DataFamily> fam = ParseDataFamilyName(family);
  if (!fam.ok()) return fam.status();
  cfg.data_family = *fam;

  absl::StatusOr<Reader> grid = r.Table("grid");
  if (!grid.ok()) return grid.status();
  st.push_back(grid->SizeList("n", cfg.grid.n));
  st.push_back(grid->SizeList("d", cfg.grid.d));
  st.push_back(grid->SizeList("k", cfg.grid.k));
  st.push_back(grid->NumberList("epsilon", cfg.grid.epsilon));
  st.push_back(grid->CheckUnknown());

  absl::StatusOr<Reader> cov = r.Table("covariance");
  if (!cov.ok()) return cov.status();
  std::string cov_kind = "identity";
  double rho = 0.0;
  st.push_back(cov->String("kind", cov_kind));
  st.push_back(cov->Number("rho", rho));
  st.push_back(cov->CheckUnknown());
  if (cov_kind == "identity") {
    cfg.covariance = CovarianceSpec::Identity();
  } else if (cov_kind == "toeplitz") {
    cfg.covariance = CovarianceSpec::Toeplitz(rho);
  } else {
    return ConfigError(absl::StrCat("unknown covariance kind '", cov_kind, "'"));
  }

  absl::StatusOr<Reader> clip = r.Table("clip");
  if (!clip.ok()) return clip.status();
  auto opt_number = [&](Reader& rd, const std::string& key,
                        std::optional<double>& out) {
    if (!rd.Has(key)) {
      double ignored = 0.0;
      return rd.Number(key, ignored);
    }
    double v = 0.0;
    absl::Status s = rd.Number(key, v);
    out = v;
    return s;
  };
  st.push_back(opt_number(*clip, "tau1", cfg.tau1));
  st.push_back(opt_number(*clip, "tau2", cfg.tau2));
  st.push_back(opt_number(*clip, "r", cfg.clip_r));
  st.push_back(clip->CheckUnknown());

  absl::StatusOr<Reader> pub = r.Table("public");
  if (!pub.ok()) return pub.status();
  st.push_back(pub->Size("m", cfg.public_m));
  st.push_back(pub->CheckUnknown());

  absl::StatusOr<Reader> iht = r.Table("iht");
  if (!iht.ok()) return iht.status();
  if (iht->Has("T")) {
    std::size_t v = 0;
    st.push_back(iht->Size("T", v));
    cfg.iht_rounds = v;
  }
  st.push_back(opt_number(*iht, "eta", cfg.iht_eta));
  if (iht->Has("k_prime")) {
    std::size_t v = 0;
    st.push_back(iht->Size("k_prime", v));
    cfg.iht_k_prime = v;
  }
  st.push_back(iht->CheckUnknown());
  st.push_back(r.CheckUnknown());
  for (const absl::Status& s : st) {
    if (!s.ok()) return s;
  }
  if (absl::Status s = cfg.Validate(); !s.ok()) return s;
  return cfg;
}

}  // namespace

const char* EstimatorName(EstimatorKind kind) {
  for (const auto& [k, name] : kEstimatorNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

const char* DataFamilyName(DataFamily family) {
  for (const auto& [f, name] : kFamilyNames) {
    if (f == family) return name;
  }
  return "unknown";
}

absl::StatusOr<EstimatorKind> ParseEstimatorName(const std::string& name) {
  for (const auto& [k, n] : kEstimatorNames) {
    if (name == n) return k;
  }
  return ConfigError(absl::StrCat("unknown estimator '", name, "'"));
}

absl::StatusOr<DataFamily> ParseDataFamilyName(const std::string& name) {
  for (const auto& [f, n] : kFamilyNames) {
    if (name == n) return f;
  }
  return ConfigError(absl::StrCat("unknown data family '", name, "'"));
}

bool ExperimentConfig::uses_lambda() const {
  return estimator == EstimatorKind::kOlsSt ||
         estimator == EstimatorKind::kNldp ||
         estimator == EstimatorKind::kNldpPublic ||
         estimator == EstimatorKind::kNldpHeavy;
}

absl::Status ExperimentConfig::Validate() const {
  if (trials < 1) return ConfigError("trials must be >= 1");
  if (grid.n.empty() || grid.d.empty() || grid.k.empty() ||
      grid.epsilon.empty()) {
    return ConfigError("every grid list (n, d, k, epsilon) must be nonempty");
  }
  for (std::size_t d : grid.d) {
    if (d == 0) return ConfigError("grid.d entries must be >= 1");
  }
  for (std::size_t n : grid.n) {
    if (n == 0) return ConfigError("grid.n entries must be >= 1");
  }
  for (std::size_t k : grid.k) {
    if (k == 0) return ConfigError("grid.k entries must be >= 1");
    for (std::size_t d : grid.d) {
      if (k > d) {
        return ConfigError(absl::StrFormat("k = %d exceeds d = %d", k, d));
      }
    }
  }
  for (double e : grid.epsilon) {
    if (!(e > 0.0)) return ConfigError("grid.epsilon entries must be > 0");
  }
  const bool gaussian_mech = estimator == EstimatorKind::kNldp ||
                             estimator == EstimatorKind::kNldpPublic ||
                             estimator == EstimatorKind::kNldpHeavy;
  if (gaussian_mech && !(delta > 0.0 && delta < 1.0)) {
    return ConfigError("delta must lie in (0, 1)");
  }
  if (c_lambda.empty()) return ConfigError("c_lambda must be nonempty");
  for (double c : c_lambda) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      return ConfigError("c_lambda values must be finite and >= 0");
    }
  }
  if ((estimator == EstimatorKind::kNldpHeavy ||
       data_family == DataFamily::kHeavyTailed) &&
      !(moment_p > 1.0)) {
    return ConfigError("moment_p must be > 1");
  }
  if (!(noise_sigma >= 0.0) || !(clip_sigma > 0.0)) {
    return ConfigError("noise_sigma must be >= 0 and clip_sigma > 0");
  }
  for (const auto& v : {tau1, tau2, clip_r}) {
    if (v.has_value() && !(*v > 0.0)) {
      return ConfigError("clip overrides must be > 0");
    }
  }
  if (!(nu >= 0.0)) return ConfigError("nu must be >= 0");
  if (iht_rounds.has_value() && *iht_rounds == 0) {
    return ConfigError("iht.T must be >= 1");
  }
  if (iht_eta.has_value() && !(*iht_eta > 0.0)) {
    return ConfigError("iht.eta must be > 0");
  }
  if (iht_k_prime.has_value() && *iht_k_prime == 0) {
    return ConfigError("iht.k_prime must be >= 1");
  }
  if (!(support_threshold >= 0.0)) {
    return ConfigError("support_threshold must be >= 0");
  }
  if (covariance.kind == CovarianceKind::kToeplitz &&
      !(std::abs(covariance.rho) < 1.0)) {
    return ConfigError("covariance.rho must lie in (-1, 1)");
  }
  return absl::OkStatus();
}

std::vector<GridPoint> ExperimentConfig::Expand() const {
  std::vector<GridPoint> points;
  points.reserve(grid.size());
  for (std::size_t n : grid.n) {
    for (std::size_t d : grid.d) {
      for (std::size_t k : grid.k) {
        for (double e : grid.epsilon) {
          points.push_back({points.size(), n, d, k, e});
        }
      }
    }
  }
  return points;
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(const std::string& text,
                                                       bool json) {
  if (json) {
    Json root = Json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (root.is_discarded()) return ConfigError("malformed JSON");
    return FromJson(root);
  }
  try {
    toml::table table = toml::parse(text);
    return FromJson(TomlToJson(table));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at " << e.source().begin;
    return ConfigError(absl::StrCat("malformed TOML: ", msg.str()));
  }
}

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const bool json = (path.size() >= 5 && path.substr(path.size() - 5) == ".json") ||
                    absl::StartsWith(absl::StripLeadingAsciiWhitespace(text), "{");
  return ParseExperimentConfig(text, json);
}

std::string ExperimentConfigToJson(const ExperimentConfig& cfg) {
  auto num = [](double v) -> Json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  Json j;
  j["estimator"] = EstimatorName(cfg.estimator);
  j["data_family"] = DataFamilyName(cfg.data_family);
  j["moment_p"] = cfg.moment_p;
  j["delta"] = cfg.delta;
  j["trials"] = cfg.trials;
  j["base_seed"] = cfg.base_seed;
  j["c_lambda"] = cfg.c_lambda;
  j["output_path"] = cfg.output_path;
  j["noise_sigma"] = cfg.noise_sigma;
  j["clip_sigma"] = cfg.clip_sigma;
  j["nu"] = cfg.nu;
  j["support_threshold"] = cfg.support_threshold;
  j["record_wall_time"] = cfg.record_wall_time;
  Json eps = Json::array();
  for (double e : cfg.grid.epsilon) eps.push_back(num(e));
  j["grid"] = {{"n", cfg.grid.n},
               {"d", cfg.grid.d},
               {"k", cfg.grid.k},
               {"epsilon", eps}};
  j["covariance"] = {
      {"kind", cfg.covariance.kind == CovarianceKind::kToeplitz ? "toeplitz"
                                                                : "identity"},
      {"rho", cfg.covariance.rho}};
  Json clip = Json::object();
  if (cfg.tau1) clip["tau1"] = num(*cfg.tau1);
  if (cfg.tau2) clip["tau2"] = num(*cfg.tau2);
  if (cfg.clip_r) clip["r"] = num(*cfg.clip_r);
  j["clip"] = clip;
  j["public"] = {{"m", cfg.public_m}};
  Json iht = Json::object();
  if (cfg.iht_rounds) iht["T"] = *cfg.iht_rounds;
  if (cfg.iht_eta) iht["eta"] = *cfg.iht_eta;
  if (cfg.iht_k_prime) iht["k_prime"] = *cfg.iht_k_prime;
  j["iht"] = iht;
  return j.dump(2);
}

}  // namespace ldpsr
