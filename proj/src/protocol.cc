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

#include "ldpsr/protocol.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "binary_io.h"
#include "json.hpp"
#include "ldpsr/message_io.h"

namespace ldpsr {
namespace {

constexpr char kTranscriptMagic[8] = {'L', 'D', 'P', 'S', 'R', 'T', 'X', '\0'};
constexpr uint64_t kTranscriptVersion = 1;

absl::Status WithUser(const absl::Status& s, uint64_t user_id) {
  return absl::Status(s.code(),
                      absl::StrFormat("user %d: %s", user_id, s.message()));
}

// Runs `perturb` for users [begin, end) and returns their messages ordered
// by user id.
absl::StatusOr<std::vector<PerturbedMessage>> CollectRound(
    const Dataset& data, std::size_t begin, std::size_t end,
    std::optional<std::span<const double>> broadcast,
    const PerturbFn& perturb, uint64_t run_seed,
    const ProtocolOptions& options, uint64_t round) {
  const std::size_t count = end - begin;
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.shuffle_seed.has_value()) {
    Philox4x32 gen(*options.shuffle_seed, round);
    std::shuffle(order.begin(), order.end(), gen);
  }
  std::vector<PerturbedMessage> slots(count);
  for (std::size_t pos : order) {
    const uint64_t id = begin + pos;
    UserView view;
    view.x = data.x(id);
    view.y = data.y(id);
    view.broadcast = broadcast;
    view.user_id = id;
    view.key = StreamKey{run_seed, id};
    absl::StatusOr<PerturbedMessage> msg = perturb(view);
    if (!msg.ok()) return WithUser(msg.status(), id);
    if (msg->user_id != id) {
      return absl::InternalError(absl::StrFormat(
          "user %d: perturbation returned a message tagged %d", id,
          msg->user_id));
    }
    slots[pos] = *std::move(msg);
  }
  return slots;
}

}  // namespace

absl::StatusOr<Transcript> RunNonInteractive(const Dataset& data,
                                             const PerturbFn& perturb,
                                             uint64_t run_seed,
                                             const ProtocolOptions& options,
                                             const MessageObserver& observer) {
  if (data.n() == 0) return absl::InvalidArgumentError("empty dataset");
  Transcript t;
  t.protocol_kind = ProtocolKind::kNonInteractive;
  t.num_users = data.n();
  Round round;
  round.round_index = 0;

  // Without shuffling the round can be streamed user by user, which keeps
  // memory flat when payloads are not retained.
  if (!options.shuffle_seed.has_value()) {
    round.messages.reserve(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
      absl::StatusOr<std::vector<PerturbedMessage>> one = CollectRound(
          data, i, i + 1, std::nullopt, perturb, run_seed, options, 0);
      if (!one.ok()) return one.status();
      PerturbedMessage& msg = one->front();
      if (observer) {
        if (absl::Status s = observer(msg); !s.ok()) return WithUser(s, i);
      }
      if (!options.retain_payloads) msg.ClearPayload();
      round.messages.push_back(std::move(msg));
    }
  } else {
    absl::StatusOr<std::vector<PerturbedMessage>> all = CollectRound(
        data, 0, data.n(), std::nullopt, perturb, run_seed, options, 0);
    if (!all.ok()) return all.status();
    round.messages = *std::move(all);
    for (PerturbedMessage& msg : round.messages) {
      if (observer) {
        if (absl::Status s = observer(msg); !s.ok()) {
          return WithUser(s, msg.user_id);
        }
      }
      if (!options.retain_payloads) msg.ClearPayload();
    }
  }
  t.rounds.push_back(std::move(round));
  return t;
}

absl::StatusOr<std::vector<std::size_t>> GroupBoundaries(std::size_t n,
                                                         std::size_t T) {
  if (T == 0) return absl::InvalidArgumentError("T must be >= 1");
  if (T > n) {
    return absl::InvalidArgumentError(
        absl::StrFormat("T = %d exceeds the number of users n = %d", T, n));
  }
  const std::size_t size = n / T;
  std::vector<std::size_t> b(T + 1);
  for (std::size_t t = 0; t < T; ++t) b[t] = t * size;
  b[T] = n;
  return b;
}

absl::StatusOr<SequentialResult> RunSequential(
    const Dataset& data, std::size_t T, Vec theta0,
    const ServerStep& server_step, const PerturbFn& perturb,
    uint64_t run_seed, const ProtocolOptions& options) {
  absl::StatusOr<std::vector<std::size_t>> bounds =
      GroupBoundaries(data.n(), T);
  if (!bounds.ok()) return bounds.status();
  SequentialResult result;
  result.transcript.protocol_kind = ProtocolKind::kSequential;
  result.transcript.num_users = data.n();
  Vec theta = std::move(theta0);
  for (std::size_t t = 0; t < T; ++t) {
    Round round;
    round.round_index = t;
    round.broadcast = theta;
    absl::StatusOr<std::vector<PerturbedMessage>> msgs =
        CollectRound(data, (*bounds)[t], (*bounds)[t + 1],
                     std::span<const double>(*round.broadcast), perturb,
                     run_seed, options, t);
    if (!msgs.ok()) return msgs.status();
    absl::StatusOr<Vec> next = server_step(t, *msgs);
    if (!next.ok()) return next.status();
    theta = *std::move(next);
    if (!options.retain_payloads) {
      for (PerturbedMessage& m : *msgs) m.ClearPayload();
    }
    round.messages = *std::move(msgs);
    result.transcript.rounds.push_back(std::move(round));
  }
  result.final_iterate = std::move(theta);
  return result;
}

const char* ViolationKindName(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kDuplicateUser:
      return "duplicate_user";
    case ViolationKind::kOverlappingGroups:
      return "overlapping_groups";
    case ViolationKind::kRoundOrder:
      return "round_order";
    case ViolationKind::kMixedKinds:
      return "mixed_kinds";
    case ViolationKind::kMissingUser:
      return "missing_user";
    case ViolationKind::kUnknownUser:
      return "unknown_user";
    case ViolationKind::kRoundShape:
      return "round_shape";
  }
  return "unknown";
}

AuditReport AuditTranscript(const Transcript& transcript) {
  AuditReport report;
  auto flag = [&](ViolationKind kind, uint64_t round, uint64_t user,
                  std::string detail) {
    report.violations.push_back({kind, round, user, std::move(detail)});
  };

  const bool sequential = transcript.protocol_kind == ProtocolKind::kSequential;
  if (!sequential && transcript.rounds.size() != 1) {
    flag(ViolationKind::kRoundShape, 0, 0,
         absl::StrFormat("non-interactive transcript has %d rounds",
                         transcript.rounds.size()));
  }
  if (sequential && transcript.rounds.empty()) {
    flag(ViolationKind::kRoundShape, 0, 0, "sequential transcript is empty");
  }

  // user id -> round in which it first spoke
  std::map<uint64_t, uint64_t> first_round;
  for (std::size_t pos = 0; pos < transcript.rounds.size(); ++pos) {
    const Round& r = transcript.rounds[pos];
    if (r.round_index != pos) {
      flag(ViolationKind::kRoundOrder, r.round_index, 0,
           absl::StrFormat("round at position %d carries index %d", pos,
                           r.round_index));
    }
    if (sequential != r.broadcast.has_value()) {
      flag(ViolationKind::kRoundShape, r.round_index, 0,
           sequential ? "sequential round without a broadcast"
                      : "non-interactive round with a broadcast");
    }
    std::set<uint8_t> kinds;
    for (const PerturbedMessage& m : r.messages) {
      kinds.insert(static_cast<uint8_t>(m.kind));
      if (m.user_id >= transcript.num_users) {
        flag(ViolationKind::kUnknownUser, r.round_index, m.user_id,
             absl::StrFormat("user id outside [0, %d)", transcript.num_users));
      }
      auto [it, inserted] = first_round.emplace(m.user_id, r.round_index);
      if (!inserted) {
        if (it->second == r.round_index) {
          flag(ViolationKind::kDuplicateUser, r.round_index, m.user_id,
               "user spoke twice in one round");
        } else {
          flag(ViolationKind::kOverlappingGroups, r.round_index, m.user_id,
               absl::StrFormat("user already spoke in round %d", it->second));
        }
      }
    }
    if (kinds.size() > 1) {
      flag(ViolationKind::kMixedKinds, r.round_index, 0,
           absl::StrFormat("%d message kinds in one round", kinds.size()));
    }
  }

  uint64_t missing = 0;
  uint64_t first_missing = 0;
  for (uint64_t id = 0; id < transcript.num_users; ++id) {
    if (!first_round.contains(id)) {
      if (missing++ == 0) first_missing = id;
    }
  }
  if (missing > 0) {
    flag(ViolationKind::kMissingUser, 0, first_missing,
         absl::StrFormat("%d users never spoke", missing));
  }
  report.passed = report.violations.empty();
  return report;
}

std::string AuditReportToJson(const AuditReport& report) {
  nlohmann::json j;
  j["passed"] = report.passed;
  j["violations"] = nlohmann::json::array();
  for (const Violation& v : report.violations) {
    j["violations"].push_back({{"kind", ViolationKindName(v.kind)},
                               {"round", v.round},
                               {"user_id", v.user_id},
                               {"detail", v.detail}});
  }
  return j.dump(2);
}

std::string EncodeTranscript(const Transcript& transcript) {
  std::string out(kTranscriptMagic, sizeof(kTranscriptMagic));
  internal::PutU64(out, kTranscriptVersion);
  internal::PutU8(out, static_cast<uint8_t>(transcript.protocol_kind));
  internal::PutU64(out, transcript.num_users);
  internal::PutU64(out, transcript.rounds.size());
  std::string record;
  for (const Round& r : transcript.rounds) {
    internal::PutU64(out, r.round_index);
    internal::PutU8(out, r.broadcast.has_value() ? 1 : 0);
    if (r.broadcast.has_value()) {
      internal::PutU64(out, r.broadcast->size());
      for (double v : *r.broadcast) internal::PutF64(out, v);
    }
    internal::PutU64(out, r.messages.size());
    for (const PerturbedMessage& m : r.messages) {
      record.clear();
      AppendMessage(m, record);
      internal::PutU64(out, record.size());
      out += record;
    }
  }
  return out;
}

absl::StatusOr<Transcript> DecodeTranscript(std::string_view bytes) {
  auto truncated = [] {
    return absl::InvalidArgumentError("transcript truncated");
  };
  internal::ByteReader reader(bytes);
  std::string_view magic;
  if (!reader.GetBytes(8, magic)) return truncated();
  if (magic != std::string_view(kTranscriptMagic, 8)) {
    return absl::InvalidArgumentError("bad transcript magic");
  }
  uint64_t version = 0, num_users = 0, num_rounds = 0;
  uint8_t kind = 0;
  if (!reader.GetU64(version) || !reader.GetU8(kind) ||
      !reader.GetU64(num_users) || !reader.GetU64(num_rounds)) {
    return truncated();
  }
  if (version != kTranscriptVersion) {
    return absl::InvalidArgumentError(
        absl::StrFormat("unsupported transcript version %d", version));
  }
  if (kind != static_cast<uint8_t>(ProtocolKind::kNonInteractive) &&
      kind != static_cast<uint8_t>(ProtocolKind::kSequential)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("unknown protocol kind %d", kind));
  }
  Transcript t;
  t.protocol_kind = static_cast<ProtocolKind>(kind);
  t.num_users = num_users;
  for (uint64_t r = 0; r < num_rounds; ++r) {
    Round round;
    uint8_t has_broadcast = 0;
    if (!reader.GetU64(round.round_index) || !reader.GetU8(has_broadcast)) {
      return truncated();
    }
    if (has_broadcast > 1) {
      return absl::InvalidArgumentError("bad broadcast flag");
    }
    if (has_broadcast == 1) {
      uint64_t d = 0;
      if (!reader.GetU64(d)) return truncated();
      if (d > reader.remaining() / 8) return truncated();
      Vec b(d);
      for (double& v : b) reader.GetF64(v);
      round.broadcast = std::move(b);
    }
    uint64_t count = 0;
    if (!reader.GetU64(count)) return truncated();
    if (count > reader.remaining() / 8) return truncated();
    round.messages.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
      uint64_t len = 0;
      std::string_view rec;
      if (!reader.GetU64(len) || !reader.GetBytes(len, rec)) {
        return truncated();
      }
      absl::StatusOr<PerturbedMessage> msg = DecodeMessage(rec);
      if (!msg.ok()) return msg.status();
      round.messages.push_back(*std::move(msg));
    }
    t.rounds.push_back(std::move(round));
  }
  if (reader.remaining() != 0) {
    return absl::InvalidArgumentError("trailing bytes after transcript");
  }
  return t;
}

absl::Status SaveTranscript(const Transcript& transcript,
                            const std::string& path,
                            const std::string& metadata_json) {
  nlohmann::json sidecar;
  sidecar["protocol_kind"] =
      transcript.protocol_kind == ProtocolKind::kSequential ? "sequential"
                                                             : "non_interactive";
  sidecar["num_users"] = transcript.num_users;
  sidecar["num_rounds"] = transcript.rounds.size();
  if (!metadata_json.empty()) {
    nlohmann::json meta = nlohmann::json::parse(metadata_json, nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) {
      return absl::InvalidArgumentError("transcript metadata must be a JSON object");
    }
    sidecar["metadata"] = std::move(meta);
  }
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) return absl::NotFoundError(absl::StrCat("cannot open ", path));
    const std::string bytes = EncodeTranscript(transcript);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) return absl::DataLossError(absl::StrCat("failed writing ", path));
  }
  std::ofstream side(path + ".json");
  if (!side) return absl::NotFoundError(absl::StrCat("cannot open ", path, ".json"));
  side << sidecar.dump(2) << "\n";
  if (!side) return absl::DataLossError("failed writing transcript sidecar");
  return absl::OkStatus();
}

absl::StatusOr<Transcript> LoadTranscript(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return DecodeTranscript(bytes);
}

}  // namespace ldpsr
