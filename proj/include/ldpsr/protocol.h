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

// User/server message passing under the local model.
//
// A user only ever sees a UserView: its own datum, the current broadcast (if
// any) and its private random stream. The server only ever sees messages.
// Users are one-shot: every user id speaks in exactly one round.

#ifndef LDPSR_PROTOCOL_H_
#define LDPSR_PROTOCOL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ldpsr/data_synth.h"
#include "ldpsr/linalg.h"
#include "ldpsr/privacy.h"
#include "ldpsr/rng.h"

namespace ldpsr {

struct UserView {
  std::span<const double> x;
  double y = 0.0;
  // Current server iterate; empty in the non-interactive protocol.
  std::optional<std::span<const double>> broadcast;
  uint64_t user_id = 0;
  // The user's private stream: (run seed, user id).
  StreamKey key;
};

using PerturbFn =
    std::function<absl::StatusOr<PerturbedMessage>(const UserView&)>;

// Receives the zero-based round index and that round's messages (sorted by
// user id) and returns the next broadcast.
using ServerStep = std::function<absl::StatusOr<Vec>(
    std::size_t round, std::span<const PerturbedMessage> messages)>;

// Sees each message once, in user id order, before payloads may be dropped.
using MessageObserver = std::function<absl::Status(const PerturbedMessage&)>;

enum class ProtocolKind : uint8_t { kNonInteractive = 1, kSequential = 2 };

struct Round {
  uint64_t round_index = 0;
  std::optional<Vec> broadcast;
  std::vector<PerturbedMessage> messages;

  friend bool operator==(const Round&, const Round&) = default;
};

struct Transcript {
  ProtocolKind protocol_kind = ProtocolKind::kNonInteractive;
  uint64_t num_users = 0;
  std::vector<Round> rounds;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct ProtocolOptions {
  // When false, message payloads are dropped once the observer or server
  // step has consumed them; kinds and user ids stay for auditing.
  bool retain_payloads = true;
  // Executes users within a round in a seeded random order. Messages are
  // still recorded and delivered sorted by user id.
  std::optional<uint64_t> shuffle_seed;
};

// One message per user, a single round, no broadcast. User i perturbs with
// stream (run_seed, i).
absl::StatusOr<Transcript> RunNonInteractive(
    const Dataset& data, const PerturbFn& perturb, uint64_t run_seed,
    const ProtocolOptions& options = {},
    const MessageObserver& observer = nullptr);

// Zero-based group boundaries: round t covers users [b[t], b[t+1]) with
// floor(n/T) users per group and the remainder folded into the last group.
absl::StatusOr<std::vector<std::size_t>> GroupBoundaries(std::size_t n,
                                                         std::size_t T);

// T rounds. Round t broadcasts the current iterate (initially theta0) to
// its group, collects one message per member and hands them to server_step,
// whose output becomes the next broadcast. The final iterate is the last
// server_step output.
struct SequentialResult {
  Transcript transcript;
  Vec final_iterate;
};
absl::StatusOr<SequentialResult> RunSequential(
    const Dataset& data, std::size_t T, Vec theta0,
    const ServerStep& server_step, const PerturbFn& perturb,
    uint64_t run_seed, const ProtocolOptions& options = {});

enum class ViolationKind {
  kDuplicateUser,       // same user twice within a round
  kOverlappingGroups,   // same user in two different rounds
  kRoundOrder,          // round indices not 0, 1, 2, ...
  kMixedKinds,          // more than one message kind in a round
  kMissingUser,         // some id in [0, num_users) never spoke
  kUnknownUser,         // id outside [0, num_users)
  kRoundShape,          // round count or broadcast presence wrong for kind
};

struct Violation {
  ViolationKind kind;
  uint64_t round = 0;
  uint64_t user_id = 0;
  std::string detail;
};

struct AuditReport {
  bool passed = true;
  std::vector<Violation> violations;
};

const char* ViolationKindName(ViolationKind kind);

AuditReport AuditTranscript(const Transcript& transcript);
std::string AuditReportToJson(const AuditReport& report);

// Binary transcript file (little-endian):
//   magic "LDPSRTX\0", u64 version (1), u8 protocol kind, u64 num_users,
//   u64 round count, then per round:
//     u64 round_index, u8 has_broadcast, [u64 d, f64[d]], u64 message count,
//     then per message: u64 byte length followed by the message record.
// SaveTranscript also writes `<path>.json` holding a summary plus
// `metadata_json` (a JSON object, may be empty) under "metadata".
absl::Status SaveTranscript(const Transcript& transcript,
                            const std::string& path,
                            const std::string& metadata_json = "");
absl::StatusOr<Transcript> LoadTranscript(const std::string& path);
std::string EncodeTranscript(const Transcript& transcript);
absl::StatusOr<Transcript> DecodeTranscript(std::string_view bytes);

}  // namespace ldpsr

#endif  // LDPSR_PROTOCOL_H_
