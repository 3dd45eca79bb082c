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

#include "ldpsr/message_io.h"

#include "absl/strings/str_format.h"
#include "binary_io.h"

namespace ldpsr {
namespace {

constexpr uint64_t kMaxMessageDim = 1 << 16;

absl::Status Truncated() {
  return absl::InvalidArgumentError("message record truncated");
}

bool KnownKind(uint8_t k) {
  return k == static_cast<uint8_t>(MessageKind::kStatPair) ||
         k == static_cast<uint8_t>(MessageKind::kRandomizedGradient) ||
         k == static_cast<uint8_t>(MessageKind::kCrossMoment);
}

}  // namespace

void AppendMessage(const PerturbedMessage& msg, std::string& out) {
  const std::size_t d = msg.dim();
  internal::PutU8(out, static_cast<uint8_t>(msg.kind));
  internal::PutU64(out, msg.user_id);
  internal::PutU64(out, d);
  if (d == 0) return;
  switch (msg.kind) {
    case MessageKind::kStatPair:
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
          internal::PutF64(out, msg.noisy_xxT(i, j));
        }
      }
      for (double v : msg.noisy_xy) internal::PutF64(out, v);
      break;
    case MessageKind::kCrossMoment:
      for (double v : msg.noisy_xy) internal::PutF64(out, v);
      break;
    case MessageKind::kRandomizedGradient:
      for (double v : msg.grad) internal::PutF64(out, v);
      break;
  }
}

std::string EncodeMessage(const PerturbedMessage& msg) {
  std::string out;
  AppendMessage(msg, out);
  return out;
}

absl::StatusOr<PerturbedMessage> ConsumeMessage(std::string_view& bytes) {
  internal::ByteReader reader(bytes);
  uint8_t kind = 0;
  uint64_t user_id = 0, d = 0;
  if (!reader.GetU8(kind) || !reader.GetU64(user_id) || !reader.GetU64(d)) {
    return Truncated();
  }
  if (!KnownKind(kind)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("unknown message kind %d", kind));
  }
  if (d > kMaxMessageDim) {
    return absl::InvalidArgumentError(
        absl::StrFormat("implausible message dimension %d", d));
  }
  PerturbedMessage msg;
  msg.kind = static_cast<MessageKind>(kind);
  msg.user_id = user_id;
  auto read_vec = [&](Vec& v) {
    v.resize(d);
    for (double& c : v) {
      if (!reader.GetF64(c)) return false;
    }
    return true;
  };
  if (d > 0) {
    switch (msg.kind) {
      case MessageKind::kStatPair:
        msg.noisy_xxT = SymMat(d);
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t j = i; j < d; ++j) {
            double v;
            if (!reader.GetF64(v)) return Truncated();
            msg.noisy_xxT.Set(i, j, v);
          }
        }
        if (!read_vec(msg.noisy_xy)) return Truncated();
        break;
      case MessageKind::kCrossMoment:
        if (!read_vec(msg.noisy_xy)) return Truncated();
        break;
      case MessageKind::kRandomizedGradient:
        if (!read_vec(msg.grad)) return Truncated();
        break;
    }
  }
  bytes.remove_prefix(bytes.size() - reader.remaining());
  return msg;
}

absl::StatusOr<PerturbedMessage> DecodeMessage(std::string_view bytes) {
  absl::StatusOr<PerturbedMessage> msg = ConsumeMessage(bytes);
  if (msg.ok() && !bytes.empty()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d trailing bytes after message record", bytes.size()));
  }
  return msg;
}

}  // namespace ldpsr
