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

// Tagged binary encoding of a single PerturbedMessage (little-endian):
//
//   u8   kind
//   u64  user_id
//   u64  dim            (0 when the payload was dropped)
//   f64  payload...     kStatPair: upper triangle of noisy_xxT row by row,
//                       then noisy_xy; otherwise the single d-vector.

#ifndef LDPSR_MESSAGE_IO_H_
#define LDPSR_MESSAGE_IO_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "ldpsr/privacy.h"

namespace ldpsr {

void AppendMessage(const PerturbedMessage& msg, std::string& out);
std::string EncodeMessage(const PerturbedMessage& msg);

// Decodes one record from the front of `bytes` and advances past it.
absl::StatusOr<PerturbedMessage> ConsumeMessage(std::string_view& bytes);
// Decodes exactly one record; trailing bytes are an error.
absl::StatusOr<PerturbedMessage> DecodeMessage(std::string_view bytes);

}  // namespace ldpsr

#endif  // LDPSR_MESSAGE_IO_H_
