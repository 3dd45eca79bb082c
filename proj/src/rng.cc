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

#include "ldpsr/rng.h"

namespace ldpsr {
namespace {

constexpr uint32_t kMul0 = 0xD2511F53;
constexpr uint32_t kMul1 = 0xCD9E8D57;
constexpr uint32_t kWeyl0 = 0x9E3779B9;
constexpr uint32_t kWeyl1 = 0xBB67AE85;
constexpr int kRounds = 10;

inline void MulHiLo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t product = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(product >> 32);
  lo = static_cast<uint32_t>(product);
}

}  // namespace

Philox4x32::Block Philox4x32::Encrypt(Block ctr, std::array<uint32_t, 2> key) {
  for (int round = 0; round < kRounds; ++round) {
    uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kMul0, ctr[0], hi0, lo0);
    MulHiLo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

Philox4x32::Philox4x32(StreamKey key)
    : key_{static_cast<uint32_t>(key.seed),
           static_cast<uint32_t>(key.seed >> 32)},
      counter_{0, 0, static_cast<uint32_t>(key.stream),
               static_cast<uint32_t>(key.stream >> 32)} {}

Philox4x32::result_type Philox4x32::operator()() {
  if (next_ == 4) {
    buffer_ = Encrypt(counter_, key_);
    // 64-bit block counter in the low two words.
    if (++counter_[0] == 0) ++counter_[1];
    next_ = 0;
  }
  return buffer_[next_++];
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t parent, std::initializer_list<uint64_t> parts) {
  uint64_t h = parent;
  for (uint64_t p : parts) {
    h = SplitMix64(h ^ SplitMix64(p + 0x9E3779B97F4A7C15ULL));
  }
  return h;
}

}  // namespace ldpsr
