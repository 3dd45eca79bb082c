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

#ifndef LDPSR_RNG_H_
#define LDPSR_RNG_H_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace ldpsr {

// Identifies one independent random stream: a seed plus a stream id (for
// example a user index). Two keys that differ in either field produce
// statistically independent sequences, regardless of the order in which the
// streams are consumed.
struct StreamKey {
  uint64_t seed = 0;
  uint64_t stream = 0;
};

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
//
// The 64-bit seed is the cipher key and the 64-bit stream id occupies the
// upper half of the 128-bit counter, so every (seed, stream) pair addresses a
// disjoint 2^64-block sequence. Satisfies UniformRandomBitGenerator and can
// be used with the <random> distributions.
class Philox4x32 {
 public:
  using result_type = uint32_t;
  using Block = std::array<uint32_t, 4>;

  explicit Philox4x32(StreamKey key);
  Philox4x32(uint64_t seed, uint64_t stream)
      : Philox4x32(StreamKey{seed, stream}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Raw bijection: encrypts `counter` under `key`. Exposed for known-answer
  // testing.
  static Block Encrypt(Block counter, std::array<uint32_t, 2> key);

 private:
  std::array<uint32_t, 2> key_;
  Block counter_;
  Block buffer_{};
  int next_ = 4;
};

// One SplitMix64 step (Weyl increment then finalizer); a bijective 64-bit
// mixer.
uint64_t SplitMix64(uint64_t x);

// Derives a child seed from a parent seed and an ordered list of integer
// coordinates:
//
//   h = parent
//   for each part p:  h = SplitMix64(h ^ SplitMix64(p + 0x9E3779B97F4A7C15))
//
// Used to key per-trial, per-purpose and per-user streams so that results do
// not depend on scheduling.
uint64_t DeriveSeed(uint64_t parent, std::initializer_list<uint64_t> parts);

}  // namespace ldpsr

#endif  // LDPSR_RNG_H_
