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

#include <cstring>
#include <string>
#include <string_view>

#include "gtest/gtest.h"
#include "ldpsr/privacy.h"

namespace ldpsr {
namespace {

PerturbedMessage StatPair() {
  absl::StatusOr<PerturbedMessage> m =
      PerturbStats(Vec{0.3, -1.2, 2.0}, 0.7, ClipConfig{1.0, 1.0, 2.0},
                   PrivacyBudget{1.0, 1e-5, BudgetSplit::kHalfHalf}, 17,
                   StreamKey{3, 17});
  EXPECT_TRUE(m.ok()) << m.status();
  return *m;
}

TEST(MessageIoTest, StatPairRoundTrip) {
  const PerturbedMessage m = StatPair();
  const std::string bytes = EncodeMessage(m);
  // kind + user id + dim + 6 matrix entries + 3 vector entries.
  EXPECT_EQ(bytes.size(), 1u + 8u + 8u + 8u * 9u);
  absl::StatusOr<PerturbedMessage> back = DecodeMessage(bytes);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, m);
}

TEST(MessageIoTest, GradientAndCrossMomentRoundTrip) {
  PerturbedMessage g;
  g.kind = MessageKind::kRandomizedGradient;
  g.user_id = 5;
  g.grad = {1.0, -2.5};
  EXPECT_EQ(*DecodeMessage(EncodeMessage(g)), g);

  PerturbedMessage c;
  c.kind = MessageKind::kCrossMoment;
  c.user_id = 1ull << 40;
  c.noisy_xy = {0.125, 3.0, -7.0};
  EXPECT_EQ(*DecodeMessage(EncodeMessage(c)), c);
}

TEST(MessageIoTest, PayloadFreeRecord) {
  PerturbedMessage m = StatPair();
  m.ClearPayload();
  const std::string bytes = EncodeMessage(m);
  EXPECT_EQ(bytes.size(), 17u);
  EXPECT_EQ(*DecodeMessage(bytes), m);
}

TEST(MessageIoTest, LittleEndianLayout) {
  PerturbedMessage g;
  g.kind = MessageKind::kRandomizedGradient;
  g.user_id = 0x0102030405060708ull;
  g.grad = {1.5};
  const std::string b = EncodeMessage(g);
  EXPECT_EQ(static_cast<uint8_t>(b[0]), 2);
  EXPECT_EQ(static_cast<uint8_t>(b[1]), 0x08);
  EXPECT_EQ(static_cast<uint8_t>(b[8]), 0x01);
  EXPECT_EQ(static_cast<uint8_t>(b[9]), 1);
  double v = 0;
  std::memcpy(&v, b.data() + 17, 8);
  EXPECT_EQ(v, 1.5);
}

TEST(MessageIoTest, ConsumeAdvances) {
  std::string buf;
  const PerturbedMessage a = StatPair();
  PerturbedMessage b;
  b.kind = MessageKind::kRandomizedGradient;
  b.grad = {4.0};
  AppendMessage(a, buf);
  AppendMessage(b, buf);
  std::string_view view = buf;
  EXPECT_EQ(*ConsumeMessage(view), a);
  EXPECT_EQ(*ConsumeMessage(view), b);
  EXPECT_TRUE(view.empty());
  EXPECT_FALSE(DecodeMessage(buf).ok());
}

TEST(MessageIoTest, RejectsCorruption) {
  const std::string good = EncodeMessage(StatPair());
  EXPECT_FALSE(DecodeMessage(good.substr(0, good.size() - 1)).ok());
  std::string bad_kind = good;
  bad_kind[0] = 9;
  EXPECT_FALSE(DecodeMessage(bad_kind).ok());
  std::string huge_dim = good;
  huge_dim[16] = 0x7f;
  EXPECT_FALSE(DecodeMessage(huge_dim).ok());
}

}  // namespace
}  // namespace ldpsr
