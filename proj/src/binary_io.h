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

// Little-endian primitive encoding shared by the binary file formats.

#ifndef LDPSR_SRC_BINARY_IO_H_
#define LDPSR_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <string>
#include <string_view>

namespace ldpsr::internal {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

inline uint64_t ToLittle(uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return __builtin_bswap64(v);
  }
}

inline void PutU8(std::string& out, uint8_t v) {
  out.push_back(static_cast<char>(v));
}

inline void PutU64(std::string& out, uint64_t v) {
  const uint64_t le = ToLittle(v);
  char buf[8];
  std::memcpy(buf, &le, 8);
  out.append(buf, 8);
}

inline void PutF64(std::string& out, double v) {
  PutU64(out, std::bit_cast<uint64_t>(v));
}

// Cursor over an in-memory byte buffer; every getter reports truncation.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  bool GetU8(uint8_t& v) {
    if (remaining() < 1) return false;
    v = static_cast<uint8_t>(bytes_[pos_++]);
    return true;
  }
  bool GetU64(uint64_t& v) {
    if (remaining() < 8) return false;
    uint64_t le;
    std::memcpy(&le, bytes_.data() + pos_, 8);
    pos_ += 8;
    v = ToLittle(le);
    return true;
  }
  bool GetF64(double& v) {
    uint64_t bits;
    if (!GetU64(bits)) return false;
    v = std::bit_cast<double>(bits);
    return true;
  }
  bool GetBytes(std::size_t n, std::string_view& v) {
    if (remaining() < n) return false;
    v = bytes_.substr(pos_, n);
    pos_ += n;
    return true;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

inline bool ReadExact(std::istream& in, std::size_t n, std::string& out) {
  out.resize(n);
  in.read(out.data(), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

}  // namespace ldpsr::internal

#endif  // LDPSR_SRC_BINARY_IO_H_
