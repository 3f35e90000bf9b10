// Copyright 2026 The apsm-mud Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian field encoding for the binary containers.

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "apsm/errors.hpp"

namespace apsm::io::detail {

template <typename U>
void put_le(std::ostream& out, U value) {
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(buf, sizeof buf);
}

inline void put_u32(std::ostream& out, std::uint32_t v) { put_le(out, v); }
inline void put_f32(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

/// Sequential reader that reports the byte offset of a short read.
class Reader {
 public:
  explicit Reader(std::istream& in, std::size_t offset = 0) : in_(in), offset_(offset) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      throw FormatError(std::string("truncated ") + what + ": expected " + std::to_string(n) +
                            " bytes, got " + std::to_string(got),
                        offset_ + got);
    }
    offset_ += n;
  }

  template <typename U>
  U le(const char* what) {
    unsigned char buf[sizeof(U)];
    bytes(reinterpret_cast<char*>(buf), sizeof buf, what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
    return v;
  }

  std::uint32_t u32(const char* what) { return le<std::uint32_t>(what); }
  float f32(const char* what) { return std::bit_cast<float>(le<std::uint32_t>(what)); }
  double f64(const char* what) { return std::bit_cast<double>(le<std::uint64_t>(what)); }

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::istream& in_;
  std::size_t offset_;
};

}  // namespace apsm::io::detail
