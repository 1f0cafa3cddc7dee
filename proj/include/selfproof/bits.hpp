// Copyright 2026 the selfproof authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file or http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace selfproof {

// Bit strings are stored one bit per byte (values 0/1). State sizes are a few
// thousand bits, so simplicity beats packing.
using BitVec = std::vector<uint8_t>;

inline BitVec bits_from_string(std::string_view s) {
  BitVec v;
  v.reserve(s.size());
  for (char c : s) v.push_back(c == '1' ? 1 : 0);
  return v;
}

inline std::string bits_to_string(const BitVec& v) {
  std::string s;
  s.reserve(v.size());
  for (uint8_t b : v) s.push_back(b ? '1' : '0');
  return s;
}

// Big-endian value of the bits (most significant bit first).
inline uint64_t bits_to_u64(const BitVec& v) {
  uint64_t x = 0;
  for (uint8_t b : v) x = (x << 1) | (b & 1);
  return x;
}

// Big-endian encoding of x into exactly `width` bits (truncates high bits).
inline BitVec u64_to_bits(uint64_t x, size_t width) {
  BitVec v(width, 0);
  for (size_t i = 0; i < width; ++i)
    v[width - 1 - i] = static_cast<uint8_t>((x >> i) & 1);
  return v;
}

// Minimal binary representation, no leading zeros; "1" for 1, "0" for 0.
inline std::string u64_to_minimal_binary(uint64_t x) {
  if (x == 0) return "0";
  std::string s;
  while (x) {
    s.push_back(char('0' + (x & 1)));
    x >>= 1;
  }
  return std::string(s.rbegin(), s.rend());
}

// FNV-1a, used for state hashing and the trace hash chain.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const uint8_t*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a_str(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), seed);
}

inline std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

}  // namespace selfproof
