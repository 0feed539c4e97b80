#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>

namespace cspr::binary {

// Payloads are little-endian on disk regardless of host order.

inline void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

inline bool read_u64(std::istream& in, std::uint64_t& v) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return true;
}

inline void write_f64(std::ostream& out, std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double d : values) write_u64(out, std::bit_cast<std::uint64_t>(d));
  }
}

inline bool read_f64(std::istream& in, std::span<double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(values.data()),
                                     static_cast<std::streamsize>(values.size() * sizeof(double))));
  } else {
    for (double& d : values) {
      std::uint64_t bits;
      if (!read_u64(in, bits)) return false;
      d = std::bit_cast<double>(bits);
    }
    return true;
  }
}

}  // namespace cspr::binary
