#include "wsntpc/sha1.hpp"

#include <array>
#include <cstdint>
#include <cstring>

namespace wsntpc {
namespace {

inline std::uint32_t rol(std::uint32_t v, int n) {
  return (v << n) | (v >> (32 - n));
}

struct Sha1State {
  std::array<std::uint32_t, 5> h = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu,
                                    0x10325476u, 0xC3D2E1F0u};

  void process_block(const unsigned char* p) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    }
    for (int i = 16; i < 80; ++i) {
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t t = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = t;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }
};

}  // namespace

std::string sha1_hex(const std::string& bytes) {
  Sha1State st;
  const std::uint64_t bit_len = std::uint64_t(bytes.size()) * 8;

  std::size_t off = 0;
  while (bytes.size() - off >= 64) {
    st.process_block(reinterpret_cast<const unsigned char*>(bytes.data()) + off);
    off += 64;
  }

  unsigned char tail[128];
  const std::size_t rem = bytes.size() - off;
  std::memcpy(tail, bytes.data() + off, rem);
  std::size_t n = rem;
  tail[n++] = 0x80;
  while (n % 64 != 56) tail[n++] = 0;
  for (int i = 7; i >= 0; --i) tail[n++] = static_cast<unsigned char>(bit_len >> (8 * i));
  for (std::size_t i = 0; i < n; i += 64) st.process_block(tail + i);

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(40);
  for (std::uint32_t word : st.h) {
    for (int i = 7; i >= 0; --i) out.push_back(hex[(word >> (4 * i)) & 0xF]);
  }
  return out;
}

}  // namespace wsntpc
