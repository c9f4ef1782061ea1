#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>

#include "latticetag/errors.hpp"

namespace latticetag {

// 32-byte seed, the unit of reproducibility for every randomized step.
struct Seed {
  std::array<std::uint8_t, 32> bytes{};

  static Seed from_hex(const std::string& hex) {
    if (hex.size() != 64) {
      throw ParameterError("seed must be 64 hex characters");
    }
    Seed s;
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw ParameterError("seed contains a non-hex character");
    };
    for (std::size_t i = 0; i < 32; ++i) {
      s.bytes[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) |
                                             nibble(hex[2 * i + 1]));
    }
    return s;
  }

  static Seed from_entropy() {
    std::random_device rd;
    Seed s;
    for (std::size_t i = 0; i < 32; i += 4) {
      std::uint32_t w = rd();
      s.bytes[i] = static_cast<std::uint8_t>(w >> 24);
      s.bytes[i + 1] = static_cast<std::uint8_t>(w >> 16);
      s.bytes[i + 2] = static_cast<std::uint8_t>(w >> 8);
      s.bytes[i + 3] = static_cast<std::uint8_t>(w);
    }
    return s;
  }

  std::string to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : bytes) {
      out.push_back(digits[b >> 4]);
      out.push_back(digits[b & 0x0f]);
    }
    return out;
  }

  bool operator==(const Seed&) const = default;
};

// Deterministic random stream. mt19937_64 is fully specified by the
// standard, so identical seeds give identical sequences on every
// platform. Single-owner: concurrent sessions each get their own
// instance (use fork()).
class Rng {
 public:
  explicit Rng(const Seed& seed) {
    std::array<std::uint32_t, 8> words{};
    for (std::size_t i = 0; i < 8; ++i) {
      words[i] = (static_cast<std::uint32_t>(seed.bytes[4 * i]) << 24) |
                 (static_cast<std::uint32_t>(seed.bytes[4 * i + 1]) << 16) |
                 (static_cast<std::uint32_t>(seed.bytes[4 * i + 2]) << 8) |
                 static_cast<std::uint32_t>(seed.bytes[4 * i + 3]);
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased draw in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw ParameterError("Rng::below requires bound > 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % bound;
  }

  // Derive an independent child stream.
  Seed fork() {
    Seed s;
    for (std::size_t i = 0; i < 32; i += 8) {
      std::uint64_t w = next_u64();
      for (std::size_t j = 0; j < 8; ++j) {
        s.bytes[i + j] = static_cast<std::uint8_t>(w >> (56 - 8 * j));
      }
    }
    return s;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace latticetag
