#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "latticetag/errors.hpp"

namespace latticetag {

// Scheme parameters: A is n x m over Z_q, identities live in {0,1}^m
// with ||x||_p <= sigma, digests are l bits.
struct Params {
  std::uint32_t n = 64;
  std::uint32_t m = 2048;
  std::uint32_t q = 257;
  std::uint16_t p = 2;
  double sigma = 0.0;  // 0 means "default to sqrt(m)" at validation
  std::uint32_t l = 256;

  static Params headline() { return Params{}.validated(); }

  static Params toy() {
    Params prm;
    prm.n = 2;
    prm.m = 8;
    prm.q = 17;
    prm.l = 256;
    return prm.validated();
  }

  Params validated() const {
    Params out = *this;
    if (out.sigma == 0.0) out.sigma = std::sqrt(static_cast<double>(out.m));
    out.validate();
    return out;
  }

  void validate() const {
    if (n < 1) throw ParameterError("n must be >= 1");
    if (m <= n) throw ParameterError("m must exceed n");
    if (m > (1u << 20)) throw ParameterError("m must be <= 2^20");
    if (!is_prime(q)) throw ParameterError("q must be prime");
    if (q < 2 || q > 65521) throw ParameterError("q must fit in 16 bits");
    if (l < 128 || l > 256 || l % 8 != 0) {
      throw ParameterError("l must be a multiple of 8 in [128, 256]");
    }
    if (p < 1) throw ParameterError("p must be >= 1");
    if (sigma <= 0.0) throw ParameterError("sigma must be positive");
  }

  std::uint32_t digest_bytes() const { return l / 8; }

  // Whole bits needed to carry one residue (9 for q=257).
  std::uint32_t bits_per_residue() const {
    std::uint32_t bits = 0;
    std::uint32_t v = q - 1;
    while (v != 0) {
      ++bits;
      v >>= 1;
    }
    return bits == 0 ? 1 : bits;
  }

  std::uint32_t bits_per_perm_index() const {
    std::uint32_t bits = 0;
    std::uint32_t v = m - 1;
    while (v != 0) {
      ++bits;
      v >>= 1;
    }
    return bits == 0 ? 1 : bits;
  }

  bool operator==(const Params&) const = default;

 private:
  static bool is_prime(std::uint32_t v) {
    if (v < 2) return false;
    for (std::uint32_t d = 2; d * d <= v; ++d) {
      if (v % d == 0) return false;
    }
    return true;
  }
};

}  // namespace latticetag
