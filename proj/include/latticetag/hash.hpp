#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <string>
#include <vector>

#include "latticetag/errors.hpp"
#include "latticetag/opcount.hpp"
#include "latticetag/params.hpp"
#include "latticetag/zq.hpp"

namespace latticetag {

// Output of the fixed-length hash H1: exactly l/8 bytes.
struct Digest {
  std::vector<std::uint8_t> bytes;
  bool operator==(const Digest&) const = default;
};

// Ordered multi-component hash input with an injective byte encoding:
// a 4-byte big-endian component count, then per component a 1-byte kind
// tag, a 4-byte big-endian element count, and each residue as 2 bytes
// big-endian. Length prefixes rule out concatenation ambiguity across
// component boundaries.
class HashInput {
 public:
  enum class Kind : std::uint8_t { Vector = 1, Scalar = 2 };

  struct Component {
    Kind kind;
    std::vector<Residue> elems;
    bool operator==(const Component&) const = default;
  };

  HashInput& add(const ZqVector& v) {
    components_.push_back({Kind::Vector, v.elems()});
    return *this;
  }

  HashInput& add_scalar(Residue r) {
    components_.push_back({Kind::Scalar, {r}});
    return *this;
  }

  const std::vector<Component>& components() const { return components_; }
  bool empty() const { return components_.empty(); }

  std::size_t residue_count() const {
    std::size_t total = 0;
    for (const auto& c : components_) total += c.elems.size();
    return total;
  }

  std::vector<std::uint8_t> encode() const {
    std::vector<std::uint8_t> out;
    append_u32(out, static_cast<std::uint32_t>(components_.size()));
    for (const auto& c : components_) {
      out.push_back(static_cast<std::uint8_t>(c.kind));
      append_u32(out, static_cast<std::uint32_t>(c.elems.size()));
      for (Residue r : c.elems) {
        out.push_back(static_cast<std::uint8_t>(r >> 8));
        out.push_back(static_cast<std::uint8_t>(r & 0xff));
      }
    }
    return out;
  }

  static HashInput decode(const std::vector<std::uint8_t>& bytes) {
    HashInput in;
    std::size_t pos = 0;
    const std::uint32_t count = read_u32(bytes, pos);
    for (std::uint32_t i = 0; i < count; ++i) {
      if (pos >= bytes.size()) throw FormatError("hash input truncated");
      const std::uint8_t kind = bytes[pos++];
      if (kind != 1 && kind != 2) throw FormatError("bad component kind");
      const std::uint32_t len = read_u32(bytes, pos);
      if (kind == 2 && len != 1) throw FormatError("scalar must have 1 element");
      Component c{static_cast<Kind>(kind), {}};
      c.elems.reserve(len);
      for (std::uint32_t j = 0; j < len; ++j) {
        if (pos + 2 > bytes.size()) throw FormatError("hash input truncated");
        c.elems.push_back(static_cast<Residue>(
            (static_cast<std::uint16_t>(bytes[pos]) << 8) | bytes[pos + 1]));
        pos += 2;
      }
      in.components_.push_back(std::move(c));
    }
    if (pos != bytes.size()) throw FormatError("trailing bytes in hash input");
    return in;
  }

  bool operator==(const HashInput&) const = default;

 private:
  static void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  }

  static std::uint32_t read_u32(const std::vector<std::uint8_t>& b,
                                std::size_t& pos) {
    if (pos + 4 > b.size()) throw FormatError("hash input truncated");
    std::uint32_t v = (static_cast<std::uint32_t>(b[pos]) << 24) |
                      (static_cast<std::uint32_t>(b[pos + 1]) << 16) |
                      (static_cast<std::uint32_t>(b[pos + 2]) << 8) |
                      static_cast<std::uint32_t>(b[pos + 3]);
    pos += 4;
    return v;
  }

  std::vector<Component> components_;
};

namespace detail {

inline void evp_check(int rc, const char* what) {
  if (rc != 1) throw Error(std::string("OpenSSL failure in ") + what);
}

inline std::vector<std::uint8_t> sha256(const std::vector<std::uint8_t>& in) {
  std::vector<std::uint8_t> out(32);
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw Error("EVP_MD_CTX_new failed");
  evp_check(EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr), "DigestInit");
  evp_check(EVP_DigestUpdate(ctx, in.data(), in.size()), "DigestUpdate");
  evp_check(EVP_DigestFinal_ex(ctx, out.data(), &len), "DigestFinal");
  EVP_MD_CTX_free(ctx);
  out.resize(len);
  return out;
}

inline std::vector<std::uint8_t> shake256(const std::vector<std::uint8_t>& in,
                                          std::size_t out_len) {
  std::vector<std::uint8_t> out(out_len);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw Error("EVP_MD_CTX_new failed");
  evp_check(EVP_DigestInit_ex(ctx, EVP_shake256(), nullptr), "DigestInit");
  evp_check(EVP_DigestUpdate(ctx, in.data(), in.size()), "DigestUpdate");
  evp_check(EVP_DigestFinalXOF(ctx, out.data(), out_len), "DigestFinalXOF");
  EVP_MD_CTX_free(ctx);
  return out;
}

}  // namespace detail

// H1: l-bit digest of the canonical encoding, domain-separated from H2
// by a leading ASCII '1'. Instantiated as SHA-256 truncated to l bits.
inline Digest h1(const HashInput& input, const Params& params) {
  if (input.empty()) throw ParameterError("h1 requires a nonempty input");
  std::vector<std::uint8_t> msg;
  msg.push_back('1');
  auto enc = input.encode();
  msg.insert(msg.end(), enc.begin(), enc.end());
  auto full = detail::sha256(msg);
  full.resize(params.digest_bytes());
  ops::charge(input.residue_count());
  return Digest{std::move(full)};
}

inline Digest h1(const ZqVector& v, const Params& params) {
  return h1(HashInput().add(v), params);
}

// H2: expands a length-n vector to m-n uniform residues. SHAKE-256 over
// the '2'-tagged encoding; 2-byte chunks c are accepted when
// c < q * floor(65536 / q) and reduced mod q, so the output is exactly
// uniform. The XOF stream is a prefix of any longer request, so growing
// the buffer on rejection overflow never changes already-drawn values.
inline ZqVector h2(const ZqVector& v, const Params& params) {
  if (v.size() != params.n) {
    throw DimensionMismatch("h2 input must have length n=" +
                            std::to_string(params.n));
  }
  std::vector<std::uint8_t> msg;
  msg.push_back('2');
  auto enc = HashInput().add(v).encode();
  msg.insert(msg.end(), enc.begin(), enc.end());

  const std::size_t want = params.m - params.n;
  const std::uint32_t q = params.q;
  const std::uint32_t accept_below = q * (65536u / q);
  std::vector<Residue> out;
  out.reserve(want);
  std::size_t stream_len = 2 * want + 16;
  for (;;) {
    out.clear();
    auto stream = detail::shake256(msg, stream_len);
    for (std::size_t i = 0; i + 2 <= stream.size() && out.size() < want;
         i += 2) {
      const std::uint32_t c = (static_cast<std::uint32_t>(stream[i]) << 8) |
                              stream[i + 1];
      if (c < accept_below) out.push_back(static_cast<Residue>(c % q));
    }
    if (out.size() == want) break;
    stream_len *= 2;
  }
  ops::charge(params.m);
  return ZqVector(std::move(out), q);
}

inline ZqVector concat(const ZqVector& a, const ZqVector& b) {
  if (a.modulus() != b.modulus()) {
    throw DimensionMismatch("concat: moduli differ");
  }
  std::vector<Residue> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.elems().begin(), a.elems().end());
  out.insert(out.end(), b.elems().begin(), b.elems().end());
  return ZqVector(std::move(out), a.modulus());
}

}  // namespace latticetag
