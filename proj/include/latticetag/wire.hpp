#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "latticetag/bitio.hpp"
#include "latticetag/errors.hpp"
#include "latticetag/hash.hpp"
#include "latticetag/params.hpp"
#include "latticetag/protocol.hpp"

namespace latticetag {

// Frame layout (see docs/wire-format.md):
//   byte 0      version, always 1
//   byte 1      message type, 1..7 in protocol order
//   bytes 2-3   big-endian code identifying (n, m, q, l)
//   bytes 4..   payload: fields bit-packed in declaration order,
//               residues as ceil(log2 q)-bit MSB-first groups, digests
//               as raw l bits, zero-padded to a byte boundary
inline constexpr std::uint8_t kWireVersion = 1;

// 16-bit fingerprint of (n, m, q, l): the first two bytes of the SHA-256
// of "LTPT" followed by the four values as big-endian u32.
inline std::uint16_t params_tag(const Params& prm) {
  std::vector<std::uint8_t> buf{'L', 'T', 'P', 'T'};
  for (std::uint32_t v : {prm.n, prm.m, prm.q, prm.l}) {
    buf.push_back(static_cast<std::uint8_t>(v >> 24));
    buf.push_back(static_cast<std::uint8_t>(v >> 16));
    buf.push_back(static_cast<std::uint8_t>(v >> 8));
    buf.push_back(static_cast<std::uint8_t>(v));
  }
  auto digest = detail::sha256(buf);
  return static_cast<std::uint16_t>((digest[0] << 8) | digest[1]);
}

namespace wire_detail {

inline void put_vector(BitWriter& w, const ZqVector& v, const Params& prm) {
  if (v.size() != prm.m || v.modulus() != prm.q) {
    throw DimensionMismatch("vector field disagrees with params");
  }
  const std::uint32_t bits = prm.bits_per_residue();
  for (std::size_t i = 0; i < v.size(); ++i) w.put(v[i], bits);
}

inline void put_digest(BitWriter& w, const Digest& d, const Params& prm) {
  if (d.bytes.size() != prm.digest_bytes()) {
    throw DimensionMismatch("digest length disagrees with params");
  }
  w.put_bytes(d.bytes);
}

inline ZqVector get_vector(BitReader& r, const Params& prm) {
  const std::uint32_t bits = prm.bits_per_residue();
  std::vector<Residue> elems(prm.m);
  for (auto& e : elems) {
    const std::uint32_t v = r.get(bits);
    if (v >= prm.q) throw MalformedFrame("residue out of range");
    e = static_cast<Residue>(v);
  }
  return ZqVector(std::move(elems), prm.q);
}

inline Digest get_digest(BitReader& r, const Params& prm) {
  return Digest{r.get_bytes(prm.digest_bytes())};
}

inline Residue get_residue(BitReader& r, const Params& prm) {
  const std::uint32_t v = r.get(prm.bits_per_residue());
  if (v >= prm.q) throw MalformedFrame("residue out of range");
  return static_cast<Residue>(v);
}

}  // namespace wire_detail

inline std::vector<std::uint8_t> encode(const Message& msg, const Params& prm) {
  BitWriter w;
  const std::uint32_t rb = prm.bits_per_residue();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Query>) {
          w.put(m.alpha, rb);
        } else if constexpr (std::is_same_v<T, TagCommit>) {
          wire_detail::put_vector(w, m.beta, prm);
          wire_detail::put_vector(w, m.c1, prm);
          wire_detail::put_vector(w, m.c3, prm);
          wire_detail::put_digest(w, m.c2, prm);
        } else if constexpr (std::is_same_v<T, ReaderCommit>) {
          w.put(m.alpha, rb);
          w.put(m.gamma, rb);
          wire_detail::put_vector(w, m.beta, prm);
          wire_detail::put_vector(w, m.c1, prm);
          wire_detail::put_vector(w, m.c3, prm);
          wire_detail::put_vector(w, m.delta, prm);
          wire_detail::put_vector(w, m.c6, prm);
          wire_detail::put_vector(w, m.c8, prm);
          wire_detail::put_digest(w, m.c2, prm);
          wire_detail::put_digest(w, m.c7, prm);
        } else if constexpr (std::is_same_v<T, ServerChallenge>) {
          wire_detail::put_vector(w, m.c11, prm);
        } else if constexpr (std::is_same_v<T, ReaderProof>) {
          wire_detail::put_digest(w, m.c13, prm);
        } else if constexpr (std::is_same_v<T, ServerConfirm>) {
          wire_detail::put_digest(w, m.c14, prm);
          wire_detail::put_digest(w, m.c15, prm);
        } else if constexpr (std::is_same_v<T, TagConfirm>) {
          wire_detail::put_digest(w, m.c14, prm);
        }
      },
      msg);
  w.pad_to_byte();

  const std::uint16_t tag = params_tag(prm);
  std::vector<std::uint8_t> frame;
  frame.reserve(4 + w.bytes().size());
  frame.push_back(kWireVersion);
  frame.push_back(message_type(msg));
  frame.push_back(static_cast<std::uint8_t>(tag >> 8));
  frame.push_back(static_cast<std::uint8_t>(tag & 0xff));
  auto payload = w.take();
  frame.insert(frame.end(), payload.begin(), payload.end());
  return frame;
}

inline Message decode(std::span<const std::uint8_t> frame, const Params& prm) {
  if (frame.size() < 4) throw MalformedFrame("frame shorter than header");
  if (frame[0] != kWireVersion) throw MalformedFrame("bad version byte");
  const std::uint8_t type = frame[1];
  if (type < 1 || type > 7) throw MalformedFrame("bad message type");
  const std::uint16_t tag =
      static_cast<std::uint16_t>((frame[2] << 8) | frame[3]);
  if (tag != params_tag(prm)) {
    throw DimensionMismatch("frame params code disagrees with expected params");
  }

  BitReader r(frame.data() + 4, frame.size() - 4);
  Message msg;
  try {
    switch (type) {
      case 1:
        msg = Query{wire_detail::get_residue(r, prm)};
        break;
      case 2: {
        TagCommit m;
        m.beta = wire_detail::get_vector(r, prm);
        m.c1 = wire_detail::get_vector(r, prm);
        m.c3 = wire_detail::get_vector(r, prm);
        m.c2 = wire_detail::get_digest(r, prm);
        msg = std::move(m);
        break;
      }
      case 3: {
        ReaderCommit m;
        m.alpha = wire_detail::get_residue(r, prm);
        m.gamma = wire_detail::get_residue(r, prm);
        m.beta = wire_detail::get_vector(r, prm);
        m.c1 = wire_detail::get_vector(r, prm);
        m.c3 = wire_detail::get_vector(r, prm);
        m.delta = wire_detail::get_vector(r, prm);
        m.c6 = wire_detail::get_vector(r, prm);
        m.c8 = wire_detail::get_vector(r, prm);
        m.c2 = wire_detail::get_digest(r, prm);
        m.c7 = wire_detail::get_digest(r, prm);
        msg = std::move(m);
        break;
      }
      case 4:
        msg = ServerChallenge{wire_detail::get_vector(r, prm)};
        break;
      case 5:
        msg = ReaderProof{wire_detail::get_digest(r, prm)};
        break;
      case 6: {
        ServerConfirm m;
        m.c14 = wire_detail::get_digest(r, prm);
        m.c15 = wire_detail::get_digest(r, prm);
        msg = std::move(m);
        break;
      }
      case 7:
        msg = TagConfirm{wire_detail::get_digest(r, prm)};
        break;
    }
    r.skip_zero_padding_to_byte();
  } catch (const FormatError& e) {
    throw MalformedFrame(e.what());
  }
  if (r.bits_left() != 0) throw MalformedFrame("trailing bytes after payload");
  return msg;
}

// Exact pre-padding payload bit count: ceil(log2 q) bits per residue,
// l bits per digest.
inline std::uint64_t measured_bits(const Message& msg, const Params& prm) {
  const std::uint64_t rb = prm.bits_per_residue();
  const std::uint64_t m = prm.m;
  const std::uint64_t l = prm.l;
  return std::visit(
      [&](const auto& v) -> std::uint64_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Query>) {
          return rb;
        } else if constexpr (std::is_same_v<T, TagCommit>) {
          return 3 * m * rb + l;
        } else if constexpr (std::is_same_v<T, ReaderCommit>) {
          return 2 * rb + 6 * m * rb + 2 * l;
        } else if constexpr (std::is_same_v<T, ServerChallenge>) {
          return m * rb;
        } else if constexpr (std::is_same_v<T, ReaderProof>) {
          return l;
        } else if constexpr (std::is_same_v<T, ServerConfirm>) {
          return 2 * l;
        } else {
          return l;  // TagConfirm
        }
      },
      msg);
}

}  // namespace latticetag
