#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "latticetag/bitio.hpp"
#include "latticetag/errors.hpp"
#include "latticetag/params.hpp"
#include "latticetag/rng.hpp"
#include "latticetag/zq.hpp"

namespace latticetag {

enum class Role : std::uint8_t { Tag = 0, Reader = 1 };

inline const char* role_name(Role r) {
  return r == Role::Tag ? "tag" : "reader";
}

// Device-side secret material: identity x, masking permutation P,
// matrix key A, and the derived syndrome y = A*x mod q.
struct Credential {
  Role role = Role::Tag;
  Params params;
  ZqVector x;
  Permutation perm;
  ZqMatrix a;
  ZqVector y;

  void check() const {
    params.validate();
    if (x.size() != params.m || y.size() != params.n ||
        perm.size() != params.m || a.rows() != params.n ||
        a.cols() != params.m) {
      throw InvalidCredential("credential dimensions disagree with params");
    }
    if (x.is_zero()) throw InvalidCredential("identity vector is zero");
    if (norm_p(x, params.p) > params.sigma + 1e-9) {
      throw InvalidCredential("identity norm exceeds sigma");
    }
    if (mat_vec_mul(a, x) != y) {
      throw InvalidCredential("A*x != y");
    }
  }

  bool operator==(const Credential&) const = default;
};

// Identity sampled uniformly from nonzero {0,1}^m, A uniform over
// Z_q^{n x m}, P a uniform permutation, y derived as A*x. A zero
// syndrome would make the challenge term y*alpha vacuous, so y = 0 is
// resampled away (probability q^-n per draw).
inline Credential generate_credential(const Params& raw, Role role, Rng& rng) {
  const Params params = raw.validated();
  Credential cred;
  cred.role = role;
  cred.params = params;
  for (;;) {
    cred.x = sample_binary_vector(rng, params.m, params.q);
    if (cred.x.is_zero()) continue;
    cred.a = sample_zq_matrix(rng, params.n, params.m, params.q);
    cred.y = mat_vec_mul(cred.a, cred.x);
    if (!cred.y.is_zero()) break;
  }
  cred.perm = sample_permutation(rng, params.m);
  cred.check();
  return cred;
}

using DeviceHandle = std::uint32_t;

// What the server keeps per registered device. A itself is not needed
// at verification time; A*P^-1 is precomputed instead.
struct RegistryRecord {
  DeviceHandle handle = 0;
  Role role = Role::Tag;
  ZqVector x;
  Permutation perm;
  Permutation perm_inv;
  ZqVector y;
  ZqMatrix a_perm_inv;
};

class ServerRegistry {
 public:
  explicit ServerRegistry(const Params& params) : params_(params.validated()) {}

  const Params& params() const { return params_; }

  // Verifies the credential, precomputes P^-1 and A*P^-1, and probes the
  // precomputation against the original A on 8 random vectors.
  DeviceHandle register_credential(const Credential& cred) {
    if (cred.params != params_) {
      throw InvalidCredential("credential params disagree with registry");
    }
    cred.check();

    RegistryRecord rec;
    rec.handle = next_handle_++;
    rec.role = cred.role;
    rec.x = cred.x;
    rec.perm = cred.perm;
    rec.perm_inv = perm_invert(cred.perm);
    rec.y = cred.y;
    rec.a_perm_inv = mat_mul_perm(cred.a, rec.perm_inv);

    Rng probe_rng(probe_seed(rec.handle));
    for (int i = 0; i < 8; ++i) {
      ZqVector v = sample_zq_vector(probe_rng, params_.m, params_.q);
      if (mat_vec_mul(rec.a_perm_inv, perm_apply(cred.perm, v)) !=
          mat_vec_mul(cred.a, v)) {
        throw InvalidCredential("A*P^-1 precomputation probe failed");
      }
    }

    records(cred.role).push_back(std::move(rec));
    return records(cred.role).back().handle;
  }

  const std::vector<RegistryRecord>& tags() const { return tags_; }
  const std::vector<RegistryRecord>& readers() const { return readers_; }

  const RegistryRecord& by_handle(DeviceHandle h) const {
    for (const auto& r : tags_) {
      if (r.handle == h) return r;
    }
    for (const auto& r : readers_) {
      if (r.handle == h) return r;
    }
    throw ParameterError("unknown device handle " + std::to_string(h));
  }

 private:
  std::vector<RegistryRecord>& records(Role role) {
    return role == Role::Tag ? tags_ : readers_;
  }

  static Seed probe_seed(DeviceHandle h) {
    Seed s;
    const char* label = "registry-probe";
    std::memcpy(s.bytes.data(), label, 14);
    s.bytes[28] = static_cast<std::uint8_t>(h >> 24);
    s.bytes[29] = static_cast<std::uint8_t>(h >> 16);
    s.bytes[30] = static_cast<std::uint8_t>(h >> 8);
    s.bytes[31] = static_cast<std::uint8_t>(h);
    return s;
  }

  Params params_;
  std::vector<RegistryRecord> tags_;
  std::vector<RegistryRecord> readers_;
  DeviceHandle next_handle_ = 1;
};

// ---------------------------------------------------------------------------
// Credential file format ("LTC1"):
//   magic "LTC1" | role u8 | n u32 | m u32 | q u32 | l u32 | p u16
//   | sigma f64 | x as m bits | perm as m ceil(log2 m)-bit indices
//   | A as n*m u16 | y as n u16
// All integers big-endian; bit fields MSB-first, zero-padded to a byte.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 7; i >= 0; --i) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

class ByteCursor {
 public:
  ByteCursor(const std::uint8_t* data, std::size_t size)
      : data_(data), size_(size) {}

  std::uint8_t u8() { return *take(1); }

  std::uint16_t u16() {
    const std::uint8_t* p = take(2);
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
  }

  std::uint32_t u32() {
    const std::uint8_t* p = take(4);
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) |
           static_cast<std::uint32_t>(p[3]);
  }

  double f64() {
    const std::uint8_t* p = take(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits = (bits << 8) | p[i];
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  const std::uint8_t* take(std::size_t n) {
    if (pos_ + n > size_) throw FormatError("file truncated");
    const std::uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  std::size_t remaining() const { return size_ - pos_; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline void encode_credential(std::vector<std::uint8_t>& out,
                              const Credential& cred) {
  const Params& prm = cred.params;
  out.insert(out.end(), {'L', 'T', 'C', '1'});
  out.push_back(static_cast<std::uint8_t>(cred.role));
  put_u32(out, prm.n);
  put_u32(out, prm.m);
  put_u32(out, prm.q);
  put_u32(out, prm.l);
  put_u16(out, prm.p);
  put_f64(out, prm.sigma);

  if (!cred.x.is_binary()) {
    throw FormatError("credential file stores x as bits; x is not binary");
  }
  BitWriter xs;
  for (std::size_t i = 0; i < cred.x.size(); ++i) xs.put(cred.x[i], 1);
  xs.pad_to_byte();
  auto xb = xs.take();
  out.insert(out.end(), xb.begin(), xb.end());

  BitWriter ps;
  const std::uint32_t idx_bits = prm.bits_per_perm_index();
  for (std::size_t i = 0; i < cred.perm.size(); ++i) {
    ps.put(cred.perm.target(i), idx_bits);
  }
  ps.pad_to_byte();
  auto pb = ps.take();
  out.insert(out.end(), pb.begin(), pb.end());

  for (Residue r : cred.a.elems()) put_u16(out, r);
  for (std::size_t i = 0; i < cred.y.size(); ++i) put_u16(out, cred.y[i]);
}

inline Credential decode_credential(ByteCursor& cur) {
  const std::uint8_t* magic = cur.take(4);
  if (std::memcmp(magic, "LTC1", 4) != 0) {
    throw FormatError("bad credential magic");
  }
  const std::uint8_t role_byte = cur.u8();
  if (role_byte > 1) throw FormatError("bad role byte");

  Params prm;
  prm.n = cur.u32();
  prm.m = cur.u32();
  prm.q = cur.u32();
  prm.l = cur.u32();
  prm.p = cur.u16();
  prm.sigma = cur.f64();
  try {
    prm.validate();
  } catch (const ParameterError& e) {
    throw FormatError(std::string("bad stored params: ") + e.what());
  }

  Credential cred;
  cred.role = static_cast<Role>(role_byte);
  cred.params = prm;

  {
    const std::size_t nbytes = (prm.m + 7) / 8;
    BitReader br(cur.take(nbytes), nbytes);
    std::vector<Residue> xe(prm.m);
    for (auto& e : xe) e = static_cast<Residue>(br.get(1));
    br.skip_zero_padding_to_byte();
    cred.x = ZqVector(std::move(xe), prm.q);
  }
  {
    const std::uint32_t idx_bits = prm.bits_per_perm_index();
    const std::size_t nbytes = (std::size_t{prm.m} * idx_bits + 7) / 8;
    BitReader br(cur.take(nbytes), nbytes);
    std::vector<std::uint32_t> map(prm.m);
    for (auto& t : map) t = br.get(idx_bits);
    br.skip_zero_padding_to_byte();
    try {
      cred.perm = Permutation(std::move(map));
    } catch (const ParameterError& e) {
      throw FormatError(std::string("bad stored permutation: ") + e.what());
    }
  }
  {
    std::vector<Residue> ae(std::size_t{prm.n} * prm.m);
    for (auto& e : ae) {
      e = cur.u16();
      if (e >= prm.q) throw FormatError("matrix element out of range");
    }
    cred.a = ZqMatrix(prm.n, prm.m, std::move(ae), prm.q);
  }
  {
    std::vector<Residue> ye(prm.n);
    for (auto& e : ye) {
      e = cur.u16();
      if (e >= prm.q) throw FormatError("y element out of range");
    }
    cred.y = ZqVector(std::move(ye), prm.q);
  }

  try {
    cred.check();
  } catch (const InvalidCredential& e) {
    throw FormatError(std::string("stored credential is inconsistent: ") +
                      e.what());
  }
  return cred;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace detail

inline void save_credential(const Credential& cred,
                            const std::filesystem::path& path) {
  cred.check();
  std::vector<std::uint8_t> out;
  detail::encode_credential(out, cred);
  detail::write_file(path, out);
}

inline Credential load_credential(const std::filesystem::path& path) {
  auto bytes = detail::read_file(path);
  detail::ByteCursor cur(bytes.data(), bytes.size());
  Credential cred = detail::decode_credential(cur);
  if (cur.remaining() != 0) throw FormatError("trailing bytes after credential");
  return cred;
}

// Registry file ("LTR1"): tag count u32, tag credential blocks, reader
// count u32, reader credential blocks. Records are rebuilt (and
// re-verified) from the stored credentials at load time.
struct RegistryFile {
  std::vector<Credential> tags;
  std::vector<Credential> readers;
};

inline void save_registry(const RegistryFile& reg,
                          const std::filesystem::path& path) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'L', 'T', 'R', '1'});
  detail::put_u32(out, static_cast<std::uint32_t>(reg.tags.size()));
  for (const auto& c : reg.tags) {
    if (c.role != Role::Tag) throw FormatError("non-tag credential in tag list");
    detail::encode_credential(out, c);
  }
  detail::put_u32(out, static_cast<std::uint32_t>(reg.readers.size()));
  for (const auto& c : reg.readers) {
    if (c.role != Role::Reader) {
      throw FormatError("non-reader credential in reader list");
    }
    detail::encode_credential(out, c);
  }
  detail::write_file(path, out);
}

inline RegistryFile load_registry_file(const std::filesystem::path& path) {
  auto bytes = detail::read_file(path);
  detail::ByteCursor cur(bytes.data(), bytes.size());
  const std::uint8_t* magic = cur.take(4);
  if (std::memcmp(magic, "LTR1", 4) != 0) {
    throw FormatError("bad registry magic");
  }
  RegistryFile reg;
  const std::uint32_t n_tags = cur.u32();
  for (std::uint32_t i = 0; i < n_tags; ++i) {
    reg.tags.push_back(detail::decode_credential(cur));
    if (reg.tags.back().role != Role::Tag) {
      throw FormatError("tag block has reader role");
    }
  }
  const std::uint32_t n_readers = cur.u32();
  for (std::uint32_t i = 0; i < n_readers; ++i) {
    reg.readers.push_back(detail::decode_credential(cur));
    if (reg.readers.back().role != Role::Reader) {
      throw FormatError("reader block has tag role");
    }
  }
  if (cur.remaining() != 0) throw FormatError("trailing bytes after registry");
  return reg;
}

inline ServerRegistry build_registry(const RegistryFile& file) {
  if (file.tags.empty() && file.readers.empty()) {
    throw FormatError("registry file holds no credentials");
  }
  const Params& prm =
      file.tags.empty() ? file.readers.front().params : file.tags.front().params;
  ServerRegistry reg(prm);
  for (const auto& c : file.tags) reg.register_credential(c);
  for (const auto& c : file.readers) reg.register_credential(c);
  return reg;
}

}  // namespace latticetag
