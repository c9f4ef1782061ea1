#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "latticetag/credentials.hpp"
#include "latticetag/errors.hpp"
#include "latticetag/opcount.hpp"
#include "latticetag/protocol.hpp"
#include "latticetag/rng.hpp"
#include "latticetag/wire.hpp"

namespace latticetag {

// ---------------------------------------------------------------------------
// Channels. Both hops are separately attackable; an adversary hook sees
// a copy of each frame in flight and may pass, modify, or drop it.
// ---------------------------------------------------------------------------

enum class ChannelId { TagReader, ReaderServer };

enum class Direction { ReaderToTag, TagToReader, ReaderToServer, ServerToReader };

inline const char* direction_name(Direction d) {
  switch (d) {
    case Direction::ReaderToTag: return "reader->tag";
    case Direction::TagToReader: return "tag->reader";
    case Direction::ReaderToServer: return "reader->server";
    case Direction::ServerToReader: return "server->reader";
  }
  return "?";
}

struct FrameRecord {
  ChannelId channel = ChannelId::TagReader;
  Direction dir = Direction::ReaderToTag;
  std::uint8_t msg_type = 0;
  std::vector<std::uint8_t> bytes;
  std::uint64_t payload_bits = 0;  // pre-padding bits of the payload
};

using Transcript = std::vector<FrameRecord>;

class Channel {
 public:
  // Returns the bytes to deliver, or nullopt to drop the frame.
  using Hook =
      std::function<std::optional<std::vector<std::uint8_t>>(const FrameRecord&)>;

  explicit Channel(ChannelId id) : id_(id) {}

  ChannelId id() const { return id_; }
  void set_hook(Hook hook) { hook_ = std::move(hook); }
  const Transcript& log() const { return log_; }

  std::optional<std::vector<std::uint8_t>> transmit(FrameRecord rec) {
    log_.push_back(rec);
    if (!hook_) return std::move(rec.bytes);
    return hook_(log_.back());
  }

 private:
  ChannelId id_;
  Hook hook_;
  Transcript log_;
};

// First logged frame of the given type; scripts use this to reference
// material they claim to have observed.
inline const FrameRecord& find_frame(const Transcript& t, std::uint8_t type) {
  for (const auto& rec : t) {
    if (rec.msg_type == type) return rec;
  }
  throw ScriptError(std::string("no frame of type ") + message_name(type) +
                    " in transcript");
}

// ---------------------------------------------------------------------------
// Pluggable role actors. Honest actors wrap the protocol step
// functions; scenarios substitute adversarial ones.
// ---------------------------------------------------------------------------

struct TagActor {
  std::function<TagCommit(const Query&)> commit;
  std::function<AuthOutcome(const TagConfirm&)> finalize;
};

struct ReaderActor {
  std::function<Query()> begin;
  std::function<ReaderCommit(const TagCommit&)> commit;
  std::function<ReaderProof(const ServerChallenge&)> prove;
  std::function<std::variant<TagConfirm, AuthOutcome>(const ServerConfirm&)>
      finalize;
};

struct ServerActor {
  std::function<std::variant<ServerChallenge, AuthOutcome>(const ReaderCommit&)>
      process;
  std::function<std::variant<ServerConfirm, AuthOutcome>(const ReaderProof&)>
      confirm;
  std::function<SessionStats()> stats;
};

inline TagActor honest_tag(const Credential& cred, Rng& rng) {
  auto session = std::make_shared<std::optional<TagSession>>();
  TagActor actor;
  actor.commit = [&cred, &rng, session](const Query& q) {
    auto res = tag_commit(cred, q, rng);
    *session = std::move(res.session);
    return res.msg;
  };
  actor.finalize = [&cred, session](const TagConfirm& tc) {
    if (!session->has_value()) throw StateError("tag never committed");
    return tag_finalize(**session, tc, cred.params);
  };
  return actor;
}

inline ReaderActor honest_reader(const Credential& cred, Rng& rng) {
  auto alpha = std::make_shared<Residue>(0);
  auto session = std::make_shared<std::optional<ReaderSession>>();
  ReaderActor actor;
  actor.begin = [&cred, &rng, alpha]() {
    auto res = reader_begin(rng, cred.params);
    *alpha = res.alpha;
    return res.msg;
  };
  actor.commit = [&cred, &rng, alpha, session](const TagCommit& tc) {
    auto res = reader_commit(cred, *alpha, tc, rng);
    *session = std::move(res.session);
    return res.msg;
  };
  actor.prove = [&cred, session](const ServerChallenge& ch) {
    if (!session->has_value()) throw StateError("reader never committed");
    return reader_prove(cred, **session, ch);
  };
  actor.finalize = [&cred, session](const ServerConfirm& sc) {
    if (!session->has_value()) throw StateError("reader never committed");
    return reader_finalize(**session, sc, cred.params);
  };
  return actor;
}

inline ServerActor honest_server(const ServerRegistry& registry, Rng& rng) {
  auto session = std::make_shared<std::optional<ServerSession>>();
  ServerActor actor;
  actor.process = [&registry, &rng, session](const ReaderCommit& rc)
      -> std::variant<ServerChallenge, AuthOutcome> {
    auto res = server_process_commit(registry, rc, rng);
    if (auto* ok = std::get_if<ServerChallengeResult>(&res)) {
      *session = std::move(ok->session);
      return std::move(ok->msg);
    }
    return std::get<AuthOutcome>(res);
  };
  actor.confirm = [&registry, session](const ReaderProof& pr)
      -> std::variant<ServerConfirm, AuthOutcome> {
    if (!session->has_value()) throw StateError("server never processed commit");
    return server_confirm(registry, **session, pr);
  };
  actor.stats = [session]() {
    return session->has_value() ? (*session)->stats : SessionStats{};
  };
  return actor;
}

// ---------------------------------------------------------------------------
// Session driver: runs the eight steps, moving every message through
// its channel as an encoded frame. Both channels are handed in so
// scenarios can pre-install hooks.
// ---------------------------------------------------------------------------

struct SessionResult {
  AuthOutcome outcome;
  Transcript transcript;  // frames as delivered, in order
  SessionStats stats;
};

inline SessionResult drive_session(const Params& prm, TagActor tag,
                                   ReaderActor reader, ServerActor server,
                                   Channel& tr, Channel& rs,
                                   OpCounter* counter = nullptr) {
  SessionResult result;

  auto deliver = [&](Channel& ch, Direction dir,
                     const Message& msg) -> std::optional<Message> {
    FrameRecord rec;
    rec.channel = ch.id();
    rec.dir = dir;
    rec.msg_type = message_type(msg);
    rec.payload_bits = measured_bits(msg, prm);
    rec.bytes = encode(msg, prm);
    auto delivered = ch.transmit(std::move(rec));
    if (!delivered) {
      result.outcome =
          AuthOutcome::fail(FailureReason::Malformed, "frame dropped in transit");
      return std::nullopt;
    }
    FrameRecord seen;
    seen.channel = ch.id();
    seen.dir = dir;
    seen.msg_type = delivered->size() > 1 ? (*delivered)[1] : 0;
    seen.bytes = *delivered;
    Message out;
    try {
      out = decode(*delivered, prm);
    } catch (const Error& e) {
      seen.payload_bits =
          seen.bytes.size() > 4 ? (seen.bytes.size() - 4) * 8 : 0;
      result.transcript.push_back(std::move(seen));
      result.outcome = AuthOutcome::fail(FailureReason::Malformed, e.what());
      return std::nullopt;
    }
    seen.payload_bits = measured_bits(out, prm);
    result.transcript.push_back(std::move(seen));
    return out;
  };

  // Receiving a frame of the wrong kind for the current step is a
  // protocol violation in itself.
  auto expect = [&]<typename T>(std::optional<Message> msg,
                                std::type_identity<T>) -> std::optional<T> {
    if (!msg) return std::nullopt;
    if (auto* v = std::get_if<T>(&*msg)) return std::move(*v);
    result.outcome = AuthOutcome::fail(
        FailureReason::Malformed,
        std::string("unexpected message type ") +
            message_name(message_type(*msg)));
    return std::nullopt;
  };

  // Step 1
  Query query;
  {
    ops::Scope scope(counter, Entity::Reader);
    query = reader.begin();
  }
  auto query_rx =
      expect(deliver(tr, Direction::ReaderToTag, query), std::type_identity<Query>{});
  if (!query_rx) return result;

  // Step 2
  TagCommit tc;
  {
    ops::Scope scope(counter, Entity::Tag);
    tc = tag.commit(*query_rx);
  }
  auto tc_rx =
      expect(deliver(tr, Direction::TagToReader, tc), std::type_identity<TagCommit>{});
  if (!tc_rx) return result;

  // Step 3
  ReaderCommit rc;
  {
    ops::Scope scope(counter, Entity::Reader);
    rc = reader.commit(*tc_rx);
  }
  auto rc_rx = expect(deliver(rs, Direction::ReaderToServer, rc),
                      std::type_identity<ReaderCommit>{});
  if (!rc_rx) return result;

  // Step 4
  std::variant<ServerChallenge, AuthOutcome> challenge_or_fail;
  {
    ops::Scope scope(counter, Entity::Server);
    challenge_or_fail = server.process(*rc_rx);
  }
  if (auto* fail = std::get_if<AuthOutcome>(&challenge_or_fail)) {
    result.outcome = *fail;
    result.stats = server.stats();
    return result;
  }
  auto ch_rx = expect(deliver(rs, Direction::ServerToReader,
                              std::get<ServerChallenge>(challenge_or_fail)),
                      std::type_identity<ServerChallenge>{});
  result.stats = server.stats();
  if (!ch_rx) return result;

  // Step 5
  ReaderProof proof;
  {
    ops::Scope scope(counter, Entity::Reader);
    proof = reader.prove(*ch_rx);
  }
  auto proof_rx = expect(deliver(rs, Direction::ReaderToServer, proof),
                         std::type_identity<ReaderProof>{});
  if (!proof_rx) return result;

  // Step 6
  std::variant<ServerConfirm, AuthOutcome> confirm_or_fail;
  {
    ops::Scope scope(counter, Entity::Server);
    confirm_or_fail = server.confirm(*proof_rx);
  }
  if (auto* fail = std::get_if<AuthOutcome>(&confirm_or_fail)) {
    result.outcome = *fail;
    return result;
  }
  auto confirm_rx = expect(deliver(rs, Direction::ServerToReader,
                                   std::get<ServerConfirm>(confirm_or_fail)),
                           std::type_identity<ServerConfirm>{});
  if (!confirm_rx) return result;

  // Step 7
  std::variant<TagConfirm, AuthOutcome> tag_confirm_or_fail;
  {
    ops::Scope scope(counter, Entity::Reader);
    tag_confirm_or_fail = reader.finalize(*confirm_rx);
  }
  if (auto* fail = std::get_if<AuthOutcome>(&tag_confirm_or_fail)) {
    result.outcome = *fail;
    return result;
  }
  auto tag_confirm_rx = expect(deliver(tr, Direction::ReaderToTag,
                                       std::get<TagConfirm>(tag_confirm_or_fail)),
                               std::type_identity<TagConfirm>{});
  if (!tag_confirm_rx) return result;

  // Step 8
  {
    ops::Scope scope(counter, Entity::Tag);
    result.outcome = tag.finalize(*tag_confirm_rx);
  }
  return result;
}

// Honest end-to-end run over hook-free channels.
inline SessionResult run_honest_session(const ServerRegistry& registry,
                                        const Credential& tag_cred,
                                        const Credential& reader_cred, Rng& rng,
                                        OpCounter* counter = nullptr) {
  Channel tr(ChannelId::TagReader);
  Channel rs(ChannelId::ReaderServer);
  return drive_session(registry.params(), honest_tag(tag_cred, rng),
                       honest_reader(reader_cred, rng),
                       honest_server(registry, rng), tr, rs, counter);
}

// ---------------------------------------------------------------------------
// Field-level tampering helpers, shared by the MITM scenario and the
// exhaustive sweeps in the test suites.
// ---------------------------------------------------------------------------

struct FieldInfo {
  const char* name;
  enum class Kind { Scalar, Vector, Digest } kind;
  std::size_t count;  // elements: 1 for scalars, m for vectors, l/8 for digests
};

inline std::vector<FieldInfo> message_fields(std::uint8_t msg_type,
                                             const Params& prm) {
  using K = FieldInfo::Kind;
  const std::size_t m = prm.m;
  const std::size_t db = prm.digest_bytes();
  switch (msg_type) {
    case 1: return {{"alpha", K::Scalar, 1}};
    case 2:
      return {{"beta", K::Vector, m},
              {"c1", K::Vector, m},
              {"c3", K::Vector, m},
              {"c2", K::Digest, db}};
    case 3:
      return {{"alpha", K::Scalar, 1}, {"gamma", K::Scalar, 1},
              {"beta", K::Vector, m},  {"c1", K::Vector, m},
              {"c3", K::Vector, m},    {"delta", K::Vector, m},
              {"c6", K::Vector, m},    {"c8", K::Vector, m},
              {"c2", K::Digest, db},   {"c7", K::Digest, db}};
    case 4: return {{"c11", K::Vector, m}};
    case 5: return {{"c13", K::Digest, db}};
    case 6: return {{"c14", K::Digest, db}, {"c15", K::Digest, db}};
    case 7: return {{"c14", K::Digest, db}};
  }
  throw ParameterError("bad message type");
}

namespace dy_detail {

inline void bump_residue(Residue& r, const Params& prm) {
  r = static_cast<Residue>((r + 1u) % prm.q);
}

inline void bump_vector(ZqVector& v, std::size_t i, const Params& prm) {
  auto elems = v.elems();
  elems[i] = static_cast<Residue>((elems[i] + 1u) % prm.q);
  v = ZqVector(std::move(elems), prm.q);
}

inline void bump_digest(Digest& d, std::size_t i) { d.bytes[i] ^= 0x01; }

}  // namespace dy_detail

// Replaces one element of one field with a different valid value.
inline void tamper_element(Message& msg, std::size_t field, std::size_t elem,
                           const Params& prm) {
  using dy_detail::bump_digest;
  using dy_detail::bump_residue;
  using dy_detail::bump_vector;
  std::visit(
      [&](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Query>) {
          bump_residue(m.alpha, prm);
        } else if constexpr (std::is_same_v<T, TagCommit>) {
          switch (field) {
            case 0: bump_vector(m.beta, elem, prm); break;
            case 1: bump_vector(m.c1, elem, prm); break;
            case 2: bump_vector(m.c3, elem, prm); break;
            case 3: bump_digest(m.c2, elem); break;
          }
        } else if constexpr (std::is_same_v<T, ReaderCommit>) {
          switch (field) {
            case 0: bump_residue(m.alpha, prm); break;
            case 1: bump_residue(m.gamma, prm); break;
            case 2: bump_vector(m.beta, elem, prm); break;
            case 3: bump_vector(m.c1, elem, prm); break;
            case 4: bump_vector(m.c3, elem, prm); break;
            case 5: bump_vector(m.delta, elem, prm); break;
            case 6: bump_vector(m.c6, elem, prm); break;
            case 7: bump_vector(m.c8, elem, prm); break;
            case 8: bump_digest(m.c2, elem); break;
            case 9: bump_digest(m.c7, elem); break;
          }
        } else if constexpr (std::is_same_v<T, ServerChallenge>) {
          bump_vector(m.c11, elem, prm);
        } else if constexpr (std::is_same_v<T, ReaderProof>) {
          bump_digest(m.c13, elem);
        } else if constexpr (std::is_same_v<T, ServerConfirm>) {
          if (field == 0) {
            bump_digest(m.c14, elem);
          } else {
            bump_digest(m.c15, elem);
          }
        } else if constexpr (std::is_same_v<T, TagConfirm>) {
          bump_digest(m.c14, elem);
        }
      },
      msg);
}

// Hook that rewrites one element of one field of the first frame of the
// given type it sees.
inline Channel::Hook tamper_hook(std::uint8_t msg_type, std::size_t field,
                                 std::size_t elem, const Params& prm) {
  auto done = std::make_shared<bool>(false);
  return [msg_type, field, elem, prm,
          done](const FrameRecord& rec) -> std::optional<std::vector<std::uint8_t>> {
    if (*done || rec.msg_type != msg_type) return rec.bytes;
    *done = true;
    Message msg = decode(rec.bytes, prm);
    tamper_element(msg, field, elem, prm);
    return encode(msg, prm);
  };
}

inline ChannelId channel_for_message(std::uint8_t msg_type) {
  switch (msg_type) {
    case 1:
    case 2:
    case 7: return ChannelId::TagReader;
    default: return ChannelId::ReaderServer;
  }
}

// Runs one session with a single element of a single field modified in
// transit. Returns the session result.
inline SessionResult run_tampered_session(const ServerRegistry& registry,
                                          const Credential& tag_cred,
                                          const Credential& reader_cred,
                                          Rng& rng, std::uint8_t msg_type,
                                          std::size_t field, std::size_t elem) {
  const Params& prm = registry.params();
  Channel tr(ChannelId::TagReader);
  Channel rs(ChannelId::ReaderServer);
  auto hook = tamper_hook(msg_type, field, elem, prm);
  if (channel_for_message(msg_type) == ChannelId::TagReader) {
    tr.set_hook(std::move(hook));
  } else {
    rs.set_hook(std::move(hook));
  }
  return drive_session(prm, honest_tag(tag_cred, rng),
                       honest_reader(reader_cred, rng),
                       honest_server(registry, rng), tr, rs);
}

// ---------------------------------------------------------------------------
// Attack scenarios.
// ---------------------------------------------------------------------------

struct AttackScenario {
  std::string name;
  std::string description;
  // Failure reasons that count as "blocked"; empty = any failure.
  std::set<FailureReason> expected;
  bool expect_success = false;  // honest pass-through only
  std::function<SessionResult(const ServerRegistry&, const Credential&,
                              const Credential&, Rng&)>
      execute;
};

struct Verdict {
  bool attack_blocked = false;
  AuthOutcome outcome;
  Transcript transcript;
  std::string failing_check;
};

inline Verdict run_scenario(const AttackScenario& scenario,
                            const ServerRegistry& registry,
                            const Credential& tag_cred,
                            const Credential& reader_cred, Rng& rng) {
  SessionResult res = scenario.execute(registry, tag_cred, reader_cred, rng);
  Verdict v;
  v.outcome = res.outcome;
  v.transcript = std::move(res.transcript);
  if (scenario.expect_success) {
    v.attack_blocked = res.outcome.success;
    v.failing_check = res.outcome.success ? "" : res.outcome.detail;
    return v;
  }
  if (res.outcome.success) {
    v.attack_blocked = false;
    v.failing_check = "session succeeded despite interference";
    return v;
  }
  v.attack_blocked = scenario.expected.empty() ||
                     scenario.expected.count(*res.outcome.reason) > 0;
  v.failing_check = res.outcome.detail;
  return v;
}

inline std::vector<std::uint8_t> random_bytes(Rng& rng, std::size_t count) {
  std::vector<std::uint8_t> out(count);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.below(256));
  return out;
}

// ---------------------------------------------------------------------------
// Anonymity probe: k honest sessions, then (a) substring-scan every
// delivered frame for the byte encodings of every identity vector and
// (b) require every vector-valued field to be distinct across sessions.
// ---------------------------------------------------------------------------

struct AnonymityReport {
  std::size_t sessions = 0;
  std::size_t frames_scanned = 0;
  std::size_t identity_matches = 0;
  std::size_t repeated_vector_fields = 0;
  bool ok() const { return identity_matches == 0 && repeated_vector_fields == 0; }
};

namespace dy_detail {

inline std::vector<std::uint8_t> packed_bits_encoding(const ZqVector& v) {
  BitWriter w;
  for (std::size_t i = 0; i < v.size(); ++i) w.put(v[i] & 1u, 1);
  w.pad_to_byte();
  return w.take();
}

inline std::vector<std::uint8_t> wide_encoding(const ZqVector& v) {
  std::vector<std::uint8_t> out;
  out.reserve(2 * v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<std::uint8_t>(v[i] >> 8));
    out.push_back(static_cast<std::uint8_t>(v[i] & 0xff));
  }
  return out;
}

inline bool contains(const std::vector<std::uint8_t>& haystack,
                     const std::vector<std::uint8_t>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

}  // namespace dy_detail

inline AnonymityReport anonymity_probe(const ServerRegistry& registry,
                                       const std::vector<Credential>& creds,
                                       const Credential& tag_cred,
                                       const Credential& reader_cred,
                                       std::size_t k, Rng& rng) {
  if (k < 2) throw ParameterError("anonymity probe needs k >= 2 sessions");
  const Params& prm = registry.params();

  std::vector<std::vector<std::uint8_t>> patterns;
  for (const auto& c : creds) {
    patterns.push_back(dy_detail::packed_bits_encoding(c.x));
    patterns.push_back(dy_detail::wide_encoding(c.x));
  }

  AnonymityReport report;
  report.sessions = k;

  // field key + raw value bytes, across all sessions
  std::unordered_set<std::string> seen;

  for (std::size_t s = 0; s < k; ++s) {
    auto res = run_honest_session(registry, tag_cred, reader_cred, rng);
    if (!res.outcome.success) {
      throw Error("anonymity probe: honest session failed unexpectedly");
    }
    for (const auto& rec : res.transcript) {
      ++report.frames_scanned;
      for (const auto& pat : patterns) {
        if (dy_detail::contains(rec.bytes, pat)) ++report.identity_matches;
      }
      Message msg = decode(rec.bytes, prm);
      auto note = [&](const char* key, const ZqVector& v) {
        std::string entry(key);
        entry.push_back(':');
        entry.append(reinterpret_cast<const char*>(v.elems().data()),
                     v.elems().size() * sizeof(Residue));
        if (!seen.insert(std::move(entry)).second) {
          ++report.repeated_vector_fields;
        }
      };
      std::visit(
          [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TagCommit>) {
              note("TagCommit.beta", m.beta);
              note("TagCommit.c1", m.c1);
              note("TagCommit.c3", m.c3);
            } else if constexpr (std::is_same_v<T, ReaderCommit>) {
              note("ReaderCommit.beta", m.beta);
              note("ReaderCommit.c1", m.c1);
              note("ReaderCommit.c3", m.c3);
              note("ReaderCommit.delta", m.delta);
              note("ReaderCommit.c6", m.c6);
              note("ReaderCommit.c8", m.c8);
            } else if constexpr (std::is_same_v<T, ServerChallenge>) {
              note("ServerChallenge.c11", m.c11);
            }
          },
          msg);
    }
  }
  return report;
}

}  // namespace latticetag

#include "latticetag/dy_scenarios.hpp"
