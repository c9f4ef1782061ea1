#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "latticetag/credentials.hpp"
#include "latticetag/errors.hpp"
#include "latticetag/hash.hpp"
#include "latticetag/params.hpp"
#include "latticetag/rng.hpp"
#include "latticetag/zq.hpp"

namespace latticetag {

// ---------------------------------------------------------------------------
// On-wire message kinds, in protocol order.
// ---------------------------------------------------------------------------

struct Query {
  Residue alpha = 0;
  bool operator==(const Query&) const = default;
};

struct TagCommit {
  ZqVector beta, c1, c3;
  Digest c2;
  bool operator==(const TagCommit&) const = default;
};

struct ReaderCommit {
  Residue alpha = 0, gamma = 0;
  ZqVector beta, c1, c3, delta, c6, c8;
  Digest c2, c7;
  bool operator==(const ReaderCommit&) const = default;
};

struct ServerChallenge {
  ZqVector c11;
  bool operator==(const ServerChallenge&) const = default;
};

struct ReaderProof {
  Digest c13;
  bool operator==(const ReaderProof&) const = default;
};

struct ServerConfirm {
  Digest c14, c15;
  bool operator==(const ServerConfirm&) const = default;
};

struct TagConfirm {
  Digest c14;
  bool operator==(const TagConfirm&) const = default;
};

using Message = std::variant<Query, TagCommit, ReaderCommit, ServerChallenge,
                             ReaderProof, ServerConfirm, TagConfirm>;

// Message type codes 1..7 follow the variant order above.
inline std::uint8_t message_type(const Message& m) {
  return static_cast<std::uint8_t>(m.index() + 1);
}

inline const char* message_name(std::uint8_t type) {
  switch (type) {
    case 1: return "Query";
    case 2: return "TagCommit";
    case 3: return "ReaderCommit";
    case 4: return "ServerChallenge";
    case 5: return "ReaderProof";
    case 6: return "ServerConfirm";
    case 7: return "TagConfirm";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Outcome of one authentication run.
// ---------------------------------------------------------------------------

enum class FailureReason {
  ReaderRejected,         // no reader record passes the step-4.1 checks
  TagRejected,            // no tag record passes the step-4.2 checks
  ProofRejected,          // step 6.1: c13 does not verify
  ServerRejectedByReader, // step 7: c15 does not verify
  ServerRejectedByTag,    // step 8: c14 does not verify
  UnknownDevice,          // registry holds no record for the role at all
  Malformed,              // frame undecodable, dropped, or out of order
};

inline const char* failure_name(FailureReason r) {
  switch (r) {
    case FailureReason::ReaderRejected: return "ReaderRejected";
    case FailureReason::TagRejected: return "TagRejected";
    case FailureReason::ProofRejected: return "ProofRejected";
    case FailureReason::ServerRejectedByReader: return "ServerRejectedByReader";
    case FailureReason::ServerRejectedByTag: return "ServerRejectedByTag";
    case FailureReason::UnknownDevice: return "UnknownDevice";
    case FailureReason::Malformed: return "Malformed";
  }
  return "?";
}

struct AuthOutcome {
  bool success = false;
  std::optional<FailureReason> reason;
  std::string detail;

  static AuthOutcome ok() { return AuthOutcome{true, std::nullopt, {}}; }
  static AuthOutcome fail(FailureReason r, std::string detail) {
    return AuthOutcome{false, r, std::move(detail)};
  }
};

// ---------------------------------------------------------------------------
// Per-role session state. Each session is consumed once, in step order.
// ---------------------------------------------------------------------------

struct TagSession {
  ZqVector u_t;
  ZqVector x1;
  Residue alpha = 0;
  bool consumed = false;
};

struct ReaderSession {
  enum class Stage { Committed, Proved, Done };
  Residue alpha = 0;
  Residue gamma = 0;
  ZqVector u_r;
  ZqVector x2;
  Stage stage = Stage::Committed;
};

struct SessionStats {
  std::size_t reader_records_tried = 0;
  std::size_t tag_records_tried = 0;
};

struct ServerSession {
  ZqVector x_s;
  ZqVector x2_expected;  // P_r^-1 c6 - c10, fixed when the commit verifies
  DeviceHandle tag_handle = 0;
  DeviceHandle reader_handle = 0;
  Residue alpha = 0;
  Residue gamma = 0;
  ZqVector beta, c1, delta, c6;
  bool confirmed = false;
  SessionStats stats;
};

// ---------------------------------------------------------------------------
// Step 1. The reader opens with a query carrying a fresh alpha.
// ---------------------------------------------------------------------------

struct ReaderBegin {
  Query msg;
  Residue alpha;
};

inline ReaderBegin reader_begin(Rng& rng, const Params& params) {
  const Residue alpha = sample_residue(rng, params.q);
  return ReaderBegin{Query{alpha}, alpha};
}

// ---------------------------------------------------------------------------
// Step 2. Tag commitment:
//   beta = P_t(u_t + x_t a), c1 = P_t(x_t + x1),
//   c2 = H1(c1, A_t u_t),    c3 = (A_t u_t || H2(A_t u_t)) + x_t.
// ---------------------------------------------------------------------------

struct TagCommitResult {
  TagCommit msg;
  TagSession session;
};

inline TagCommitResult tag_commit(const Credential& cred, const Query& query,
                                  Rng& rng) {
  if (cred.role != Role::Tag) {
    throw RoleMismatch("tag_commit needs a tag credential");
  }
  const Params& prm = cred.params;

  ZqVector u_t = sample_zq_vector(rng, prm.m, prm.q);
  ZqVector x1 = sample_binary_vector(rng, prm.m, prm.q);

  TagCommit msg;
  msg.beta = perm_apply(cred.perm, vec_add(u_t, scalar_mul(query.alpha, cred.x)));
  msg.c1 = perm_apply(cred.perm, vec_add(cred.x, x1));
  ZqVector atu = mat_vec_mul(cred.a, u_t);
  msg.c2 = h1(HashInput().add(msg.c1).add(atu), prm);
  msg.c3 = vec_add(concat(atu, h2(atu, prm)), cred.x);

  TagSession session;
  session.u_t = std::move(u_t);
  session.x1 = std::move(x1);
  session.alpha = query.alpha;
  return TagCommitResult{std::move(msg), std::move(session)};
}

// ---------------------------------------------------------------------------
// Step 3. Reader commitment, bundled with the forwarded tag values:
//   delta = P_r(u_r + x_r g), c6 = P_r(x_r + x2),
//   c7 = H1(c1, x_r),         c8 = (A_r u_r || H2(A_r u_r)) + x_r.
// ---------------------------------------------------------------------------

struct ReaderCommitResult {
  ReaderCommit msg;
  ReaderSession session;
};

inline ReaderCommitResult reader_commit(const Credential& cred,
                                        Residue query_alpha,
                                        const TagCommit& tc, Rng& rng) {
  if (cred.role != Role::Reader) {
    throw RoleMismatch("reader_commit needs a reader credential");
  }
  const Params& prm = cred.params;

  const Residue gamma = sample_residue(rng, prm.q);
  ZqVector u_r = sample_zq_vector(rng, prm.m, prm.q);
  ZqVector x2 = sample_binary_vector(rng, prm.m, prm.q);

  ReaderCommit msg;
  msg.alpha = query_alpha;
  msg.gamma = gamma;
  msg.beta = tc.beta;
  msg.c1 = tc.c1;
  msg.c2 = tc.c2;
  msg.c3 = tc.c3;
  msg.delta = perm_apply(cred.perm, vec_add(u_r, scalar_mul(gamma, cred.x)));
  msg.c6 = perm_apply(cred.perm, vec_add(cred.x, x2));
  msg.c7 = h1(HashInput().add(tc.c1).add(cred.x), prm);
  ZqVector aru = mat_vec_mul(cred.a, u_r);
  msg.c8 = vec_add(concat(aru, h2(aru, prm)), cred.x);

  ReaderSession session;
  session.alpha = query_alpha;
  session.gamma = gamma;
  session.u_r = std::move(u_r);
  session.x2 = std::move(x2);
  return ReaderCommitResult{std::move(msg), std::move(session)};
}

// ---------------------------------------------------------------------------
// Step 4. Server verification and challenge. Readers are checked first,
// then tags; each scan is a trial verification over every registered
// record of that role because messages carry no device identifier. A
// candidate is accepted when its digest check passes and the recovered
// identity equals the stored one.
// ---------------------------------------------------------------------------

struct ServerChallengeResult {
  ServerChallenge msg;
  ServerSession session;
};

namespace detail {

// Step 4.1 for one reader record: c9 = (A_r P_r^-1) d - y_r g,
// c10 = c8 - (c9 || H2(c9)); accept iff c7 = H1(c1, c10) and c10 = x_r.
inline std::optional<ZqVector> try_reader_record(const RegistryRecord& rec,
                                                 const ReaderCommit& rc,
                                                 const Params& prm) {
  ZqVector c9 =
      vec_sub(mat_vec_mul(rec.a_perm_inv, rc.delta), scalar_mul(rc.gamma, rec.y));
  ZqVector c10 = vec_sub(rc.c8, concat(c9, h2(c9, prm)));
  if (h1(HashInput().add(rc.c1).add(c10), prm) != rc.c7) return std::nullopt;
  if (c10 != rec.x) return std::nullopt;
  return c10;
}

// Step 4.2 for one tag record: c4 = (A_t P_t^-1) b - y_t a,
// c5 = c3 - (c4 || H2(c4)); accept iff c2 = H1(c1, c4) and c5 = x_t.
inline bool try_tag_record(const RegistryRecord& rec, const ReaderCommit& rc,
                           const Params& prm) {
  ZqVector c4 =
      vec_sub(mat_vec_mul(rec.a_perm_inv, rc.beta), scalar_mul(rc.alpha, rec.y));
  ZqVector c5 = vec_sub(rc.c3, concat(c4, h2(c4, prm)));
  if (h1(HashInput().add(rc.c1).add(c4), prm) != rc.c2) return false;
  return c5 == rec.x;
}

}  // namespace detail

inline std::variant<ServerChallengeResult, AuthOutcome> server_process_commit(
    const ServerRegistry& registry, const ReaderCommit& rc, Rng& rng) {
  const Params& prm = registry.params();
  const std::size_t m = prm.m;
  if (rc.beta.size() != m || rc.c1.size() != m || rc.c3.size() != m ||
      rc.delta.size() != m || rc.c6.size() != m || rc.c8.size() != m ||
      rc.c2.bytes.size() != prm.digest_bytes() ||
      rc.c7.bytes.size() != prm.digest_bytes()) {
    return AuthOutcome::fail(FailureReason::Malformed,
                             "commit dimensions disagree with params");
  }

  SessionStats stats;

  if (registry.readers().empty()) {
    return AuthOutcome::fail(FailureReason::UnknownDevice,
                             "no readers registered");
  }
  const RegistryRecord* reader_rec = nullptr;
  std::optional<ZqVector> c10;
  for (const auto& rec : registry.readers()) {
    ++stats.reader_records_tried;
    if ((c10 = detail::try_reader_record(rec, rc, prm))) {
      reader_rec = &rec;
      break;
    }
  }
  if (reader_rec == nullptr) {
    return AuthOutcome::fail(FailureReason::ReaderRejected,
                             "step 4.1: c7 = H1(c1, c10) failed for every "
                             "reader record");
  }

  if (registry.tags().empty()) {
    return AuthOutcome::fail(FailureReason::UnknownDevice, "no tags registered");
  }
  const RegistryRecord* tag_rec = nullptr;
  for (const auto& rec : registry.tags()) {
    ++stats.tag_records_tried;
    if (detail::try_tag_record(rec, rc, prm)) {
      tag_rec = &rec;
      break;
    }
  }
  if (tag_rec == nullptr) {
    return AuthOutcome::fail(FailureReason::TagRejected,
                             "step 4.2: c2 = H1(c1, c4) failed for every tag "
                             "record");
  }

  // Step 4.3: c11 = P_r(x_s + P_r^-1 c6 - c10), with x2_expected =
  // P_r^-1 c6 - c10 cached for the step-6.1 check.
  ServerSession session;
  session.x_s = sample_binary_vector(rng, m, prm.q);
  session.x2_expected =
      vec_sub(perm_apply(reader_rec->perm_inv, rc.c6), *c10);
  ServerChallenge challenge;
  challenge.c11 =
      perm_apply(reader_rec->perm, vec_add(session.x_s, session.x2_expected));

  session.tag_handle = tag_rec->handle;
  session.reader_handle = reader_rec->handle;
  session.alpha = rc.alpha;
  session.gamma = rc.gamma;
  session.beta = rc.beta;
  session.c1 = rc.c1;
  session.delta = rc.delta;
  session.c6 = rc.c6;
  session.stats = stats;
  return ServerChallengeResult{std::move(challenge), std::move(session)};
}

// ---------------------------------------------------------------------------
// Step 5. Reader answers the challenge: c12 = P_r^-1 c11 - x2,
// c13 = H1(c12, x2). P_r^-1 is part of the reader's stored key material.
// ---------------------------------------------------------------------------

inline ReaderProof reader_prove(const Credential& cred, ReaderSession& session,
                                const ServerChallenge& ch) {
  if (cred.role != Role::Reader) {
    throw RoleMismatch("reader_prove needs a reader credential");
  }
  if (session.stage != ReaderSession::Stage::Committed) {
    throw StateError("reader session already proved");
  }
  const Params& prm = cred.params;
  if (ch.c11.size() != prm.m) {
    throw DimensionMismatch("c11 length disagrees with params");
  }
  ZqVector c12 = vec_sub(perm_apply(perm_invert(cred.perm), ch.c11), session.x2);
  ReaderProof proof{h1(HashInput().add(c12).add(session.x2), prm)};
  session.stage = ReaderSession::Stage::Proved;
  return proof;
}

// ---------------------------------------------------------------------------
// Step 6. Server checks c13 = H1(x_s, P_r^-1 c6 - c10) and, on success,
// emits c14 = H1(P_t^-1(beta - c1 a)) and c15 = H1(P_r^-1(delta - c6 g)).
// On failure the exchange terminates and no confirm values are released.
// ---------------------------------------------------------------------------

inline std::variant<ServerConfirm, AuthOutcome> server_confirm(
    const ServerRegistry& registry, ServerSession& session,
    const ReaderProof& proof) {
  if (session.confirmed) throw StateError("server session already confirmed");
  session.confirmed = true;
  const Params& prm = registry.params();

  if (proof.c13 !=
      h1(HashInput().add(session.x_s).add(session.x2_expected), prm)) {
    return AuthOutcome::fail(FailureReason::ProofRejected,
                             "step 6.1: c13 = H1(x_s, P_r^-1 c6 - c10) failed");
  }

  const RegistryRecord& tag_rec = registry.by_handle(session.tag_handle);
  const RegistryRecord& reader_rec = registry.by_handle(session.reader_handle);

  ServerConfirm confirm;
  confirm.c14 = h1(
      perm_apply(tag_rec.perm_inv,
                 vec_sub(session.beta, scalar_mul(session.alpha, session.c1))),
      prm);
  confirm.c15 = h1(
      perm_apply(reader_rec.perm_inv,
                 vec_sub(session.delta, scalar_mul(session.gamma, session.c6))),
      prm);
  return confirm;
}

// ---------------------------------------------------------------------------
// Step 7. Reader accepts iff H1(u_r - x2 g) = c15, then forwards c14.
// ---------------------------------------------------------------------------

inline std::variant<TagConfirm, AuthOutcome> reader_finalize(
    ReaderSession& session, const ServerConfirm& confirm, const Params& prm) {
  if (session.stage != ReaderSession::Stage::Proved) {
    throw StateError("reader session not in proved state");
  }
  session.stage = ReaderSession::Stage::Done;
  Digest expected = h1(
      vec_sub(session.u_r, scalar_mul(session.gamma, session.x2)), prm);
  if (expected != confirm.c15) {
    return AuthOutcome::fail(FailureReason::ServerRejectedByReader,
                             "step 7: H1(u_r - x2 g) = c15 failed");
  }
  return TagConfirm{confirm.c14};
}

// ---------------------------------------------------------------------------
// Step 8. Tag accepts iff H1(u_t - x1 a) = c14.
// ---------------------------------------------------------------------------

inline AuthOutcome tag_finalize(TagSession& session, const TagConfirm& confirm,
                                const Params& prm) {
  if (session.consumed) throw StateError("tag session already consumed");
  session.consumed = true;
  Digest expected = h1(
      vec_sub(session.u_t, scalar_mul(session.alpha, session.x1)), prm);
  if (expected != confirm.c14) {
    return AuthOutcome::fail(FailureReason::ServerRejectedByTag,
                             "step 8: H1(u_t - x1 a) = c14 failed");
  }
  return AuthOutcome::ok();
}

}  // namespace latticetag
