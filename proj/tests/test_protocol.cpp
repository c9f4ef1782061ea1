#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <variant>

#include "latticetag/dy.hpp"
#include "latticetag/protocol.hpp"

using namespace latticetag;

namespace {

Seed test_seed(std::uint8_t a, std::uint8_t b = 0) {
  Seed s;
  s.bytes.fill(a);
  s.bytes[1] = b;
  return s;
}

struct Fixture {
  Params prm;
  Credential tag_cred;
  Credential reader_cred;
  ServerRegistry registry;

  explicit Fixture(const Params& p, Rng& rng)
      : prm(p.validated()),
        tag_cred(generate_credential(prm, Role::Tag, rng)),
        reader_cred(generate_credential(prm, Role::Reader, rng)),
        registry(prm) {
    registry.register_credential(tag_cred);
    registry.register_credential(reader_cred);
  }
};

// One full exchange at the step-function level, keeping every session
// and message visible for oracle recomputation.
struct PlainRun {
  ReaderBegin rb;
  TagCommitResult tag;
  ReaderCommitResult reader;
  ServerChallengeResult server;
  ReaderProof proof;
  ServerConfirm confirm;
  TagConfirm tag_confirm;
  AuthOutcome outcome;
};

PlainRun drive_plain(const Fixture& f, Rng& rng) {
  PlainRun run;
  run.rb = reader_begin(rng, f.prm);
  run.tag = tag_commit(f.tag_cred, run.rb.msg, rng);
  run.reader = reader_commit(f.reader_cred, run.rb.alpha, run.tag.msg, rng);
  auto sc = server_process_commit(f.registry, run.reader.msg, rng);
  REQUIRE(std::holds_alternative<ServerChallengeResult>(sc));
  run.server = std::move(std::get<ServerChallengeResult>(sc));
  run.proof = reader_prove(f.reader_cred, run.reader.session, run.server.msg);
  auto conf = server_confirm(f.registry, run.server.session, run.proof);
  REQUIRE(std::holds_alternative<ServerConfirm>(conf));
  run.confirm = std::get<ServerConfirm>(conf);
  auto tc = reader_finalize(run.reader.session, run.confirm, f.prm);
  REQUIRE(std::holds_alternative<TagConfirm>(tc));
  run.tag_confirm = std::get<TagConfirm>(tc);
  run.outcome = tag_finalize(run.tag.session, run.tag_confirm, f.prm);
  return run;
}

// Recomputes every server-side value from role-local secrets and checks
// the eight algebraic identities the exchange relies on.
void check_correctness_identities(const Fixture& f, const PlainRun& run) {
  const Params& prm = f.prm;
  const Credential& rt = f.tag_cred;
  const Credential& rr = f.reader_cred;

  // Server route for c9/c4 (what the registry computes)...
  ZqMatrix ar_pinv = mat_mul_perm(rr.a, perm_invert(rr.perm));
  ZqMatrix at_pinv = mat_mul_perm(rt.a, perm_invert(rt.perm));
  ZqVector c9 = vec_sub(mat_vec_mul(ar_pinv, run.reader.msg.delta),
                        scalar_mul(run.reader.msg.gamma, rr.y));
  ZqVector c4 = vec_sub(mat_vec_mul(at_pinv, run.reader.msg.beta),
                        scalar_mul(run.reader.msg.alpha, rt.y));

  // ...versus the role-local secrets.
  // I: c9 = A_r u_r
  CHECK(c9 == mat_vec_mul(rr.a, run.reader.session.u_r));
  // II: c10 = x_r
  CHECK(vec_sub(run.reader.msg.c8, concat(c9, h2(c9, prm))) == rr.x);
  // III: c4 = A_t u_t
  CHECK(c4 == mat_vec_mul(rt.a, run.tag.session.u_t));
  // IV: c5 = x_t
  CHECK(vec_sub(run.reader.msg.c3, concat(c4, h2(c4, prm))) == rt.x);
  // V: c11 = P_r(x_s + x2)
  CHECK(run.server.msg.c11 ==
        perm_apply(rr.perm,
                   vec_add(run.server.session.x_s, run.reader.session.x2)));
  // VI: c12 = x_s
  CHECK(vec_sub(perm_apply(perm_invert(rr.perm), run.server.msg.c11),
                run.reader.session.x2) == run.server.session.x_s);
  // VII: c14 = H1(u_t - x1 a)
  CHECK(run.confirm.c14 ==
        h1(vec_sub(run.tag.session.u_t,
                   scalar_mul(run.tag.session.alpha, run.tag.session.x1)),
           prm));
  // VIII: c15 = H1(u_r - x2 g)
  CHECK(run.confirm.c15 ==
        h1(vec_sub(run.reader.session.u_r,
                   scalar_mul(run.reader.session.gamma, run.reader.session.x2)),
           prm));
}

}  // namespace

TEST_CASE("honest exchange completes and satisfies the eight identities") {
  Rng rng(test_seed(101));

  Params mid;
  mid.n = 16;
  mid.m = 64;
  mid.q = 257;
  for (const Params& base : {Params::toy(), mid.validated()}) {
    Fixture f(base, rng);
    for (int t = 0; t < 1000; ++t) {
      auto run = drive_plain(f, rng);
      CHECK(run.outcome.success);
      check_correctness_identities(f, run);
    }
  }

  Fixture f(Params::headline(), rng);
  for (int t = 0; t < 10; ++t) {
    auto run = drive_plain(f, rng);
    CHECK(run.outcome.success);
    check_correctness_identities(f, run);
  }
}

TEST_CASE("reader_begin draws alpha over the full range") {
  Rng rng(test_seed(103));
  Params prm = Params::toy();
  Rng a(test_seed(103)), b(test_seed(103));
  CHECK(reader_begin(a, prm).alpha == reader_begin(b, prm).alpha);

  // 1000 independent pairs at q=17: expected collision count 1000/17 ~ 59.
  Rng meta(test_seed(104));
  int collisions = 0;
  for (int t = 0; t < 1000; ++t) {
    Rng r1(meta.fork()), r2(meta.fork());
    if (reader_begin(r1, prm).alpha == reader_begin(r2, prm).alpha) ++collisions;
  }
  CHECK(collisions >= 29);
  CHECK(collisions <= 89);
}

TEST_CASE("tag_commit with alpha = 0 degenerates to a permuted nonce") {
  Rng rng(test_seed(105));
  Params prm = Params::toy();
  auto cred = generate_credential(prm, Role::Tag, rng);
  auto res = tag_commit(cred, Query{0}, rng);
  CHECK(res.msg.beta == perm_apply(cred.perm, res.session.u_t));
  CHECK(res.msg.beta.size() == prm.m);
  CHECK(res.msg.c1.size() == prm.m);
  CHECK(res.msg.c3.size() == prm.m);

  // c3 - (A_t u_t || H2(A_t u_t)) recovers x_t from the session state.
  auto atu = mat_vec_mul(cred.a, res.session.u_t);
  CHECK(vec_sub(res.msg.c3, concat(atu, h2(atu, prm))) == cred.x);
}

TEST_CASE("tag_commit refuses a reader credential") {
  Rng rng(test_seed(107));
  auto cred = generate_credential(Params::toy(), Role::Reader, rng);
  CHECK_THROWS_AS(tag_commit(cred, Query{1}, rng), RoleMismatch);
}

TEST_CASE("reader_commit with gamma = 0 degenerates to a permuted nonce") {
  Params prm = Params::toy();
  Rng cred_rng(test_seed(109));
  auto tag_cred = generate_credential(prm, Role::Tag, cred_rng);
  auto reader_cred = generate_credential(prm, Role::Reader, cred_rng);

  bool found = false;
  for (std::uint8_t s = 0; s < 200 && !found; ++s) {
    Rng rng(test_seed(110, s));
    auto rb = reader_begin(rng, prm);
    auto tc = tag_commit(tag_cred, rb.msg, rng);
    auto rc = reader_commit(reader_cred, rb.alpha, tc.msg, rng);
    if (rc.msg.gamma != 0) continue;
    found = true;
    CHECK(rc.msg.delta == perm_apply(reader_cred.perm, rc.session.u_r));
  }
  CHECK(found);
}

TEST_CASE("c7 binds the received c1") {
  Params prm = Params::toy();
  Rng rng(test_seed(111));
  auto tag_cred = generate_credential(prm, Role::Tag, rng);
  auto reader_cred = generate_credential(prm, Role::Reader, rng);
  auto rb = reader_begin(rng, prm);
  auto tc = tag_commit(tag_cred, rb.msg, rng);

  Rng r1(test_seed(112)), r2(test_seed(112));
  auto rc1 = reader_commit(reader_cred, rb.alpha, tc.msg, r1);

  auto altered = tc.msg;
  auto elems = altered.c1.elems();
  elems[0] = static_cast<Residue>((elems[0] + 1) % prm.q);
  altered.c1 = ZqVector(elems, prm.q);
  auto rc2 = reader_commit(reader_cred, rb.alpha, altered, r2);

  CHECK_FALSE(rc1.msg.c7 == rc2.msg.c7);

  // Forwarded tag material is bit-identical.
  CHECK(rc1.msg.beta == tc.msg.beta);
  CHECK(rc1.msg.c1 == tc.msg.c1);
  CHECK(rc1.msg.c2 == tc.msg.c2);
  CHECK(rc1.msg.c3 == tc.msg.c3);
  CHECK(rc1.msg.alpha == rb.alpha);
}

TEST_CASE("every flip of a c8 element is rejected at step 4.1") {
  Rng rng(test_seed(113));
  Fixture f(Params::toy(), rng);

  auto rb = reader_begin(rng, f.prm);
  auto tc = tag_commit(f.tag_cred, rb.msg, rng);
  auto rc = reader_commit(f.reader_cred, rb.alpha, tc.msg, rng);

  for (std::size_t i = 0; i < f.prm.m; ++i) {
    for (std::uint32_t d = 1; d < f.prm.q; ++d) {
      auto msg = rc.msg;
      auto elems = msg.c8.elems();
      elems[i] = static_cast<Residue>((elems[i] + d) % f.prm.q);
      msg.c8 = ZqVector(elems, f.prm.q);
      auto res = server_process_commit(f.registry, msg, rng);
      REQUIRE(std::holds_alternative<AuthOutcome>(res));
      CHECK(std::get<AuthOutcome>(res).reason == FailureReason::ReaderRejected);
    }
  }
}

TEST_CASE("server rejects with UnknownDevice when a role has no records") {
  Rng rng(test_seed(115));
  Params prm = Params::toy();
  auto tag_cred = generate_credential(prm, Role::Tag, rng);
  auto reader_cred = generate_credential(prm, Role::Reader, rng);

  ServerRegistry empty(prm);
  auto rb = reader_begin(rng, prm);
  auto tc = tag_commit(tag_cred, rb.msg, rng);
  auto rc = reader_commit(reader_cred, rb.alpha, tc.msg, rng);
  auto res = server_process_commit(empty, rc.msg, rng);
  REQUIRE(std::holds_alternative<AuthOutcome>(res));
  CHECK(std::get<AuthOutcome>(res).reason == FailureReason::UnknownDevice);

  ServerRegistry readers_only(prm);
  readers_only.register_credential(reader_cred);
  auto res2 = server_process_commit(readers_only, rc.msg, rng);
  REQUIRE(std::holds_alternative<AuthOutcome>(res2));
  CHECK(std::get<AuthOutcome>(res2).reason == FailureReason::UnknownDevice);
}

TEST_CASE("unregistered devices are rejected by the scan") {
  Rng rng(test_seed(116));
  Params prm = Params::toy();
  Fixture f(prm, rng);
  auto stranger_tag = generate_credential(prm, Role::Tag, rng);

  auto rb = reader_begin(rng, prm);
  auto tc = tag_commit(stranger_tag, rb.msg, rng);
  auto rc = reader_commit(f.reader_cred, rb.alpha, tc.msg, rng);
  auto res = server_process_commit(f.registry, rc.msg, rng);
  REQUIRE(std::holds_alternative<AuthOutcome>(res));
  CHECK(std::get<AuthOutcome>(res).reason == FailureReason::TagRejected);
}

TEST_CASE("tampered c11 breaks the recovered x_s") {
  Rng rng(test_seed(117));
  Fixture f(Params::toy(), rng);
  auto rb = reader_begin(rng, f.prm);
  auto tag = tag_commit(f.tag_cred, rb.msg, rng);
  auto reader = reader_commit(f.reader_cred, rb.alpha, tag.msg, rng);
  auto sc = server_process_commit(f.registry, reader.msg, rng);
  auto& server = std::get<ServerChallengeResult>(sc);

  auto tampered = server.msg;
  auto elems = tampered.c11.elems();
  elems[0] = static_cast<Residue>((elems[0] + 1) % f.prm.q);
  tampered.c11 = ZqVector(elems, f.prm.q);

  ZqVector c12 = vec_sub(perm_apply(perm_invert(f.reader_cred.perm),
                                    tampered.c11),
                         reader.session.x2);
  CHECK_FALSE(c12 == server.session.x_s);

  // The proof over the tampered challenge is then refused at step 6.1.
  auto proof = reader_prove(f.reader_cred, reader.session, tampered);
  auto conf = server_confirm(f.registry, server.session, proof);
  REQUIRE(std::holds_alternative<AuthOutcome>(conf));
  CHECK(std::get<AuthOutcome>(conf).reason == FailureReason::ProofRejected);
}

TEST_CASE("reader proof is deterministic given challenge and session") {
  Rng rng(test_seed(119));
  Fixture f(Params::toy(), rng);
  auto rb = reader_begin(rng, f.prm);
  auto tag = tag_commit(f.tag_cred, rb.msg, rng);

  Rng r1(test_seed(120)), r2(test_seed(120));
  auto reader1 = reader_commit(f.reader_cred, rb.alpha, tag.msg, r1);
  auto reader2 = reader_commit(f.reader_cred, rb.alpha, tag.msg, r2);
  auto sc = server_process_commit(f.registry, reader1.msg, rng);
  auto& server = std::get<ServerChallengeResult>(sc);
  CHECK(reader_prove(f.reader_cred, reader1.session, server.msg).c13 ==
        reader_prove(f.reader_cred, reader2.session, server.msg).c13);
}

TEST_CASE("sessions are one-shot") {
  Rng rng(test_seed(121));
  Fixture f(Params::toy(), rng);
  auto run = drive_plain(f, rng);

  CHECK_THROWS_AS(tag_finalize(run.tag.session, run.tag_confirm, f.prm),
                  StateError);
  CHECK_THROWS_AS(reader_prove(f.reader_cred, run.reader.session, run.server.msg),
                  StateError);
  CHECK_THROWS_AS(reader_finalize(run.reader.session, run.confirm, f.prm),
                  StateError);
  ReaderProof again{run.proof};
  CHECK_THROWS_AS(server_confirm(f.registry, run.server.session, again),
                  StateError);
}

TEST_CASE("cross-wired confirms from another session are rejected") {
  Rng rng(test_seed(123));
  Fixture f(Params::toy(), rng);
  auto run1 = drive_plain(f, rng);

  // Fresh session, but the reader receives session 1's ServerConfirm.
  auto rb = reader_begin(rng, f.prm);
  auto tag = tag_commit(f.tag_cred, rb.msg, rng);
  auto reader = reader_commit(f.reader_cred, rb.alpha, tag.msg, rng);
  auto sc = server_process_commit(f.registry, reader.msg, rng);
  auto& server = std::get<ServerChallengeResult>(sc);
  reader_prove(f.reader_cred, reader.session, server.msg);

  auto res = reader_finalize(reader.session, run1.confirm, f.prm);
  REQUIRE(std::holds_alternative<AuthOutcome>(res));
  CHECK(std::get<AuthOutcome>(res).reason ==
        FailureReason::ServerRejectedByReader);

  // And a fresh tag receiving session 1's c14 likewise fails step 8.
  auto rb2 = reader_begin(rng, f.prm);
  auto tag2 = tag_commit(f.tag_cred, rb2.msg, rng);
  auto out = tag_finalize(tag2.session, TagConfirm{run1.confirm.c14}, f.prm);
  CHECK_FALSE(out.success);
  CHECK(out.reason == FailureReason::ServerRejectedByTag);
}

TEST_CASE("alpha = 0 still authenticates") {
  Rng rng(test_seed(125));
  Fixture f(Params::toy(), rng);

  auto tag = tag_commit(f.tag_cred, Query{0}, rng);
  auto reader = reader_commit(f.reader_cred, 0, tag.msg, rng);
  auto sc = server_process_commit(f.registry, reader.msg, rng);
  REQUIRE(std::holds_alternative<ServerChallengeResult>(sc));
  auto& server = std::get<ServerChallengeResult>(sc);
  auto proof = reader_prove(f.reader_cred, reader.session, server.msg);
  auto conf = server_confirm(f.registry, server.session, proof);
  REQUIRE(std::holds_alternative<ServerConfirm>(conf));
  auto tc = reader_finalize(reader.session, std::get<ServerConfirm>(conf), f.prm);
  REQUIRE(std::holds_alternative<TagConfirm>(tc));
  CHECK(tag_finalize(tag.session, std::get<TagConfirm>(tc), f.prm).success);
}

TEST_CASE("c1 never repeats across many sessions of one tag") {
  // c1 = P_t(x_t + x1) ranges over 2^m values for a fixed credential,
  // so distinctness over 1000 draws needs m well above log2(1000).
  Params prm;
  prm.n = 16;
  prm.m = 64;
  prm.q = 257;
  Rng rng(test_seed(127));
  Fixture f(prm.validated(), rng);
  std::set<std::vector<Residue>> seen;
  for (int t = 0; t < 1000; ++t) {
    auto tag = tag_commit(f.tag_cred, Query{1}, rng);
    CHECK(seen.insert(tag.msg.c1.elems()).second);
  }
}

TEST_CASE("honest transcript carries exactly the seven messages") {
  Rng rng(test_seed(129));
  Fixture f(Params::toy(), rng);
  auto res = run_honest_session(f.registry, f.tag_cred, f.reader_cred, rng);
  CHECK(res.outcome.success);
  REQUIRE(res.transcript.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(res.transcript[i].msg_type == i + 1);
  }
  CHECK(res.stats.reader_records_tried == 1);
  CHECK(res.stats.tag_records_tried == 1);
}

TEST_CASE("transcripts from different seeds differ in every vector field") {
  Rng rng(test_seed(131));
  Fixture f(Params::toy(), rng);
  Rng r1(test_seed(132)), r2(test_seed(133));
  auto run1 = drive_plain(f, r1);
  auto run2 = drive_plain(f, r2);
  CHECK_FALSE(run1.tag.msg.beta == run2.tag.msg.beta);
  CHECK_FALSE(run1.tag.msg.c1 == run2.tag.msg.c1);
  CHECK_FALSE(run1.tag.msg.c3 == run2.tag.msg.c3);
  CHECK_FALSE(run1.reader.msg.delta == run2.reader.msg.delta);
  CHECK_FALSE(run1.reader.msg.c6 == run2.reader.msg.c6);
  CHECK_FALSE(run1.reader.msg.c8 == run2.reader.msg.c8);
  CHECK_FALSE(run1.server.msg.c11 == run2.server.msg.c11);
}
