#include <catch2/catch_amalgamated.hpp>

#include "latticetag/dy.hpp"

using namespace latticetag;

namespace {

Seed test_seed(std::uint8_t a, std::uint8_t b = 0) {
  Seed s;
  s.bytes.fill(a);
  s.bytes[1] = b;
  return s;
}

struct World {
  Params prm;
  Credential tag_cred;
  Credential reader_cred;
  ServerRegistry registry;

  explicit World(const Params& p, Rng& rng)
      : prm(p.validated()),
        tag_cred(generate_credential(prm, Role::Tag, rng)),
        reader_cred(generate_credential(prm, Role::Reader, rng)),
        registry(prm) {
    registry.register_credential(tag_cred);
    registry.register_credential(reader_cred);
  }
};

}  // namespace

TEST_CASE("the harness is transparent to honest runs") {
  Rng rng(test_seed(201));
  World w(Params::toy(), rng);
  auto scenarios = builtin_scenarios();
  const auto* passthrough = find_scenario(scenarios, "honest-passthrough");
  REQUIRE(passthrough != nullptr);
  auto verdict = run_scenario(*passthrough, w.registry, w.tag_cred,
                              w.reader_cred, rng);
  CHECK(verdict.attack_blocked);
  CHECK(verdict.outcome.success);
  CHECK(verdict.transcript.size() == 7);
}

TEST_CASE("every built-in attack is blocked across seeds") {
  Rng setup_rng(test_seed(203));
  World w(Params::toy(), setup_rng);
  for (const auto& scenario : builtin_scenarios()) {
    for (std::uint8_t s = 0; s < 10; ++s) {
      Rng rng(test_seed(204, s));
      auto verdict =
          run_scenario(scenario, w.registry, w.tag_cred, w.reader_cred, rng);
      INFO(scenario.name << " seed " << int(s) << ": "
                         << verdict.failing_check);
      CHECK(verdict.attack_blocked);
    }
  }
}

TEST_CASE("replays fail at the step the scheme pins them to") {
  Rng setup_rng(test_seed(205));
  World w(Params::toy(), setup_rng);
  auto scenarios = builtin_scenarios();

  const auto* replay_tag = find_scenario(scenarios, "replay-tag");
  REQUIRE(replay_tag != nullptr);
  for (std::uint8_t s = 0; s < 20; ++s) {
    Rng rng(test_seed(206, s));
    auto res = replay_tag->execute(w.registry, w.tag_cred, w.reader_cred, rng);
    REQUIRE_FALSE(res.outcome.success);
    // step 8: H1(u_t - x1 a) = c14
    CHECK(res.outcome.reason == FailureReason::ServerRejectedByTag);
  }

  const auto* replay_reader = find_scenario(scenarios, "replay-reader");
  REQUIRE(replay_reader != nullptr);
  for (std::uint8_t s = 0; s < 20; ++s) {
    Rng rng(test_seed(207, s));
    auto res =
        replay_reader->execute(w.registry, w.tag_cred, w.reader_cred, rng);
    REQUIRE_FALSE(res.outcome.success);
    // step 7: H1(u_r - x2 g) = c15
    CHECK(res.outcome.reason == FailureReason::ServerRejectedByReader);
  }
}

TEST_CASE("impersonations are refused at the scan"){
  Rng setup_rng(test_seed(209));
  World w(Params::toy(), setup_rng);
  auto scenarios = builtin_scenarios();

  Rng r1(test_seed(210, 1));
  auto vt = run_scenario(*find_scenario(scenarios, "impersonate-tag"),
                         w.registry, w.tag_cred, w.reader_cred, r1);
  CHECK(vt.attack_blocked);
  CHECK(vt.outcome.reason == FailureReason::TagRejected);

  Rng r2(test_seed(210, 2));
  auto vr = run_scenario(*find_scenario(scenarios, "impersonate-reader"),
                         w.registry, w.tag_cred, w.reader_cred, r2);
  CHECK(vr.attack_blocked);
  CHECK(vr.outcome.reason == FailureReason::ReaderRejected);

  Rng r3(test_seed(210, 3));
  auto vs = run_scenario(*find_scenario(scenarios, "impersonate-server"),
                         w.registry, w.tag_cred, w.reader_cred, r3);
  CHECK(vs.attack_blocked);
  CHECK(vs.outcome.reason == FailureReason::ServerRejectedByReader);
}

TEST_CASE("field-level tampering is always caught") {
  Rng setup_rng(test_seed(211));
  World w(Params::toy(), setup_rng);
  Rng rng(test_seed(212));
  for (std::uint8_t type = 1; type <= 7; ++type) {
    const auto fields = message_fields(type, w.prm);
    for (std::size_t f = 0; f < fields.size(); ++f) {
      auto res = run_tampered_session(w.registry, w.tag_cred, w.reader_cred,
                                      rng, type, f, 0);
      INFO(message_name(type) << "." << fields[f].name);
      CHECK_FALSE(res.outcome.success);
    }
  }
}

TEST_CASE("dropped frames abort the run") {
  Rng setup_rng(test_seed(213));
  World w(Params::toy(), setup_rng);
  Rng rng(test_seed(214));
  Channel tr(ChannelId::TagReader);
  Channel rs(ChannelId::ReaderServer);
  rs.set_hook([](const FrameRecord& rec)
                  -> std::optional<std::vector<std::uint8_t>> {
    if (rec.msg_type == 4) return std::nullopt;
    return rec.bytes;
  });
  auto res = drive_session(w.prm, honest_tag(w.tag_cred, rng),
                           honest_reader(w.reader_cred, rng),
                           honest_server(w.registry, rng), tr, rs);
  CHECK_FALSE(res.outcome.success);
  CHECK(res.outcome.reason == FailureReason::Malformed);
}

TEST_CASE("scripts referencing missing frames raise ScriptError") {
  Transcript empty;
  CHECK_THROWS_AS(find_frame(empty, 2), ScriptError);
}

TEST_CASE("scenario verdicts are deterministic under a fixed seed") {
  Rng setup_rng(test_seed(215));
  World w(Params::toy(), setup_rng);
  auto scenarios = builtin_scenarios();
  const auto* scenario = find_scenario(scenarios, "replay-tag");

  Rng r1(test_seed(216));
  Rng r2(test_seed(216));
  auto v1 = run_scenario(*scenario, w.registry, w.tag_cred, w.reader_cred, r1);
  auto v2 = run_scenario(*scenario, w.registry, w.tag_cred, w.reader_cred, r2);
  CHECK(v1.attack_blocked == v2.attack_blocked);
  CHECK(v1.outcome.reason == v2.outcome.reason);
  REQUIRE(v1.transcript.size() == v2.transcript.size());
  for (std::size_t i = 0; i < v1.transcript.size(); ++i) {
    CHECK(v1.transcript[i].bytes == v2.transcript[i].bytes);
  }
}

TEST_CASE("anonymity probe finds no identity leakage") {
  Params prm;
  prm.n = 16;
  prm.m = 64;
  prm.q = 257;
  Rng setup_rng(test_seed(217));
  World w(prm.validated(), setup_rng);
  Rng rng(test_seed(218));
  auto report = anonymity_probe(w.registry, {w.tag_cred, w.reader_cred},
                                w.tag_cred, w.reader_cred, 200, rng);
  CHECK(report.sessions == 200);
  CHECK(report.frames_scanned == 1400);
  CHECK(report.identity_matches == 0);
  CHECK(report.repeated_vector_fields == 0);
  CHECK(report.ok());
}

TEST_CASE("two sessions of the same pair share no vector field") {
  Params prm;
  prm.n = 16;
  prm.m = 64;
  prm.q = 257;
  Rng setup_rng(test_seed(219));
  World w(prm.validated(), setup_rng);
  Rng rng(test_seed(220));
  auto report = anonymity_probe(w.registry, {w.tag_cred, w.reader_cred},
                                w.tag_cred, w.reader_cred, 2, rng);
  CHECK(report.ok());
}

TEST_CASE("the channel log is append-only and keeps originals") {
  Rng setup_rng(test_seed(221));
  World w(Params::toy(), setup_rng);
  Rng rng(test_seed(222));
  Channel tr(ChannelId::TagReader);
  Channel rs(ChannelId::ReaderServer);
  // Tamper every ReaderCommit; the log must still hold the original.
  rs.set_hook(tamper_hook(3, 0, 0, w.prm));
  auto res = drive_session(w.prm, honest_tag(w.tag_cred, rng),
                           honest_reader(w.reader_cred, rng),
                           honest_server(w.registry, rng), tr, rs);
  CHECK_FALSE(res.outcome.success);
  const auto& logged = find_frame(rs.log(), 3);
  auto original = std::get<ReaderCommit>(decode(logged.bytes, w.prm));
  // The delivered (tampered) copy differs from the logged original.
  bool found_delivered = false;
  for (const auto& rec : res.transcript) {
    if (rec.msg_type == 3) {
      found_delivered = true;
      CHECK_FALSE(rec.bytes == logged.bytes);
    }
  }
  CHECK(found_delivered);
}
