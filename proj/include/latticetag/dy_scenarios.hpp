#pragma once

// Built-in attack catalog. Each scenario scripts concrete interference
// against live role state machines and names the failure it must be
// stopped by. Included at the end of dy.hpp.

#include <optional>
#include <vector>

namespace latticetag {
namespace dy_detail {

// Adversary holding no credentials: commits fabricated values and runs
// the final check against a junk session, which is all it can do.
inline TagActor fabricating_tag(const Params& prm, Rng& rng) {
  auto session = std::make_shared<std::optional<TagSession>>();
  TagActor actor;
  actor.commit = [prm, &rng, session](const Query& q) {
    TagSession junk;
    junk.u_t = sample_zq_vector(rng, prm.m, prm.q);
    junk.x1 = sample_binary_vector(rng, prm.m, prm.q);
    junk.alpha = q.alpha;
    *session = std::move(junk);
    TagCommit msg;
    msg.beta = sample_zq_vector(rng, prm.m, prm.q);
    msg.c1 = sample_zq_vector(rng, prm.m, prm.q);
    msg.c3 = sample_zq_vector(rng, prm.m, prm.q);
    msg.c2 = Digest{random_bytes(rng, prm.digest_bytes())};
    return msg;
  };
  actor.finalize = [prm, session](const TagConfirm& tc) {
    if (!session->has_value()) throw StateError("impostor never committed");
    return tag_finalize(**session, tc, prm);
  };
  return actor;
}

// Adversary replaying a recorded tag commitment. The junk session means
// the step-8 verification can only be attempted blind.
inline TagActor replaying_tag(const Params& prm, Rng& rng, TagCommit recorded) {
  auto session = std::make_shared<std::optional<TagSession>>();
  TagActor actor;
  actor.commit = [prm, &rng, session,
                  recorded = std::move(recorded)](const Query& q) {
    TagSession junk;
    junk.u_t = sample_zq_vector(rng, prm.m, prm.q);
    junk.x1 = sample_binary_vector(rng, prm.m, prm.q);
    junk.alpha = q.alpha;
    *session = std::move(junk);
    return recorded;
  };
  actor.finalize = [prm, session](const TagConfirm& tc) {
    if (!session->has_value()) throw StateError("impostor never committed");
    return tag_finalize(**session, tc, prm);
  };
  return actor;
}

// Credential-less reader: forwards the tag's values, fabricates its own
// half, and never verifies anything (it wants the run to complete).
inline ReaderActor fabricating_reader(const Params& prm, Rng& rng) {
  auto alpha = std::make_shared<Residue>(0);
  ReaderActor actor;
  actor.begin = [prm, &rng, alpha]() {
    *alpha = sample_residue(rng, prm.q);
    return Query{*alpha};
  };
  actor.commit = [prm, &rng, alpha](const TagCommit& tc) {
    ReaderCommit msg;
    msg.alpha = *alpha;
    msg.gamma = sample_residue(rng, prm.q);
    msg.beta = tc.beta;
    msg.c1 = tc.c1;
    msg.c2 = tc.c2;
    msg.c3 = tc.c3;
    msg.delta = sample_zq_vector(rng, prm.m, prm.q);
    msg.c6 = sample_zq_vector(rng, prm.m, prm.q);
    msg.c7 = Digest{random_bytes(rng, prm.digest_bytes())};
    msg.c8 = sample_zq_vector(rng, prm.m, prm.q);
    return msg;
  };
  actor.prove = [prm, &rng](const ServerChallenge&) {
    return ReaderProof{Digest{random_bytes(rng, prm.digest_bytes())}};
  };
  actor.finalize =
      [](const ServerConfirm& sc) -> std::variant<TagConfirm, AuthOutcome> {
    return TagConfirm{sc.c14};
  };
  return actor;
}

// Adversary answering in the server's place with fabricated values.
inline ServerActor fabricating_server(const Params& prm, Rng& rng) {
  ServerActor actor;
  actor.process = [prm, &rng](const ReaderCommit&)
      -> std::variant<ServerChallenge, AuthOutcome> {
    return ServerChallenge{sample_zq_vector(rng, prm.m, prm.q)};
  };
  actor.confirm = [prm, &rng](const ReaderProof&)
      -> std::variant<ServerConfirm, AuthOutcome> {
    return ServerConfirm{Digest{random_bytes(rng, prm.digest_bytes())},
                         Digest{random_bytes(rng, prm.digest_bytes())}};
  };
  actor.stats = []() { return SessionStats{}; };
  return actor;
}

inline SessionResult run_with_hooks(const ServerRegistry& reg,
                                    const Credential& tag_cred,
                                    const Credential& reader_cred, Rng& rng,
                                    Channel::Hook tr_hook, Channel::Hook rs_hook) {
  Channel tr(ChannelId::TagReader);
  Channel rs(ChannelId::ReaderServer);
  if (tr_hook) tr.set_hook(std::move(tr_hook));
  if (rs_hook) rs.set_hook(std::move(rs_hook));
  return drive_session(reg.params(), honest_tag(tag_cred, rng),
                       honest_reader(reader_cred, rng),
                       honest_server(reg, rng), tr, rs);
}

// Runs sub-cases in order and reports the first one the protocol fails
// to stop, or the last one when all are blocked.
inline SessionResult first_unblocked_or_last(
    const std::vector<std::function<SessionResult()>>& cases,
    const std::set<FailureReason>& expected) {
  SessionResult last;
  for (const auto& run : cases) {
    last = run();
    if (last.outcome.success) return last;
    if (!expected.empty() && expected.count(*last.outcome.reason) == 0) {
      return last;
    }
  }
  return last;
}

}  // namespace dy_detail

inline std::vector<AttackScenario> builtin_scenarios() {
  using dy_detail::fabricating_reader;
  using dy_detail::fabricating_server;
  using dy_detail::fabricating_tag;
  using dy_detail::replaying_tag;
  using dy_detail::run_with_hooks;

  std::vector<AttackScenario> out;

  {
    AttackScenario s;
    s.name = "honest-passthrough";
    s.description = "empty script; the harness itself must be transparent";
    s.expect_success = true;
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential& r, Rng& rng) {
      return run_with_hooks(reg, t, r, rng, nullptr, nullptr);
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "mitm-tamper-each-field";
    s.description = "modify one element of every field of every message";
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential& r, Rng& rng) {
      SessionResult last;
      for (std::uint8_t type = 1; type <= 7; ++type) {
        const auto fields = message_fields(type, reg.params());
        for (std::size_t f = 0; f < fields.size(); ++f) {
          last = run_tampered_session(reg, t, r, rng, type, f, 0);
          if (last.outcome.success) return last;
        }
      }
      return last;
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "replay-tag";
    s.description =
        "replay a recorded tag commitment, forcing its original challenge "
        "through to the server; the step-8 check is unanswerable";
    s.expected = {FailureReason::ServerRejectedByTag};
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential& r, Rng& rng) {
      const Params prm = reg.params();
      Rng prior_rng(rng.fork());
      auto prior = run_honest_session(reg, t, r, prior_rng);
      const Residue old_alpha =
          std::get<Query>(decode(find_frame(prior.transcript, 1).bytes, prm))
              .alpha;
      TagCommit old_tc = std::get<TagCommit>(
          decode(find_frame(prior.transcript, 2).bytes, prm));

      Channel tr(ChannelId::TagReader);
      Channel rs(ChannelId::ReaderServer);
      rs.set_hook([prm, old_alpha](const FrameRecord& rec)
                      -> std::optional<std::vector<std::uint8_t>> {
        if (rec.msg_type != 3) return rec.bytes;
        Message msg = decode(rec.bytes, prm);
        std::get<ReaderCommit>(msg).alpha = old_alpha;
        return encode(msg, prm);
      });
      return drive_session(prm, replaying_tag(prm, rng, std::move(old_tc)),
                           honest_reader(r, rng), honest_server(reg, rng), tr,
                           rs);
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "replay-reader";
    s.description =
        "replay the previous session's server confirms at the reader; the "
        "step-7 check names fresh u_r, x2, gamma";
    s.expected = {FailureReason::ServerRejectedByReader};
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential& r, Rng& rng) {
      Rng prior_rng(rng.fork());
      auto prior = run_honest_session(reg, t, r, prior_rng);
      auto old_confirm = find_frame(prior.transcript, 6).bytes;
      return run_with_hooks(
          reg, t, r, rng, nullptr,
          [old_confirm](const FrameRecord& rec)
              -> std::optional<std::vector<std::uint8_t>> {
            if (rec.msg_type != 6) return rec.bytes;
            return old_confirm;
          });
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "replay-tag-commit-stale";
    s.description =
        "replay a recorded tag commitment under the new session's fresh "
        "challenge; the server's step-4.2 digest check catches it";
    s.expected = {FailureReason::TagRejected};
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential& r, Rng& rng) {
      const Params prm = reg.params();
      Rng prior_rng(rng.fork());
      auto prior = run_honest_session(reg, t, r, prior_rng);
      TagCommit old_tc = std::get<TagCommit>(
          decode(find_frame(prior.transcript, 2).bytes, prm));
      Channel tr(ChannelId::TagReader);
      Channel rs(ChannelId::ReaderServer);
      return drive_session(prm, replaying_tag(prm, rng, std::move(old_tc)),
                           honest_reader(r, rng), honest_server(reg, rng), tr,
                           rs);
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "replay-reader-commit-stale";
    s.description =
        "splice the previous session's reader half into a fresh commit; c7 "
        "binds the reader half to the current c1, so step 4.1 catches it";
    s.expected = {FailureReason::ReaderRejected};
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential& r, Rng& rng) {
      const Params prm = reg.params();
      Rng prior_rng(rng.fork());
      auto prior = run_honest_session(reg, t, r, prior_rng);
      ReaderCommit old_rc = std::get<ReaderCommit>(
          decode(find_frame(prior.transcript, 3).bytes, prm));
      return run_with_hooks(
          reg, t, r, rng, nullptr,
          [prm, old_rc](const FrameRecord& rec)
              -> std::optional<std::vector<std::uint8_t>> {
            if (rec.msg_type != 3) return rec.bytes;
            Message msg = decode(rec.bytes, prm);
            auto& rc = std::get<ReaderCommit>(msg);
            rc.gamma = old_rc.gamma;
            rc.delta = old_rc.delta;
            rc.c6 = old_rc.c6;
            rc.c7 = old_rc.c7;
            rc.c8 = old_rc.c8;
            return encode(msg, prm);
          });
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "impersonate-tag";
    s.description = "credential-less tag fabricates a commitment";
    s.expected = {FailureReason::TagRejected};
    s.execute = [](const ServerRegistry& reg, const Credential&,
                   const Credential& r, Rng& rng) {
      Channel tr(ChannelId::TagReader);
      Channel rs(ChannelId::ReaderServer);
      return drive_session(reg.params(), fabricating_tag(reg.params(), rng),
                           honest_reader(r, rng), honest_server(reg, rng), tr,
                           rs);
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "impersonate-reader";
    s.description =
        "credential-less reader forwards the tag half and fabricates its own";
    s.expected = {FailureReason::ReaderRejected};
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential&, Rng& rng) {
      Channel tr(ChannelId::TagReader);
      Channel rs(ChannelId::ReaderServer);
      return drive_session(reg.params(), honest_tag(t, rng),
                           fabricating_reader(reg.params(), rng),
                           honest_server(reg, rng), tr, rs);
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "impersonate-server";
    s.description = "adversary answers the reader commit with random "
                    "c11/c14/c15";
    s.expected = {FailureReason::ServerRejectedByReader};
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential& r, Rng& rng) {
      Channel tr(ChannelId::TagReader);
      Channel rs(ChannelId::ReaderServer);
      return drive_session(reg.params(), honest_tag(t, rng),
                           honest_reader(r, rng),
                           fabricating_server(reg.params(), rng), tr, rs);
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "reflect-tag";
    s.description =
        "echo the tag's own commitment back as the confirm, both as the raw "
        "frame and recast as a type-correct confirm";
    s.expected = {FailureReason::Malformed, FailureReason::ServerRejectedByTag};
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential& r, Rng& rng) {
      const Params prm = reg.params();
      auto frame_echo = [&]() {
        Channel tr(ChannelId::TagReader);
        Channel rs(ChannelId::ReaderServer);
        tr.set_hook([&tr](const FrameRecord& rec)
                        -> std::optional<std::vector<std::uint8_t>> {
          if (rec.msg_type != 7) return rec.bytes;
          return find_frame(tr.log(), 2).bytes;
        });
        return drive_session(prm, honest_tag(t, rng), honest_reader(r, rng),
                             honest_server(reg, rng), tr, rs);
      };
      auto digest_echo = [&]() {
        Channel tr(ChannelId::TagReader);
        Channel rs(ChannelId::ReaderServer);
        tr.set_hook([&tr, prm](const FrameRecord& rec)
                        -> std::optional<std::vector<std::uint8_t>> {
          if (rec.msg_type != 7) return rec.bytes;
          auto tc = std::get<TagCommit>(decode(find_frame(tr.log(), 2).bytes, prm));
          return encode(TagConfirm{tc.c2}, prm);
        });
        return drive_session(prm, honest_tag(t, rng), honest_reader(r, rng),
                             honest_server(reg, rng), tr, rs);
      };
      return dy_detail::first_unblocked_or_last(
          {frame_echo, digest_echo},
          {FailureReason::Malformed, FailureReason::ServerRejectedByTag});
    };
    out.push_back(std::move(s));
  }

  {
    AttackScenario s;
    s.name = "reflect-reader";
    s.description =
        "echo the reader's own commitment back as the server confirm";
    s.expected = {FailureReason::Malformed,
                  FailureReason::ServerRejectedByReader};
    s.execute = [](const ServerRegistry& reg, const Credential& t,
                   const Credential& r, Rng& rng) {
      const Params prm = reg.params();
      auto frame_echo = [&]() {
        Channel tr(ChannelId::TagReader);
        Channel rs(ChannelId::ReaderServer);
        rs.set_hook([&rs](const FrameRecord& rec)
                        -> std::optional<std::vector<std::uint8_t>> {
          if (rec.msg_type != 6) return rec.bytes;
          return find_frame(rs.log(), 3).bytes;
        });
        return drive_session(prm, honest_tag(t, rng), honest_reader(r, rng),
                             honest_server(reg, rng), tr, rs);
      };
      auto digest_echo = [&]() {
        Channel tr(ChannelId::TagReader);
        Channel rs(ChannelId::ReaderServer);
        rs.set_hook([&rs, prm](const FrameRecord& rec)
                        -> std::optional<std::vector<std::uint8_t>> {
          if (rec.msg_type != 6) return rec.bytes;
          auto rc =
              std::get<ReaderCommit>(decode(find_frame(rs.log(), 3).bytes, prm));
          return encode(ServerConfirm{rc.c2, rc.c7}, prm);
        });
        return drive_session(prm, honest_tag(t, rng), honest_reader(r, rng),
                             honest_server(reg, rng), tr, rs);
      };
      return dy_detail::first_unblocked_or_last(
          {frame_echo, digest_echo},
          {FailureReason::Malformed, FailureReason::ServerRejectedByReader});
    };
    out.push_back(std::move(s));
  }

  return out;
}

inline const AttackScenario* find_scenario(
    const std::vector<AttackScenario>& scenarios, const std::string& name) {
  for (const auto& s : scenarios) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

}  // namespace latticetag
