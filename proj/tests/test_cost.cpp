#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "latticetag/cost.hpp"

using namespace latticetag;

namespace {

Seed test_seed(std::uint8_t fill) {
  Seed s;
  s.bytes.fill(fill);
  return s;
}

bool within_percent(double value, double reference, double pct) {
  return std::abs(value - reference) <= std::abs(reference) * pct / 100.0;
}

}  // namespace

TEST_CASE("headline storage reproduces the published figures") {
  auto st = storage_cost(Params::headline(), Convention::RealLog);
  CHECK(within_percent(to_megabytes(st.tag_bits), 0.129, 1.0));
  CHECK(within_percent(to_megabytes(st.reader_bits), 0.132, 1.0));
  CHECK(within_percent(to_megabytes(st.server_bits), 0.515, 1.0));
}

TEST_CASE("headline storage under whole-bit packing") {
  auto st = storage_cost(Params::headline(), Convention::CeilLog);
  CHECK(st.tag_bits == 1220608.0);  // 2048*9 + 2048*11 + 64*2048*9
  CHECK(st.reader_bits == st.tag_bits + 2048.0 * 11);
}

TEST_CASE("storage formula collapses at n = 0") {
  Params prm = Params::headline();
  prm.n = 0;
  auto st = storage_cost(prm, Convention::RealLog);
  const double lq = std::log2(257.0);
  CHECK_THAT(st.tag_bits,
             Catch::Matchers::WithinRel(2048 * lq + 2048 * 11.0, 1e-12));
}

TEST_CASE("headline communication reproduces the published figures") {
  auto cm = communication_cost(Params::headline(), Convention::RealLog);
  CHECK(within_percent(to_kilobytes(cm.reader_tag_bits()), 6.06, 1.0));
  CHECK(within_percent(to_kilobytes(cm.reader_server_bits()), 14.16, 1.0));
}

TEST_CASE("communication formula collapses at l = 0, m = 0") {
  Params prm = Params::headline();
  prm.l = 0;
  prm.m = 0;
  auto cm = communication_cost(prm, Convention::RealLog);
  CHECK_THAT(cm.total_bits(),
             Catch::Matchers::WithinRel(3.0 * std::log2(257.0), 1e-12));
}

TEST_CASE("whole-bit communication equals the wire payload exactly") {
  Rng rng(test_seed(151));
  for (const Params& prm : {Params::toy(), Params::headline()}) {
    Credential tag_cred = generate_credential(prm, Role::Tag, rng);
    Credential reader_cred = generate_credential(prm, Role::Reader, rng);
    ServerRegistry reg(prm);
    reg.register_credential(tag_cred);
    reg.register_credential(reader_cred);

    auto res = run_honest_session(reg, tag_cred, reader_cred, rng);
    REQUIRE(res.outcome.success);

    std::uint64_t tr_bits = 0, rs_bits = 0;
    for (const auto& rec : res.transcript) {
      (rec.channel == ChannelId::TagReader ? tr_bits : rs_bits) +=
          rec.payload_bits;
    }
    auto cm = communication_cost(prm, Convention::CeilLog);
    CHECK(tr_bits == static_cast<std::uint64_t>(cm.reader_tag_bits()));
    CHECK(rs_bits == static_cast<std::uint64_t>(cm.reader_server_bits()));
  }

  // Headline numbers, spelled out.
  auto cm = communication_cost(Params::headline(), Convention::CeilLog);
  CHECK(cm.reader_tag_bits() == 55817.0);    // 3m*9 + 2l + 9
  CHECK(cm.reader_server_bits() == 130322.0);  // 7m*9 + 5l + 2*9
}

TEST_CASE("headline computation counts") {
  auto cp = computation_cost(Params::headline());
  CHECK(cp.tag_ops == 288832);
  CHECK(cp.reader_ops == 36866);
  CHECK(cp.server_ops == 571648);
  CHECK(cp.total_ops() == 897346);
}

TEST_CASE("per-entity computation sums to the grand total on a grid") {
  for (std::uint32_t m : {1u, 8u, 64u, 256u, 2048u, 4096u}) {
    for (std::uint32_t n : {1u, 2u, 16u, 64u, 128u}) {
      Params prm;
      prm.m = m;
      prm.n = n;
      auto cp = computation_cost(prm);
      const std::uint64_t M = m, N = n;
      CHECK(cp.total_ops() == 54 * M + 5 * N + 6 * M * N + 2);
    }
  }
}

TEST_CASE("unit substitution m = n = 1") {
  Params prm;
  prm.m = 1;
  prm.n = 1;
  CHECK(computation_cost(prm).total_ops() == 67);
}

TEST_CASE("computation counts ignore q") {
  Params a = Params::toy();
  Params b = Params::toy();
  b.q = 257;
  auto ca = computation_cost(a);
  auto cb = computation_cost(b);
  CHECK(ca.tag_ops == cb.tag_ops);
  CHECK(ca.reader_ops == cb.reader_ops);
  CHECK(ca.server_ops == cb.server_ops);
}

TEST_CASE("instrumented session matches the closed forms exactly") {
  Rng rng(test_seed(153));
  for (const Params& prm : {Params::toy(), Params::headline()}) {
    Credential tag_cred = generate_credential(prm, Role::Tag, rng);
    Credential reader_cred = generate_credential(prm, Role::Reader, rng);
    ServerRegistry reg(prm);
    reg.register_credential(tag_cred);
    reg.register_credential(reader_cred);

    auto cost = instrumented_session_cost(reg, tag_cred, reader_cred, rng);
    auto table = computation_cost(prm);
    const std::uint64_t m = prm.m, n = prm.n;

    CHECK(cost.tag.table_equivalent() == table.tag_ops);
    CHECK(cost.reader.table_equivalent() == table.reader_ops);
    CHECK(cost.server.table_equivalent() == table.server_ops);

    // The raw tallies carry exactly the two documented residues.
    CHECK(cost.tag.actual == table.tag_ops);
    CHECK(cost.reader.actual == table.reader_ops + 2 * m * n);
    CHECK(cost.server.actual == table.server_ops - (m - n));

    CHECK(cost.reader_scan_overhead == 0);
    CHECK(cost.tag_scan_overhead == 0);
    CHECK(cost.stats.reader_records_tried == 1);
    CHECK(cost.stats.tag_records_tried == 1);
  }
}

TEST_CASE("instrumented counters are reproducible") {
  Params prm = Params::toy();
  Rng setup(test_seed(154));
  Credential tag_cred = generate_credential(prm, Role::Tag, setup);
  Credential reader_cred = generate_credential(prm, Role::Reader, setup);
  ServerRegistry reg(prm);
  reg.register_credential(tag_cred);
  reg.register_credential(reader_cred);

  Rng r1(test_seed(155)), r2(test_seed(155));
  auto c1 = instrumented_session_cost(reg, tag_cred, reader_cred, r1);
  auto c2 = instrumented_session_cost(reg, tag_cred, reader_cred, r2);
  CHECK(c1.tag.actual == c2.tag.actual);
  CHECK(c1.reader.actual == c2.reader.actual);
  CHECK(c1.server.actual == c2.server.actual);
}

TEST_CASE("a second registry record surfaces as scan overhead") {
  Params prm = Params::toy();
  Rng rng(test_seed(157));
  // Decoys registered first, so the scan tries them before the targets.
  Credential decoy_tag = generate_credential(prm, Role::Tag, rng);
  Credential decoy_reader = generate_credential(prm, Role::Reader, rng);
  Credential tag_cred = generate_credential(prm, Role::Tag, rng);
  Credential reader_cred = generate_credential(prm, Role::Reader, rng);
  ServerRegistry reg(prm);
  reg.register_credential(decoy_tag);
  reg.register_credential(decoy_reader);
  reg.register_credential(tag_cred);
  reg.register_credential(reader_cred);

  auto cost = instrumented_session_cost(reg, tag_cred, reader_cred, rng);
  const std::uint64_t m = prm.m, n = prm.n;
  CHECK(cost.stats.reader_records_tried == 2);
  CHECK(cost.stats.tag_records_tried == 2);
  CHECK(cost.reader_scan_overhead == 2 * m * n + 2 * n + 4 * m);
  CHECK(cost.tag_scan_overhead == 2 * m * n + 3 * n + 3 * m);
  // Net of the scan, the closed forms still hold exactly.
  CHECK(cost.server.table_equivalent() == computation_cost(prm).server_ops);
}

TEST_CASE("cost curves are monotone in m") {
  double prev_storage = 0, prev_comm = 0;
  std::uint64_t prev_comp = 0;
  for (std::uint32_t m : {256u, 512u, 1024u, 2048u, 4096u}) {
    Params prm = Params::headline();
    prm.m = m;
    auto st = storage_cost(prm, Convention::RealLog);
    auto cm = communication_cost(prm, Convention::RealLog);
    auto cp = computation_cost(prm);
    CHECK(st.total_bits() > prev_storage);
    CHECK(cm.total_bits() > prev_comm);
    CHECK(cp.total_ops() > prev_comp);
    prev_storage = st.total_bits();
    prev_comm = cm.total_bits();
    prev_comp = cp.total_ops();
  }
}

TEST_CASE("csv rows line up with the header") {
  const std::string header = cost_csv_header();
  const std::string row = cost_csv_row(Params::headline(), Convention::CeilLog);
  auto count_fields = [](const std::string& s) {
    return 1 + std::count(s.begin(), s.end(), ',');
  };
  CHECK(count_fields(header) == count_fields(row));
  CHECK(row.find("2048,64,257,256,ceil-log") == 0);
  CHECK(row.find("288832") != std::string::npos);
  // Whole-bit rows are integral.
  CHECK(row.find('.') == std::string::npos);
}
