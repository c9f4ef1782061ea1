// latticetag command line: key generation, registration, honest runs,
// attack scenarios, and cost reports. Exit codes: 0 success, 1
// authentication failure, 2 attack not blocked, 64 usage, 65 bad data.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "latticetag/latticetag.hpp"

namespace lt = latticetag;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAuthFailure = 1;
constexpr int kExitAttackSucceeded = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

struct ParamFlags {
  std::uint32_t n = 64;
  std::uint32_t m = 2048;
  std::uint32_t q = 257;
  std::uint32_t l = 256;
  std::uint32_t p = 2;
  double sigma = 0.0;

  lt::Params to_params() const {
    lt::Params prm;
    prm.n = n;
    prm.m = m;
    prm.q = q;
    prm.l = l;
    prm.p = static_cast<std::uint16_t>(p);
    prm.sigma = sigma;
    return prm.validated();
  }
};

void add_param_flags(CLI::App* cmd, ParamFlags& flags) {
  cmd->add_option("--n", flags.n, "matrix rows");
  cmd->add_option("--m", flags.m, "vector length / matrix columns");
  cmd->add_option("--q", flags.q, "prime modulus");
  cmd->add_option("--l", flags.l, "digest bits");
  cmd->add_option("--p", flags.p, "norm exponent");
  cmd->add_option("--sigma", flags.sigma, "norm bound (default sqrt(m))");
}

// --seed flag, then LATTICETAG_SEED, then system entropy. Always echoed
// so any run can be reproduced.
lt::Seed resolve_seed(const std::string& flag) {
  if (!flag.empty()) return lt::Seed::from_hex(flag);
  if (const char* env = std::getenv("LATTICETAG_SEED");
      env != nullptr && *env != '\0') {
    return lt::Seed::from_hex(env);
  }
  return lt::Seed::from_entropy();
}

std::string hex_prefix(const std::vector<std::uint8_t>& bytes, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < n && i < bytes.size(); ++i) {
    out.push_back(digits[bytes[i] >> 4]);
    out.push_back(digits[bytes[i] & 0x0f]);
  }
  return out;
}

int cmd_keygen(const ParamFlags& flags, const std::string& role_str,
               const std::string& seed_flag, const std::string& out_path) {
  const lt::Params prm = flags.to_params();
  const lt::Role role = role_str == "tag" ? lt::Role::Tag : lt::Role::Reader;
  const lt::Seed seed = resolve_seed(seed_flag);
  std::cout << "seed: " << seed.to_hex() << "\n";

  lt::Rng rng(seed);
  lt::Credential cred = lt::generate_credential(prm, role, rng);
  lt::save_credential(cred, out_path);

  std::cout << "role: " << lt::role_name(role) << "\n"
            << "params: n=" << prm.n << " m=" << prm.m << " q=" << prm.q
            << " l=" << prm.l << " p=" << prm.p << " sigma=" << prm.sigma
            << "\n"
            << "identity weight: " << std::llround(std::pow(
                   lt::norm_p(cred.x, 2), 2.0))
            << " of " << prm.m << ", |x|_" << prm.p << " = "
            << lt::norm_p(cred.x, prm.p) << "\n"
            << "y fingerprint: "
            << hex_prefix(lt::h1(cred.y, prm).bytes, 8) << "\n"
            << "wrote " << out_path << "\n";
  return kExitOk;
}

int cmd_register(const std::string& registry_path, const std::string& cred_path) {
  lt::Credential cred = lt::load_credential(cred_path);
  lt::RegistryFile file;
  if (std::filesystem::exists(registry_path)) {
    file = lt::load_registry_file(registry_path);
  }
  for (const auto& existing : file.tags) {
    if (existing.params != cred.params) {
      throw lt::FormatError("registry params disagree with credential");
    }
  }
  for (const auto& existing : file.readers) {
    if (existing.params != cred.params) {
      throw lt::FormatError("registry params disagree with credential");
    }
  }
  (cred.role == lt::Role::Tag ? file.tags : file.readers).push_back(cred);
  lt::save_registry(file, registry_path);
  std::cout << "registered " << lt::role_name(cred.role) << " from "
            << cred_path << "\n"
            << "registry now holds " << file.tags.size() << " tag(s), "
            << file.readers.size() << " reader(s)\n";
  return kExitOk;
}

int cmd_run(const std::string& registry_path, const std::string& tag_path,
            const std::string& reader_path, const std::string& seed_flag) {
  const lt::Seed seed = resolve_seed(seed_flag);
  std::cout << "seed: " << seed.to_hex() << "\n";

  lt::ServerRegistry registry = lt::build_registry(
      lt::load_registry_file(registry_path));
  lt::Credential tag_cred = lt::load_credential(tag_path);
  lt::Credential reader_cred = lt::load_credential(reader_path);
  if (tag_cred.params != registry.params() ||
      reader_cred.params != registry.params()) {
    throw lt::FormatError("credential params disagree with registry");
  }
  if (tag_cred.role != lt::Role::Tag || reader_cred.role != lt::Role::Reader) {
    throw lt::FormatError("role mismatch between --tag and --reader files");
  }

  lt::Rng rng(seed);
  auto res = lt::run_honest_session(registry, tag_cred, reader_cred, rng);

  const char* step_for_type[8] = {"",  "1", "2", "3", "4.3", "5", "6.2", "7"};
  std::uint64_t tr_bits = 0, rs_bits = 0;
  for (const auto& rec : res.transcript) {
    (rec.channel == lt::ChannelId::TagReader ? tr_bits : rs_bits) +=
        rec.payload_bits;
    std::cout << "step " << step_for_type[rec.msg_type] << "  "
              << std::setw(14) << std::left << lt::direction_name(rec.dir)
              << "  " << std::setw(15) << lt::message_name(rec.msg_type)
              << "  " << rec.payload_bits << " bits (" << rec.bytes.size()
              << " byte frame)\n";
  }
  std::cout << "scan lengths: readers tried " << res.stats.reader_records_tried
            << ", tags tried " << res.stats.tag_records_tried << "\n";

  const lt::Params& prm = registry.params();
  auto wire = lt::communication_cost(prm, lt::Convention::CeilLog);
  auto paper = lt::communication_cost(prm, lt::Convention::RealLog);
  std::cout << "transcript payload (wire convention): reader-tag " << tr_bits
            << " bits, reader-server " << rs_bits << " bits\n"
            << "analytic wire convention:             reader-tag "
            << static_cast<std::uint64_t>(wire.reader_tag_bits())
            << " bits, reader-server "
            << static_cast<std::uint64_t>(wire.reader_server_bits())
            << " bits\n"
            << std::fixed << std::setprecision(1)
            << "analytic real-log convention:         reader-tag "
            << paper.reader_tag_bits() << " bits ("
            << std::setprecision(2) << lt::to_kilobytes(paper.reader_tag_bits())
            << " KB), reader-server " << std::setprecision(1)
            << paper.reader_server_bits() << " bits (" << std::setprecision(2)
            << lt::to_kilobytes(paper.reader_server_bits()) << " KB)\n";

  if (res.outcome.success) {
    std::cout << "result: SUCCESS (" << res.transcript.size() << " frames)\n";
    return kExitOk;
  }
  std::cout << "result: FAILURE " << lt::failure_name(*res.outcome.reason)
            << " -- " << res.outcome.detail << "\n";
  return kExitAuthFailure;
}

int cmd_attack(const ParamFlags& flags, const std::string& name,
               const std::string& seed_flag, int trials,
               const std::string& out_path) {
  const lt::Params prm = flags.to_params();
  const lt::Seed seed = resolve_seed(seed_flag);
  std::cout << "seed: " << seed.to_hex() << "\n";

  auto scenarios = lt::builtin_scenarios();
  std::vector<const lt::AttackScenario*> selected;
  if (name == "all") {
    for (const auto& s : scenarios) selected.push_back(&s);
  } else {
    const auto* s = lt::find_scenario(scenarios, name);
    if (s == nullptr) {
      std::cerr << "unknown scenario '" << name << "'; available:";
      for (const auto& sc : scenarios) std::cerr << ' ' << sc.name;
      std::cerr << " all\n";
      return kExitUsage;
    }
    selected.push_back(s);
  }

  lt::Rng rng(seed);
  lt::Credential tag_cred = lt::generate_credential(prm, lt::Role::Tag, rng);
  lt::Credential reader_cred =
      lt::generate_credential(prm, lt::Role::Reader, rng);
  lt::ServerRegistry registry(prm);
  registry.register_credential(tag_cred);
  registry.register_credential(reader_cred);

  std::ostringstream report;
  bool all_blocked = true;
  for (const auto* scenario : selected) {
    for (int t = 0; t < trials; ++t) {
      lt::Rng trial_rng(rng.fork());
      auto verdict = lt::run_scenario(*scenario, registry, tag_cred,
                                      reader_cred, trial_rng);
      const bool ok = verdict.attack_blocked;
      all_blocked = all_blocked && ok;
      std::ostringstream line;
      line << scenario->name << (scenario->expect_success ? " " : " ")
           << (ok ? (scenario->expect_success ? "TRANSPARENT" : "BLOCKED")
                  : "NOT BLOCKED")
           << "  check=\""
           << (verdict.outcome.success ? "none (session succeeded)"
                                       : verdict.outcome.detail)
           << "\" frames=" << verdict.transcript.size();
      if (trials > 1) line << " trial=" << t;
      std::cout << line.str() << "\n";
      report << line.str() << "\n";
    }
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw lt::IoError("cannot write " + out_path);
    out << report.str();
    std::cout << "report written to " << out_path << "\n";
  }
  return all_blocked ? kExitOk : kExitAttackSucceeded;
}

int cmd_cost(const ParamFlags& flags, std::vector<std::uint32_t> sweep,
             const std::string& convention, const std::string& out_path) {
  std::vector<lt::Convention> conventions;
  if (convention == "paper") {
    conventions = {lt::Convention::RealLog};
  } else if (convention == "wire") {
    conventions = {lt::Convention::CeilLog};
  } else if (convention == "both") {
    conventions = {lt::Convention::RealLog, lt::Convention::CeilLog};
  } else {
    std::cerr << "unknown convention '" << convention
              << "' (expected paper, wire, or both)\n";
    return kExitUsage;
  }
  if (sweep.empty()) sweep.push_back(flags.m);

  std::ostringstream csv;
  csv << lt::cost_csv_header() << "\n";
  for (std::uint32_t m : sweep) {
    ParamFlags row = flags;
    row.m = m;
    for (lt::Convention c : conventions) {
      csv << lt::cost_csv_row(row.to_params(), c) << "\n";
    }
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw lt::IoError("cannot write " + out_path);
    out << csv.str();
    std::cout << "csv written to " << out_path << "\n";
  } else {
    std::cout << csv.str();
  }

  // Annotate the headline configuration against the reference figures.
  for (std::uint32_t m : sweep) {
    ParamFlags row = flags;
    row.m = m;
    const lt::Params prm = row.to_params();
    if (prm.m != 2048 || prm.n != 64 || prm.q != 257 || prm.l != 256) continue;
    auto st = lt::storage_cost(prm, lt::Convention::RealLog);
    auto cm = lt::communication_cost(prm, lt::Convention::RealLog);
    auto delta = [](double v, double ref) {
      std::ostringstream os;
      os << std::showpos << std::fixed << std::setprecision(2)
         << (v - ref) / ref * 100.0 << "%";
      return os.str();
    };
    std::cout << std::fixed << std::setprecision(4)
              << "headline check (real-log, reference in parentheses):\n"
              << "  storage  tag " << lt::to_megabytes(st.tag_bits) << " MB (0.129, "
              << delta(lt::to_megabytes(st.tag_bits), 0.129) << ")"
              << ", reader " << lt::to_megabytes(st.reader_bits) << " MB (0.132, "
              << delta(lt::to_megabytes(st.reader_bits), 0.132) << ")"
              << ", server " << lt::to_megabytes(st.server_bits) << " MB (0.515, "
              << delta(lt::to_megabytes(st.server_bits), 0.515) << ")\n"
              << "  comm     reader-tag " << lt::to_kilobytes(cm.reader_tag_bits())
              << " KB (6.06, "
              << delta(lt::to_kilobytes(cm.reader_tag_bits()), 6.06) << ")"
              << ", reader-server "
              << lt::to_kilobytes(cm.reader_server_bits()) << " KB (14.16, "
              << delta(lt::to_kilobytes(cm.reader_server_bits()), 14.16)
              << ")\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice-based three-party RFID mutual authentication"};
  app.require_subcommand(1);

  int exit_code = kExitOk;

  // keygen
  auto* keygen = app.add_subcommand("keygen", "generate a device credential");
  ParamFlags kg_flags;
  std::string kg_role, kg_seed, kg_out;
  add_param_flags(keygen, kg_flags);
  keygen->add_option("--role", kg_role, "tag or reader")
      ->required()
      ->check(CLI::IsMember({"tag", "reader"}));
  keygen->add_option("--seed", kg_seed, "32-byte hex seed");
  keygen->add_option("--out", kg_out, "output credential file")->required();
  keygen->callback(
      [&]() { exit_code = cmd_keygen(kg_flags, kg_role, kg_seed, kg_out); });

  // register
  auto* reg = app.add_subcommand("register",
                                 "add a credential to a registry file");
  std::string rg_registry, rg_cred;
  reg->add_option("--registry", rg_registry, "registry file")->required();
  reg->add_option("--cred", rg_cred, "credential file")->required();
  reg->callback([&]() { exit_code = cmd_register(rg_registry, rg_cred); });

  // run
  auto* run = app.add_subcommand("run", "run one honest authentication");
  std::string rn_registry, rn_tag, rn_reader, rn_seed;
  run->add_option("--registry", rn_registry, "registry file")->required();
  run->add_option("--tag", rn_tag, "tag credential file")->required();
  run->add_option("--reader", rn_reader, "reader credential file")->required();
  run->add_option("--seed", rn_seed, "32-byte hex seed");
  run->callback(
      [&]() { exit_code = cmd_run(rn_registry, rn_tag, rn_reader, rn_seed); });

  // attack
  auto* attack = app.add_subcommand("attack", "run insecure-channel attack "
                                              "scenarios (must be blocked)");
  ParamFlags at_flags;
  std::string at_name = "all", at_seed, at_out;
  int at_trials = 1;
  add_param_flags(attack, at_flags);
  attack->add_option("scenario", at_name, "scenario name or 'all'");
  attack->add_option("--seed", at_seed, "32-byte hex seed");
  attack->add_option("--trials", at_trials, "seeded trials per scenario")
      ->check(CLI::PositiveNumber);
  attack->add_option("--out", at_out, "write line report here");
  attack->callback([&]() {
    exit_code = cmd_attack(at_flags, at_name, at_seed, at_trials, at_out);
  });

  // cost
  auto* cost = app.add_subcommand("cost", "storage/communication/computation "
                                          "cost report");
  ParamFlags ct_flags;
  std::string ct_convention = "both", ct_out;
  std::vector<std::uint32_t> ct_sweep;
  add_param_flags(cost, ct_flags);
  cost->add_option("--sweep", ct_sweep, "list of m values")->delimiter(',');
  cost->add_option("--convention", ct_convention, "paper, wire, or both");
  cost->add_option("--out", ct_out, "write CSV here");
  cost->callback([&]() {
    exit_code = cmd_cost(ct_flags, ct_sweep, ct_convention, ct_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const lt::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitData;
  } catch (const lt::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitData;
  } catch (const lt::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitData;
  } catch (const lt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return exit_code;
}
