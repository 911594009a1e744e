// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run every criterion
//   acceptance 3 7        run a subset
// Exit status is 0 only if every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "endorse/cli/cli.hpp"
#include "endorse/common/rng.hpp"
#include "endorse/crypto/rogue_key.hpp"
#include "endorse/crypto/scheme.hpp"
#include "endorse/protocol/ledger.hpp"
#include "endorse/selection/probability.hpp"
#include "endorse/simulator/bootstrap.hpp"
#include "endorse/simulator/pow.hpp"
#include "support/failure_table.hpp"
#include "support/oracles.hpp"
#include "support/plain_bls.hpp"

namespace {

using namespace endorse;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1, 2: analytic failure probability ------------------------------------------------

Outcome golden_values() {
  std::size_t matched = 0, total = 0;
  double worst = 0;
  std::string misses;
  for (const auto& row : testing::kFailureTable) {
    for (auto [ratio, expected] : {std::pair{0.5, row.half}, std::pair{1.0 / 3.0, row.third}}) {
      const double got = selection::failure_probability(row.n, ratio);
      const double rel = std::abs(got - expected) / expected;
      worst = std::max(worst, rel);
      ++total;
      if (rel < 5e-4) {
        ++matched;
      } else {
        misses += fmt(" (%d, %.4f): %.4e vs %.4e", row.n, ratio, got, expected);
      }
    }
  }
  const bool spot = fmt("%.4e", selection::failure_probability(28, 0.5)) == "6.7055e-08" &&
                    fmt("%.4e", selection::failure_probability(26, 1.0 / 3.0)) == "6.4968e-08";
  return {matched == 42 && total == 42 && spot,
          fmt("%zu/%zu values within 4 significant figures, worst relative error %.2e", matched, total, worst) + misses};
}

Outcome thresholds() {
  const int half = selection::min_group_count(1e-7, 0.5);
  const int third = selection::min_group_count(1e-7, 1.0 / 3.0);
  return {half == 28 && third == 26, fmt("min_group_count(1e-7, 1/2) = %d, min_group_count(1e-7, 1/3) = %d", half, third)};
}

// ---- 3, 4: signature scheme -------------------------------------------------------------

crypto::PublicKeySet set_of(const std::vector<crypto::KeyPair>& keys) {
  std::vector<crypto::G2Point> pks;
  for (const auto& k : keys) pks.push_back(k.public_key());
  return crypto::PublicKeySet(std::move(pks));
}

Outcome scheme_properties() {
  Rng rng(0xacce97);
  std::size_t honest_ok = 0;
  std::map<std::string, std::size_t> tamper_rejected;
  constexpr std::size_t kCases = 1000;
  for (std::size_t c = 0; c < kCases; ++c) {
    const std::size_t n = 1 + rng.below(16);
    std::vector<crypto::KeyPair> keys;
    for (std::size_t i = 0; i < n; ++i) keys.push_back(crypto::KeyPair::generate(rng));
    const auto set = set_of(keys);
    auto vec = crypto::EndorserVector::for_set(set);
    std::vector<std::size_t> signers;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.below(2)) signers.push_back(i);
    if (signers.empty()) signers.push_back(rng.below(n));
    Bytes message(1 + rng.below(64));
    rng.fill(message);
    std::vector<crypto::Signature> sigs;
    for (auto i : signers) {
      vec.set(i);
      sigs.push_back(crypto::sign(keys[i], message, set, i));
    }
    const auto agg = crypto::aggregate_signatures(vec, sigs, message);
    if (crypto::verify_endorsement(agg, set)) ++honest_ok;

    auto point = agg;
    point.sigma += crypto::G1Point::random(rng);
    if (!crypto::verify_endorsement(point, set)) ++tamper_rejected["signature point"];

    auto msg = agg;
    msg.message[rng.below(msg.message.size())] ^= static_cast<std::uint8_t>(1u << rng.below(8));
    if (!crypto::verify_endorsement(msg, set)) ++tamper_rejected["message byte"];

    auto bit = agg;
    const auto flip = rng.below(n);
    bit.vector.set(flip, !bit.vector.test(flip));
    if (!crypto::verify_endorsement(bit, set)) ++tamper_rejected["vector bit"];

    auto pks = set.keys();
    pks[signers[rng.below(signers.size())]] = crypto::KeyPair::generate(rng).public_key();
    const crypto::PublicKeySet substituted(std::move(pks));
    auto rebound = agg;
    rebound.vector = crypto::EndorserVector(n, substituted.digest());
    for (auto i : signers) rebound.vector.set(i);
    if (!crypto::verify_endorsement(rebound, substituted) && !crypto::verify_endorsement(agg, substituted))
      ++tamper_rejected["substituted pk"];
  }
  bool pass = honest_ok == kCases && tamper_rejected.size() == 4;
  std::string detail = fmt("%zu/%zu honest aggregates verify; rejected tampering:", honest_ok, kCases);
  for (const auto& [kind, count] : tamper_rejected) {
    pass = pass && count == kCases;
    detail += fmt(" %s %zu/%zu,", kind.c_str(), count, kCases);
  }
  detail.pop_back();
  return {pass, detail};
}

Outcome rogue_key() {
  Rng rng(0x70607e);
  std::size_t plain_accepts = 0, scheme_rejects = 0;
  constexpr std::size_t kSets = 100;
  for (std::size_t t = 0; t < kSets; ++t) {
    const std::size_t n = 2 + rng.below(15);
    std::vector<crypto::KeyPair> keys;
    for (std::size_t i = 0; i < n; ++i) keys.push_back(crypto::KeyPair::generate(rng));
    const auto victims = set_of(keys);
    auto vec = crypto::EndorserVector::for_set(victims);
    for (std::size_t i = 0; i < n; ++i)
      if (rng.below(2)) vec.set(i);
    if (vec.popcount() == 0) vec.set(rng.below(n));
    Bytes message(32);
    rng.fill(message);
    const auto forgery = crypto::rogue_key_attempt(crypto::Scalar::random(rng), victims, vec, message);
    const auto agg = forgery.as_aggregate();
    if (testing::plain_verify(agg, forgery.forged_set)) ++plain_accepts;
    if (!crypto::verify_endorsement(agg, forgery.forged_set)) ++scheme_rejects;
  }
  return {plain_accepts == kSets && scheme_rejects == kSets,
          fmt("coefficient-free verifier accepts %zu/%zu forgeries, scheme verifier rejects %zu/%zu", plain_accepts,
              kSets, scheme_rejects, kSets)};
}

// ---- 5: Monte Carlo --------------------------------------------------------------------

Outcome monte_carlo() {
  constexpr std::uint64_t kTrials = 1'000'000;
  bool pass = true;
  std::string detail;
  for (int n : {10, 13, 16}) {
    for (double p : {1.0 / 3.0, 0.5}) {
      const std::size_t nodes = 10 * static_cast<std::size_t>(n + 1);
      selection::SelectionConfig config{nodes, static_cast<std::size_t>(n) + 1, p, 2024};
      const auto mc = selection::monte_carlo_group_failure(config, kTrials);
      const double analytic = selection::failure_probability(n, p);
      const double z = (mc.rate - analytic) / mc.standard_error;
      const auto adversaries = static_cast<std::int64_t>(std::llround(p * static_cast<double>(nodes)));
      const double exact = static_cast<double>(
          testing::exact_selection_failure(static_cast<std::int64_t>(nodes), adversaries, n));
      const double z_exact = (mc.rate - exact) / mc.standard_error;
      pass = pass && std::abs(z) <= 3;
      detail += fmt(" [n=%d p=%.3f N=%zu: empirical %.4e, analytic %.4e (z=%.0f), exact hypergeometric %.4e (z=%.2f)]",
                    n, p, nodes, mc.rate, analytic, z, exact, z_exact);
    }
  }
  return {pass, "empirical vs analytic within 3 SE at every point:" + detail};
}

// ---- 6, 7, 8: simulator ----------------------------------------------------------------

simulator::BootstrapReport simulate(std::size_t nodes, std::size_t n, std::uint64_t seed = 1) {
  simulator::RunConfig c;
  c.sim.node_count = nodes;
  c.sim.endorsement_nodes = n;
  c.sim.seed = seed;
  return simulator::run_bootstrap(c.sim, c.net).report;
}

Outcome scaling() {
  std::vector<std::pair<std::size_t, double>> by_nodes;
  bool monotone = true;
  for (std::size_t nodes : {250u, 500u, 1000u, 2000u}) {
    by_nodes.emplace_back(nodes, simulate(nodes, 20).completion_time_s);
    if (by_nodes.size() > 1) monotone = monotone && by_nodes.back().second > by_nodes[by_nodes.size() - 2].second;
  }
  std::map<std::size_t, double> by_n;
  for (std::size_t n : {10u, 20u, 30u}) by_n[n] = simulate(1000, n).completion_time_s;
  const double node_ratio = by_nodes.back().second / by_nodes.front().second;
  const double n_ratio = by_n[30] / by_n[10];
  std::string detail = "completion (s):";
  for (auto [nodes, t] : by_nodes) detail += fmt(" N=%zu %.4f,", nodes, t);
  detail += fmt(" monotone %s, t(2000)/t(250) = %.3f (<= 12);", monotone ? "yes" : "no", node_ratio);
  for (auto [n, t] : by_n) detail += fmt(" n=%zu %.4f,", n, t);
  detail += fmt(" t(n=30)/t(n=10) = %.4f (<= 1.5)", n_ratio);
  return {monotone && node_ratio <= 12 && n_ratio <= 1.5, detail};
}

Outcome message_audit() {
  std::size_t runs = 0, per_candidate_ok = 0, total_ok = 0;
  double worst_total = 0;
  std::string misses;
  for (std::size_t nodes : {100u, 500u, 1000u}) {
    for (std::size_t n : {10u, 20u, 30u}) {
      for (bool faulty : {false, true}) {
        simulator::RunConfig c;
        c.sim.node_count = nodes;
        c.sim.endorsement_nodes = n;
        c.sim.seed = 7 + runs;
        if (faulty) {
          c.sim.adversary_fraction = 0.2;
          c.sim.adversary_mix = {0.25, 0.25, 0.25, 0.25};
        }
        const auto r = simulator::run_bootstrap(c.sim, c.net).report;
        ++runs;
        const std::uint64_t bound = 2 * n + c.net.gossip_fanout;
        const double rel = std::abs(static_cast<double>(r.direct_total) - static_cast<double>(r.direct_expected)) /
                           static_cast<double>(r.direct_expected);
        worst_total = std::max(worst_total, rel);
        if (r.max_direct_per_candidate <= bound) ++per_candidate_ok;
        if (rel <= 0.05) ++total_ok;
        if (r.max_direct_per_candidate > bound || rel > 0.05)
          misses += fmt(" (N=%zu n=%zu faulty=%d: per-candidate %llu vs %llu, total off by %.2f%%)", nodes, n, faulty,
                        static_cast<unsigned long long>(r.max_direct_per_candidate),
                        static_cast<unsigned long long>(bound), 100 * rel);
      }
    }
  }
  return {per_candidate_ok == runs && total_ok == runs,
          fmt("%zu runs: per-candidate <= 2n + fanout in %zu, total within 5%% of identities*(n+1) in %zu "
              "(worst %.2f%%)",
              runs, per_candidate_ok, total_ok, 100 * worst_total) +
              misses};
}

Outcome sybil_linearity() {
  constexpr std::size_t kRuns = 100;
  std::size_t ok = 0, sybil_identities = 0, active = 0, records = 0;
  std::string misses;
  for (std::size_t run = 0; run < kRuns; ++run) {
    simulator::RunConfig c;
    c.sim.node_count = 30;
    c.sim.endorsement_nodes = 5;
    c.sim.seed = 1000 + run;
    c.sim.crypto = simulator::CryptoMode::Full;
    c.sim.adversary_fraction = 0.2;
    c.sim.adversary_mix = {0, 0, 1, 0};
    c.sim.sybil_identities = 5;
    const auto result = simulator::run_bootstrap(c.sim, c.net, {false, true});
    const auto& r = result.report;
    std::set<std::string> tokens;
    std::size_t lines = 0;
    for (const auto& line : result.ledger_lines) {
      if (line.empty() || line.front() == '#') continue;
      ++lines;
      tokens.insert(protocol::LedgerRecord::decode(from_hex(line)).token_address);
    }
    sybil_identities += r.identities - r.nodes;
    active += r.ledger_active;
    records += lines;
    const bool good = r.ledger_active <= r.distinct_deposits && tokens.size() == lines && lines == r.ledger_active &&
                      r.identities > r.nodes;
    if (good) {
      ++ok;
    } else {
      misses += fmt(" (seed %llu: %zu active, %zu deposits, %zu distinct tokens in %zu records)",
                    static_cast<unsigned long long>(c.sim.seed), r.ledger_active, r.distinct_deposits, tokens.size(),
                    lines);
    }
  }
  return {ok == kRuns, fmt("%zu/%zu runs keep ACTIVE records <= distinct deposits with one record per deposit "
                           "(%zu extra Sybil identities presented, %zu records exported)",
                           ok, kRuns, sybil_identities, records) +
                           misses};
}

// ---- 9: proof-of-work baseline ---------------------------------------------------------

Outcome pow_comparison() {
  const simulator::WorkModel work;
  const unsigned difficulty = simulator::calibrate_difficulty(20.0, work, 20.0);
  const auto pow = simulator::run_pow_baseline(difficulty, 20, 9, work, 20.0);
  bool pass = true;
  std::string detail = fmt("PoW difficulty %u, mean %.0f hashes = %.0f work units, %.2f simulated s per solve;", difficulty,
                           pow.mean_hashes, pow.cpu_work_units, pow.solve_time_s);
  for (std::size_t n : {10u, 20u, 30u}) {
    const auto endorsement = simulator::measure_endorsement_work(n, 9, work);
    const double ratio = pow.cpu_work_units / static_cast<double>(endorsement.work_units);
    pass = pass && ratio >= 100;
    detail += fmt(" n=%zu endorsement %llu units (%.0fx fewer),", n,
                  static_cast<unsigned long long>(endorsement.work_units), ratio);
  }
  detail.pop_back();
  pass = pass && pow.solve_time_s > 10 && pow.solve_time_s < 40;
  return {pass, detail};
}

// ---- 10: determinism -------------------------------------------------------------------

std::map<std::string, std::string> run_and_collect(const std::vector<std::string>& args, const fs::path& dir,
                                                   int& code) {
  fs::remove_all(dir);
  auto full = args;
  full.insert(full.end(), {"--out", dir.string()});
  std::ostringstream out, err;
  code = cli::run_cli(full, out, err);
  std::map<std::string, std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    files[entry.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  fs::remove_all(dir);
  return files;
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "endorse_acceptance_determinism";
  fs::create_directories(base);
  {
    std::ofstream(base / "adversarial.json") << R"({"sim": {"node_count": 60, "endorsement_nodes": 6,
      "crypto": "full", "adversary_fraction": 0.2,
      "adversary_mix": {"SILENT": 0.25, "INVALID_SIG": 0.25, "SYBIL_DUPLICATE": 0.25, "ROGUE_KEY": 0.25}}})";
    std::ofstream(base / "sweep.json") << R"({"sweep": {"node_count": [100, 200], "endorsement_nodes": [10, 20]}})";
  }
  const std::string adversarial = (base / "adversarial.json").string();
  const std::string sweep = (base / "sweep.json").string();
  const std::vector<std::vector<std::string>> commands = {
      {"simulate", "--seed", "11"},
      {"simulate", "--seed", "11", "--format", "csv"},
      {"simulate", "--config", adversarial, "--seed", "5", "--export-ledger"},
      {"simulate", "--config", adversarial, "--seed", "5", "--format", "csv"},
      {"simulate", "--config", sweep, "--format", "csv"},
      {"probability-table"},
      {"probability-table", "--format", "json"},
      {"keygen", "--seed", "3"},
      {"pow", "--difficulty", "10", "--trials", "10"},
      {"reconfigure", "--joins", "5"},
  };
  std::size_t identical = 0, files = 0;
  std::string misses;
  for (const auto& args : commands) {
    int first_code = 0, second_code = 0;
    const auto first = run_and_collect(args, base / "a", first_code);
    const auto second = run_and_collect(args, base / "b", second_code);
    files += first.size();
    if (first_code == 0 && second_code == 0 && !first.empty() && first == second) {
      ++identical;
    } else {
      misses += " (" + args[0] + " " + (args.size() > 1 ? args[1] : "") + ")";
    }
  }
  fs::remove_all(base);
  return {identical == commands.size(),
          fmt("%zu/%zu commands byte-identical across two runs (%zu JSON/CSV files compared)", identical,
              commands.size(), files) +
              misses};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "failure-probability golden values", 1, golden_values},
      {2, "minimum group count thresholds", 1, thresholds},
      {3, "aggregate signature correctness and tamper rejection", 120, scheme_properties},
      {4, "rogue-key forgery rejected", 60, rogue_key},
      {5, "Monte Carlo agrees with analytic failure probability", 120, monte_carlo},
      {6, "completion time scaling", 300, scaling},
      {7, "message complexity audit", 300, message_audit},
      {8, "Sybil deposit linearity", 120, sybil_linearity},
      {9, "endorsement vs proof-of-work work units", 60, pow_comparison},
      {10, "byte-identical reruns", 300, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    try {
      selected.insert(std::stoi(argv[i]));
    } catch (const std::exception&) {
      std::fprintf(stderr, "usage: %s [criterion ...]\n", argv[0]);
      return 2;
    }
  }
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds < c.budget_s;
    const bool pass = outcome.pass && in_budget;
    failures += !pass;
    std::printf("%s criterion %d: %s (%.2f s, budget %.0f s%s) %s\n", pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                c.budget_s, in_budget ? "" : ", exceeded", outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
