#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <regex>
#include <set>
#include <sstream>

#include "endorse/common/error.hpp"
#include "endorse/crypto/rogue_key.hpp"
#include "endorse/protocol/ledger.hpp"
#include "endorse/protocol/request.hpp"
#include "endorse/selection/probability.hpp"
#include "endorse/simulator/bootstrap.hpp"
#include "endorse/simulator/pow.hpp"
#include "endorse/simulator/reconfiguration.hpp"

namespace endorse::simulator {
namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::MalformedInput;
}

SimConfig small(std::size_t nodes, std::size_t n, std::uint64_t seed = 1) {
  SimConfig s;
  s.node_count = nodes;
  s.endorsement_nodes = n;
  s.seed = seed;
  return s;
}

AdversaryMix all_kinds() { return {1, 1, 1, 1}; }

std::uint64_t originated_announcements(const BootstrapReport& r) {
  std::uint64_t rejected = 0;
  for (const auto& [reason, count] : r.failure_reasons)
    if (reason != "quorum_timeout" && reason != "not_finalized") rejected += count;
  return r.finalized + rejected + r.forgery_attempts;
}

void expect_message_audit(const BootstrapReport& r, const NetworkConfig& net, bool within_five_percent = true) {
  EXPECT_LE(r.max_direct_per_candidate, 2 * r.endorsement_nodes + net.gossip_fanout);
  EXPECT_EQ(r.direct_total, r.identities * r.endorsement_nodes + originated_announcements(r));
  EXPECT_EQ(r.direct_expected, r.identities * (r.endorsement_nodes + 1));
  if (!within_five_percent) return;
  const double expected = static_cast<double>(r.direct_expected);
  EXPECT_LE(std::abs(static_cast<double>(r.direct_total) - expected), 0.05 * expected);
}

void expect_delivery_bounds(const BootstrapReport& r, const NetworkConfig& net) {
  EXPECT_LE(r.max_hop_ms, net.delta_ms);
  EXPECT_LE(r.max_round_trip_ms, 2 * net.delta_ms + net.protocol_timeout_ms);
  EXPECT_EQ(r.honest_unreached, 0u);
}

std::size_t responders(const BootstrapPlan& plan, const Identity& id) {
  return static_cast<std::size_t>(
      std::count_if(id.endorsers.begin(), id.endorsers.end(), [&](auto e) { return plan.responds(e); }));
}

// ---- configuration -------------------------------------------------------------

TEST(SimConfig, JsonRoundTrip) {
  RunConfig c;
  c.sim = small(250, 20, 99);
  c.sim.adversary_fraction = 0.2;
  c.sim.adversary_mix = {1, 2, 3, 4};
  c.sim.adversaries = {{3, AdversaryKind::RogueKey}};
  c.sim.crypto = CryptoMode::Full;
  c.sim.work = {40, 4, 2};
  c.net.jitter_ms = 5;
  c.net.gossip_fanout = 9;
  auto back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(SimConfig, MissingKeysKeepDefaults) {
  auto c = run_config_from_json(nlohmann::json::parse(R"({"sim": {"node_count": 40}})"));
  EXPECT_EQ(c.sim.node_count, 40u);
  EXPECT_EQ(c.sim.endorsement_nodes, 10u);
  EXPECT_EQ(c.net.link_latency_ms, 100.0);
  EXPECT_EQ(c.net.link_bandwidth_mbps, 25.0);
}

TEST(SimConfig, RejectsBadInput) {
  for (const char* text : {
           R"({"sim": {"node_count": 5, "endorsement_nodes": 10}})",
           R"({"sim": {"node_cont": 40}})",
           R"({"sim": {"node_count": -4}})",
           R"({"sim": {"node_count": "many"}})",
           R"({"sim": {"adversary_fraction": 1.0}})",
           R"({"sim": {"crypto": "fast"}})",
           R"({"sim": {"adversaries": [{"node": 0, "kind": "LOUD"}]}})",
           R"({"sim": {"adversaries": [{"node": 0}, {"node": 0}]}})",
           R"({"sim": {"adversaries": [{"node": 100}]}})",
           R"({"sim": {"adversary_fraction": 0.1, "adversary_mix": {"SILENT": 0}}})",
           R"({"network": {"link_bandwidth_mbps": 0}})",
           R"({"network": {"gossip_fanout": 0}})",
           R"({"network": {"delta_ms": 1, "extra": true}})",
           R"({"other": {}})",
           R"([1, 2])",
       }) {
    EXPECT_EQ(code_of([&] { run_config_from_json(nlohmann::json::parse(text)); }), ErrorCode::ConfigInvalid) << text;
  }
}

TEST(SimConfig, LoadErrors) {
  EXPECT_EQ(code_of([] { load_run_config("/nonexistent/config.json"); }), ErrorCode::IoFailure);
  const std::string path = ::testing::TempDir() + "bad_config.json";
  {
    std::ofstream out(path);
    out << "{not json";
  }
  EXPECT_EQ(code_of([&] { load_run_config(path); }), ErrorCode::ConfigInvalid);
}

TEST(SimConfig, StressRunFlag) {
  auto s = small(30, 4);
  s.adversary_fraction = 0.3;
  EXPECT_FALSE(s.stress_run());
  s.adversary_fraction = 0.34;
  EXPECT_TRUE(s.stress_run());
  s.adversary_fraction = 0;
  for (std::uint32_t i = 0; i < 10; ++i) s.adversaries.push_back({i, AdversaryKind::Silent});
  EXPECT_TRUE(s.stress_run());
}

// ---- network --------------------------------------------------------------------

TEST(Network, TransmissionTime) {
  NetworkConfig net;
  EXPECT_EQ(transmission_time(1024, net), 327680);  // 8192 bits at 25 Mbit/s
  EXPECT_EQ(transmission_time(0, net), 0);
}

TEST(Network, FullMeshDeliveryOfOneKilobyte) {
  NetworkConfig net;
  const std::size_t nodes = 50;
  net.gossip_fanout = nodes - 1;
  Overlay overlay(nodes, net.gossip_fanout, 7);
  auto relays = std::make_unique<bool[]>(nodes);
  std::fill_n(relays.get(), nodes, true);
  auto g = gossip(overlay, 0, 1024, net, std::span<const bool>(relays.get(), nodes), 7);
  for (std::size_t i = 1; i < nodes; ++i) EXPECT_EQ(g.delivered[i], from_ms(100) + 327680);
  EXPECT_EQ(g.delivered[0], 0);
  EXPECT_NEAR(static_cast<double>(g.delivered[1]) / 1e6, 100.32, 0.01);
}

TEST(Network, OverlayIsRegularAndConnected) {
  for (auto [nodes, fanout] : std::vector<std::pair<std::size_t, std::size_t>>{
           {2, 6}, {7, 6}, {8, 6}, {9, 7}, {40, 1}, {40, 2}, {40, 6}, {300, 6}, {1000, 10}}) {
    Overlay overlay(nodes, fanout, nodes * 13 + fanout);
    const std::size_t degree = std::min(fanout, nodes - 1);
    std::vector<std::size_t> in_degree(nodes, 0);
    for (std::uint32_t i = 0; i < nodes; ++i) {
      auto peers = overlay.peers(i);
      EXPECT_EQ(peers.size(), degree);
      std::set<std::uint32_t> distinct(peers.begin(), peers.end());
      EXPECT_EQ(distinct.size(), peers.size());
      EXPECT_EQ(distinct.count(i), 0u);
      for (auto p : peers) ++in_degree[p];
    }
    for (auto d : in_degree) EXPECT_EQ(d, degree) << nodes << "/" << fanout;
    for (std::uint32_t start : {0u, static_cast<std::uint32_t>(nodes - 1)}) {
      std::vector<bool> reached(nodes, false);
      std::vector<std::uint32_t> stack{start};
      reached[start] = true;
      while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto p : overlay.peers(v))
          if (!reached[p]) reached[p] = true, stack.push_back(p);
      }
      EXPECT_TRUE(std::all_of(reached.begin(), reached.end(), [](bool b) { return b; })) << nodes;
    }
  }
}

TEST(Network, GossipDeliversWithinDeltaAcrossSweep) {
  NetworkConfig net;
  Rng rng(2024);
  std::size_t total_messages = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t nodes = 20 + rng.below(400);
    net.gossip_fanout = 3 + rng.below(8);
    net.jitter_ms = static_cast<double>(rng.below(3)) * 10.0;
    const auto seed = rng.next();
    Overlay overlay(nodes, net.gossip_fanout, seed);
    auto relays = std::make_unique<bool[]>(nodes);
    std::fill_n(relays.get(), nodes, true);
    const auto origin = static_cast<std::uint32_t>(rng.below(nodes));
    auto g = gossip(overlay, origin, 256 + rng.below(2048), net, std::span<const bool>(relays.get(), nodes), seed);
    for (auto t : g.delivered) ASSERT_TRUE(t >= 0 && t <= from_ms(net.delta_ms)) << "trial " << trial;
    EXPECT_LE(g.messages, nodes * net.gossip_fanout);
    total_messages += g.messages;
  }
  EXPECT_GT(total_messages, 0u);
}

TEST(Network, SilentNodesReceiveButDoNotRelay) {
  NetworkConfig net;
  const std::size_t nodes = 30;
  Overlay overlay(nodes, 4, 3);
  auto relays = std::make_unique<bool[]>(nodes);
  std::fill_n(relays.get(), nodes, false);
  auto g = gossip(overlay, 5, 256, net, std::span<const bool>(relays.get(), nodes), 3);
  std::size_t reached = 0;
  for (auto t : g.delivered) reached += t >= 0;
  EXPECT_EQ(reached, 1 + overlay.peers(5).size());
  EXPECT_EQ(g.messages, overlay.peers(5).size());
}

TEST(Network, LinksAreFifoWithoutJitter) {
  NetworkConfig net;
  Links links(net, 1);
  auto first = links.send(0, 1, 4096, 0);
  auto second = links.send(0, 1, 128, 0);
  EXPECT_LT(first, second);
  EXPECT_EQ(second - first, transmission_time(128, net));
  EXPECT_EQ(links.send(1, 0, 128, 0), from_ms(100) + transmission_time(128, net));
}

TEST(Network, JitterCanReorderMessages) {
  NetworkConfig net;
  net.jitter_ms = 50;
  bool in_order = false, reordered = false;
  for (std::uint64_t seed = 0; seed < 200 && !(in_order && reordered); ++seed) {
    Links links(net, seed);
    auto a = links.send(0, 1, 256, 0);
    auto b = links.send(0, 1, 256, 0);
    (a < b ? in_order : reordered) = true;
  }
  EXPECT_TRUE(in_order);
  EXPECT_TRUE(reordered);
}

// ---- bootstrap --------------------------------------------------------------------

TEST(Bootstrap, NoFaultsEveryoneFinalizes) {
  NetworkConfig net;
  auto r = run_bootstrap(small(100, 10), net).report;
  EXPECT_EQ(r.finalized, 100u);
  EXPECT_EQ(r.failed_candidates, 0u);
  EXPECT_TRUE(r.failure_reasons.empty());
  EXPECT_EQ(r.ledger_active, 100u);
  EXPECT_EQ(r.per_node_times_s.size(), 100u);
  EXPECT_GT(r.completion_time_s, 0.0);
  EXPECT_EQ(r.per_node_summary.max, r.completion_time_s);
  EXPECT_EQ(r.crypto.signs, 100u * 10);
  expect_message_audit(r, net);
  expect_delivery_bounds(r, net);
}

TEST(Bootstrap, OpCountsFollowTheDeclaredModel) {
  NetworkConfig net;
  auto sim = small(40, 6);
  auto r = run_bootstrap(sim, net).report;
  const auto& c = r.crypto;
  const auto t = selection::quorum_threshold(6);
  const auto per_ann = op_model::verify_aggregate(t);
  EXPECT_EQ(c.signs, 40u * 6);
  EXPECT_EQ(c.signature_verifications, 40u * 6);
  EXPECT_EQ(c.announcement_verifications, 40u * 39);
  // Every aggregate carries exactly the first t signatures collected; the
  // host's own ledger check is not charged a second time.
  EXPECT_EQ(c.ops.pairings, 2 * c.signature_verifications + 2 * c.announcement_verifications);
  EXPECT_EQ(c.ops.exponentiations, c.signs + c.signature_verifications + per_ann.exponentiations * (40u * 39));
  EXPECT_EQ(c.ops.hashes, 2 * c.signs + 2 * c.signature_verifications + per_ann.hashes * (40u * 39));
  EXPECT_EQ(c.work_units, sim.work.units(c.ops));
}

TEST(Bootstrap, ThreeSilentEndorsersOfOneCandidate) {
  NetworkConfig net;
  auto sim = small(100, 12);
  const auto honest = plan_bootstrap(sim);
  const auto& victim = honest.identities[0];
  ASSERT_EQ(victim.endorsers.size(), 12u);
  for (std::size_t silent : {3u, 4u}) {
    auto s = sim;
    for (std::size_t i = 0; i < silent; ++i) s.adversaries.push_back({victim.endorsers[i], AdversaryKind::Silent});
    auto result = run_bootstrap(s, net);
    const auto& r = result.report;
    const bool victim_done = result.signers[0].size() == selection::quorum_threshold(12);
    if (silent == 3) {
      EXPECT_TRUE(victim_done);
      EXPECT_GE(r.per_node_times_s[0], 0.0);
    } else {
      EXPECT_FALSE(victim_done);
      EXPECT_EQ(r.per_node_times_s[0], -1.0);
      EXPECT_GE(r.failure_reasons.at("quorum_timeout"), 1u);
    }
    EXPECT_EQ(r.conformant_stalled, 0u);
    expect_message_audit(r, net);
  }
}

TEST(Bootstrap, DeterministicReportsAndEvents) {
  NetworkConfig net;
  net.jitter_ms = 20;
  auto sim = small(80, 8, 5);
  sim.adversary_fraction = 0.25;
  sim.adversary_mix = all_kinds();
  BootstrapOptions opts{true, false};
  auto a = run_bootstrap(sim, net, opts);
  auto b = run_bootstrap(sim, net, opts);
  EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
  EXPECT_EQ(a.events_csv_rows, b.events_csv_rows);
  sim.seed = 6;
  auto c = run_bootstrap(sim, net, opts);
  EXPECT_NE(a.report.to_json().dump(), c.report.to_json().dump());
}

TEST(Bootstrap, EventRowsAreWellFormed) {
  auto result = run_bootstrap(small(30, 4), NetworkConfig{}, {true, false});
  ASSERT_FALSE(result.events_csv_rows.empty());
  const std::regex row(R"(\d+\.\d{9},[a-z_]+,\d+)");
  double last = 0;
  for (const auto& line : result.events_csv_rows) {
    ASSERT_TRUE(std::regex_match(line, row)) << line;
    double t = std::stod(line.substr(0, line.find(',')));
    EXPECT_GE(t, last);
    last = t;
  }
  EXPECT_EQ(std::string(kEventsCsvHeader), "event_time,event_type,node_id");
}

TEST(Bootstrap, FullCryptoMatchesModeledCosts) {
  NetworkConfig net;
  for (std::uint64_t seed : {1, 2}) {
    auto sim = small(36, 5, seed);
    sim.adversary_fraction = 0.3;
    sim.adversary_mix = all_kinds();
    sim.sybil_identities = 3;
    auto modeled = run_bootstrap(sim, net);
    sim.crypto = CryptoMode::Full;
    auto full = run_bootstrap(sim, net);
    EXPECT_EQ(modeled.report.to_json().dump(), full.report.to_json().dump()) << seed;
    EXPECT_EQ(modeled.signers, full.signers);
    EXPECT_GT(full.report.forgery_attempts, 0u);
  }
}

TEST(Bootstrap, ExportedLedgerReplays) {
  auto sim = small(24, 4, 3);
  sim.crypto = CryptoMode::Full;
  sim.adversary_fraction = 0.2;
  sim.adversary_mix = {0, 1, 1, 1};
  auto result = run_bootstrap(sim, NetworkConfig{}, {false, true});
  ASSERT_EQ(result.ledger_lines.size(), result.report.ledger_active);
  std::stringstream text;
  for (const auto& line : result.ledger_lines) text << line << "\n";
  auto replayed = protocol::GlobalLedger::import_lines(text);
  EXPECT_EQ(replayed.active_count(), result.report.ledger_active);
  std::set<std::string> tokens;
  for (const auto& line : result.ledger_lines)
    EXPECT_TRUE(tokens.insert(protocol::LedgerRecord::decode(from_hex(line)).token_address).second);
}

TEST(Bootstrap, QuorumSoundnessUnderFaults) {
  NetworkConfig net;
  const auto t = selection::quorum_threshold(8);
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto sim = small(120, 8, seed);
    sim.adversary_fraction = 0.3;
    sim.adversary_mix = all_kinds();
    const auto plan = plan_bootstrap(sim);
    auto result = run_bootstrap(sim, net);
    const auto& r = result.report;
    EXPECT_FALSE(r.stress_run);
    EXPECT_EQ(r.conformant_stalled, 0u) << seed;
    std::size_t k = 0;
    for (std::uint32_t id = 0; id < plan.identities.size(); ++id) {
      const auto& ident = plan.identities[id];
      if (ident.extra || !plan.honest(ident.host)) continue;
      const bool can = responders(plan, ident) >= t;
      EXPECT_EQ(result.signers[id].size() == t, can) << "seed " << seed << " identity " << id;
      EXPECT_EQ(r.per_node_times_s[k] >= 0, can) << "seed " << seed << " identity " << id;
      ++k;
    }
    expect_message_audit(r, net);
    expect_delivery_bounds(r, net);
  }
}

TEST(Bootstrap, InvalidSignatureBitsNeverSet) {
  NetworkConfig net;
  std::uint64_t discarded = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto sim = small(90, 9, seed);
    sim.adversary_fraction = 0.3;
    sim.adversary_mix = {0, 1, 0, 0};
    const auto plan = plan_bootstrap(sim);
    auto result = run_bootstrap(sim, net);
    for (const auto& signers : result.signers)
      for (auto node : signers) EXPECT_NE(plan.node_kind[node], AdversaryKind::InvalidSig);
    discarded += result.report.invalid_signatures_discarded;
  }
  EXPECT_GT(discarded, 0u);
}

TEST(Bootstrap, InvalidSignatureBitsNeverSetWithRealCrypto) {
  auto sim = small(24, 5, 4);
  sim.crypto = CryptoMode::Full;
  sim.adversary_fraction = 0.3;
  sim.adversary_mix = {0, 1, 0, 0};
  const auto plan = plan_bootstrap(sim);
  auto result = run_bootstrap(sim, NetworkConfig{}, {false, true});
  EXPECT_GT(result.report.invalid_signatures_discarded, 0u);
  for (const auto& signers : result.signers)
    for (auto node : signers) EXPECT_NE(plan.node_kind[node], AdversaryKind::InvalidSig);
}

TEST(Bootstrap, SybilOwnersGetAtMostOneRecord) {
  NetworkConfig net;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto sim = small(60, 6, seed);
    sim.adversary_fraction = 0.2;
    sim.adversary_mix = {0, 0, 1, 0};
    auto r = run_bootstrap(sim, net).report;
    EXPECT_EQ(r.identities, 60u + 12 * 4);
    EXPECT_LE(r.ledger_active, r.distinct_deposits);
    EXPECT_EQ(r.distinct_deposits, 60u);
    EXPECT_EQ(r.ledger_active, r.finalized);
    expect_message_audit(r, net);
  }
}

TEST(Bootstrap, SybilWithRealLedger) {
  auto sim = small(20, 3, 8);
  sim.crypto = CryptoMode::Full;
  sim.adversaries = {{0, AdversaryKind::SybilDuplicate}, {1, AdversaryKind::SybilDuplicate}};
  auto result = run_bootstrap(sim, NetworkConfig{}, {false, true});
  EXPECT_EQ(result.report.identities, 28u);
  EXPECT_LE(result.report.ledger_active, 20u);
  std::map<std::string, int> per_token;
  for (const auto& line : result.ledger_lines) ++per_token[protocol::LedgerRecord::decode(from_hex(line)).token_address];
  for (const auto& [token, count] : per_token) EXPECT_EQ(count, 1) << token;
  EXPECT_GE(result.report.failure_reasons.count("deposit_reused"), 1u);
}

TEST(Bootstrap, RogueKeyForgeriesNeverLandEndToEnd) {
  std::size_t attempts = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto sim = small(12, 3, seed);
    sim.crypto = CryptoMode::Full;
    sim.adversaries = {{static_cast<std::uint32_t>(seed % 12), AdversaryKind::RogueKey}};
    auto r = run_bootstrap(sim, NetworkConfig{}).report;
    EXPECT_EQ(r.forgery_attempts, 1u);
    EXPECT_EQ(r.forgeries_accepted, 0u);
    EXPECT_EQ(r.ledger_active, 12u);
    attempts += r.forgery_attempts;
  }
  EXPECT_EQ(attempts, 12u);
}

TEST(Bootstrap, RogueKeyForgeriesRejectedByLedger) {
  Rng rng(77);
  protocol::GlobalLedger ledger;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(4);
    std::vector<crypto::G2Point> pks;
    for (std::size_t i = 0; i < n; ++i) pks.push_back(crypto::KeyPair::generate(rng).public_key());
    crypto::PublicKeySet victims(pks);
    auto vector = crypto::EndorserVector::for_set(victims);
    crypto::G2Point sum;
    for (std::size_t i = 0; i < n; ++i) {
      vector.set(i);
      sum += pks[i];
    }
    const auto alpha = crypto::Scalar::random(rng);
    const auto rogue = crypto::G2Point::generator() * alpha + -sum;
    const std::string token = "deposit-" + std::to_string(trial);
    auto forgery = crypto::rogue_key_attempt(alpha, victims, vector, protocol::endorsement_message(rogue, token));
    ASSERT_EQ(forgery.rogue_key, rogue);
    protocol::LedgerRecord record{forgery.rogue_key, forgery.as_aggregate(), forgery.forged_set, token, 1,
                                  protocol::RecordStatus::Active, std::nullopt};
    ASSERT_EQ(code_of([&] { ledger.append(record); }), ErrorCode::VerificationFailed) << trial;
  }
  EXPECT_EQ(ledger.active_count(), 0u);
}

TEST(Bootstrap, MessageAuditAcrossConfigurations) {
  // With n = 3 the quorum is every endorser, so many candidates fail and
  // originate no announcement; only the exact decomposition applies there.
  for (std::size_t n : {3u, 10u, 20u}) {
    for (std::size_t fanout : {4u, 6u, 500u}) {
      NetworkConfig net;
      net.gossip_fanout = fanout;
      auto sim = small(150, n, n * 31 + fanout);
      sim.adversary_fraction = 0.2;
      sim.adversary_mix = all_kinds();
      auto r = run_bootstrap(sim, net).report;
      expect_message_audit(r, net, n >= 10);
      expect_delivery_bounds(r, net);
    }
  }
}

TEST(Bootstrap, CompletionGrowsWithNetworkSize) {
  NetworkConfig net;
  double last = 0;
  std::vector<double> per_node;
  for (std::size_t nodes : {100u, 200u, 400u}) {
    auto r = run_bootstrap(small(nodes, 10), net).report;
    EXPECT_GT(r.completion_time_s, last);
    last = r.completion_time_s;
    per_node.push_back(r.completion_time_s / static_cast<double>(nodes));
  }
  EXPECT_LT(*std::max_element(per_node.begin(), per_node.end()) / *std::min_element(per_node.begin(), per_node.end()),
            4.0);
}

TEST(Bootstrap, RejectsInvalidConfig) {
  EXPECT_EQ(code_of([] { run_bootstrap(small(10, 10), NetworkConfig{}); }), ErrorCode::ConfigInvalid);
  NetworkConfig net;
  net.link_bandwidth_mbps = -1;
  EXPECT_EQ(code_of([&] { run_bootstrap(small(40, 4), net); }), ErrorCode::ConfigInvalid);
}

TEST(Bootstrap, AdversaryPlacementAndApportioning) {
  auto sim = small(200, 10, 9);
  sim.adversary_fraction = 0.3;
  sim.adversary_mix = {1, 1, 1, 0};
  auto plan = plan_bootstrap(sim);
  std::map<AdversaryKind, int> count;
  for (const auto& k : plan.node_kind)
    if (k) ++count[*k];
  EXPECT_EQ(count[AdversaryKind::Silent] + count[AdversaryKind::InvalidSig] + count[AdversaryKind::SybilDuplicate], 60);
  EXPECT_EQ(count[AdversaryKind::Silent], 20);
  EXPECT_EQ(count[AdversaryKind::InvalidSig], 20);
  EXPECT_EQ(count[AdversaryKind::SybilDuplicate], 20);
  EXPECT_EQ(count.count(AdversaryKind::RogueKey), 0u);
  EXPECT_EQ(plan.identities.size(), 200u + 20 * 4);
  for (const auto& id : plan.identities) EXPECT_EQ(id.endorsers.size(), 10u);
}

// ---- proof-of-work baseline --------------------------------------------------------

TEST(Pow, DifficultyZeroTakesOneHash) {
  auto r = run_pow_baseline(0, 5, 1);
  EXPECT_EQ(r.measured_hashes, 5u);
  for (auto h : r.per_trial_hashes) EXPECT_EQ(h, 1u);
  EXPECT_EQ(r.expected_hashes, 1.0);
}

TEST(Pow, Difficulty16MeanWithinQuarter) {
  auto r = run_pow_baseline(16, 100, 2024);
  EXPECT_EQ(r.expected_hashes, 65536.0);
  EXPECT_NEAR(r.mean_hashes, 65536.0, 0.25 * 65536.0);
}

TEST(Pow, GeometricConcentration) {
  for (unsigned d : {4u, 8u, 12u}) {
    auto r = run_pow_baseline(d, 30, d);
    double ratio = r.mean_hashes / r.expected_hashes;
    EXPECT_GE(ratio, 0.1);
    EXPECT_LE(ratio, 10.0);
  }
}

TEST(Pow, WorkAndTimeAccounting) {
  WorkModel work{50, 5, 3};
  auto r = run_pow_baseline(6, 10, 4, work, 10.0);
  EXPECT_DOUBLE_EQ(r.cpu_work_units, r.mean_hashes * 3);
  EXPECT_DOUBLE_EQ(r.solve_time_s, r.mean_hashes * 3 * 10.0 / 1e6);
  EXPECT_EQ(run_pow_baseline(6, 10, 4).per_trial_hashes, r.per_trial_hashes);
}

TEST(Pow, Calibration) {
  EXPECT_EQ(calibrate_difficulty(20.0), 20u);
  EXPECT_EQ(calibrate_difficulty(20.0, {50, 5, 1}, 1.0), 24u);
  EXPECT_EQ(calibrate_difficulty(1e9, {50, 5, 1}, 1e-3), 30u);
  EXPECT_EQ(code_of([] { calibrate_difficulty(0); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] { run_pow_baseline(31, 1, 1); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] { run_pow_baseline(3, 0, 1); }), ErrorCode::ConfigInvalid);
}

TEST(Pow, EndorsementWorkMatchesModel) {
  for (std::size_t n : {1u, 10u, 20u}) {
    auto w = measure_endorsement_work(n, n);
    crypto::OpCounts sign = op_model::kSign, check = op_model::verify_aggregate(n);
    EXPECT_EQ(w.signing, (crypto::OpCounts{sign.hashes * n, sign.exponentiations * n, 0}));
    EXPECT_EQ(w.collection, (crypto::OpCounts{2 * n + 1, n, 2 * n}));
    EXPECT_EQ(w.record_check, check);
    WorkModel m;
    EXPECT_EQ(w.work_units, m.units(w.signing) + m.units(w.collection) + m.units(w.record_check));
  }
}

TEST(Pow, EndorsementIsHundredsOfTimesCheaper) {
  auto w = measure_endorsement_work(10, 1);
  const auto d = calibrate_difficulty(20.0);
  auto pow = run_pow_baseline(d, 3, 1);
  EXPECT_GE(pow.cpu_work_units / static_cast<double>(w.work_units), 100.0);
  EXPECT_GE(pow.expected_hashes / static_cast<double>(w.work_units), 100.0);
}

// ---- reconfiguration ---------------------------------------------------------------

TEST(Reconfiguration, NoJoinsIsGossipOnly) {
  auto r = measure_reconfiguration(small(100, 10), NetworkConfig{}, 0);
  EXPECT_EQ(r.joiners_finalized, 0u);
  EXPECT_EQ(r.messages, r.config_block_messages);
  EXPECT_LE(r.config_block_messages, 100u * 6);
  EXPECT_EQ(r.work_units, 100u);
  EXPECT_LT(r.message_ratio(), 0.05);
}

TEST(Reconfiguration, FivePercentJoinsIsCheap) {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto r = measure_reconfiguration(small(200, 10, seed), NetworkConfig{}, 10);
    EXPECT_EQ(r.joiners_finalized, 10u);
    EXPECT_LT(r.message_ratio(), 0.25);
    EXPECT_LT(r.work_ratio(), 0.25);
  }
}

TEST(Reconfiguration, AllJoinsMatchesBootstrap) {
  auto r = measure_reconfiguration(small(100, 10), NetworkConfig{}, 100);
  EXPECT_EQ(r.joiners_finalized, 100u);
  EXPECT_NEAR(r.message_ratio(), 1.0, 0.05);
  EXPECT_NEAR(r.work_ratio(), 1.0, 0.05);
}

TEST(Reconfiguration, JoinersUseExistingGroups) {
  auto sim = small(100, 10);
  auto plan = plan_reconfiguration(sim, 20);
  ASSERT_EQ(plan.identities.size(), 20u);
  std::size_t members = 0;
  for (const auto& g : plan.groups) members += g.members.size();
  EXPECT_EQ(members, 80u);
  for (const auto& id : plan.identities) {
    EXPECT_GE(id.host, 80u);
    EXPECT_EQ(id.endorsers.size(), 10u);
    for (auto e : id.endorsers) EXPECT_LT(e, 80u);
  }
  EXPECT_EQ(code_of([&] { plan_reconfiguration(sim, 101); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([&] { plan_reconfiguration(sim, 95); }), ErrorCode::ConfigInvalid);
}

}  // namespace
}  // namespace endorse::simulator
