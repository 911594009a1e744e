#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "endorse/common/error.hpp"
#include "endorse/protocol/collection.hpp"
#include "endorse/protocol/epoch.hpp"
#include "endorse/protocol/ledger.hpp"
#include "endorse/protocol/request.hpp"
#include "endorse/selection/probability.hpp"

namespace endorse::protocol {
namespace {

using crypto::KeyPair;
using crypto::PublicKeySet;
using selection::NodeId;

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

const PerformanceMatrix kGood{1.0, 25.0, 1.0};

struct World {
  std::vector<KeyPair> keys;
  TokenRegistry registry;
  Policy policy;

  explicit World(std::size_t n, std::uint64_t seed = 1) {
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      keys.push_back(KeyPair::generate(rng));
      registry.add(token(i), policy.min_deposit, keys.back().public_key());
    }
  }

  static TokenAddress token(std::size_t i) { return "tok-" + std::to_string(i); }

  PublicKeySet set_of(const std::vector<std::size_t>& members) const {
    std::vector<crypto::G2Point> pks;
    for (auto m : members) pks.push_back(keys[m].public_key());
    return PublicKeySet(std::move(pks));
  }

  EndorsementRequest request(std::size_t candidate, std::uint64_t epoch = 1, TokenAddress tok = {}) const {
    return {keys[candidate].public_key(), kGood, tok.empty() ? token(candidate) : tok, epoch};
  }

  /// Finalized record for `candidate` endorsed by `endorsers`, all of whom sign.
  LedgerRecord record(std::size_t candidate, const std::vector<std::size_t>& endorsers, TokenAddress tok = {}) const {
    auto req = request(candidate, 1, tok);
    auto set = set_of(endorsers);
    CollectionState c(set, endorsement_message(req.candidate_pk, req.token_address));
    for (std::size_t i = 0; i < endorsers.size(); ++i) c.collect(endorse(keys[endorsers[i]], req, set), i);
    auto agg = c.try_finalize();
    EXPECT_TRUE(agg.has_value());
    return {req.candidate_pk, *agg, set, req.token_address, 1, RecordStatus::Active, std::nullopt};
  }
};

std::vector<std::size_t> range(std::size_t first, std::size_t count) {
  std::vector<std::size_t> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = first + i;
  return v;
}

// ---- build_request -------------------------------------------------------------

TEST(BuildRequest, FreshCandidateBindsEpoch) {
  World w(2);
  RequestLog log;
  auto req = build_request({&w.keys[0], World::token(0), kGood}, 1, w.registry, w.policy, log);
  EXPECT_EQ(req.epoch, 1u);
  EXPECT_EQ(req.candidate_pk, w.keys[0].public_key());
  EXPECT_EQ(req.token_address, World::token(0));
}

TEST(BuildRequest, OncePerEpoch) {
  World w(1);
  RequestLog log;
  CandidateState c{&w.keys[0], World::token(0), kGood};
  build_request(c, 1, w.registry, w.policy, log);
  EXPECT_EQ(code_of([&] { build_request(c, 1, w.registry, w.policy, log); }),
            ErrorCode::AlreadyRequestedThisEpoch);
  EXPECT_NO_THROW(build_request(c, 2, w.registry, w.policy, log));
}

TEST(BuildRequest, DepositPreconditions) {
  World w(2);
  w.registry.add("small", w.policy.min_deposit - 1, w.keys[1].public_key());
  w.registry.mark_spent(World::token(0));
  RequestLog log;
  for (const TokenAddress& tok : {World::token(0), TokenAddress("missing"), TokenAddress("small")})
    EXPECT_EQ(code_of([&] { build_request({&w.keys[1], tok, kGood}, 1, w.registry, w.policy, log); }),
              ErrorCode::NoDeposit)
        << tok;
}

TEST(EndorsementRequest, EncodingRoundTrip) {
  World w(1);
  auto req = w.request(0, 7);
  req.performance = {2.5, 100.0, 3.25};
  auto back = EndorsementRequest::decode(req.encode());
  EXPECT_EQ(back.candidate_pk, req.candidate_pk);
  EXPECT_EQ(back.performance.bandwidth_mbps, 100.0);
  EXPECT_EQ(back.token_address, req.token_address);
  EXPECT_EQ(back.epoch, 7u);
  auto bytes = req.encode();
  bytes.push_back(0);
  EXPECT_EQ(code_of([&] { EndorsementRequest::decode(bytes); }), ErrorCode::MalformedEncoding);
}

// ---- evaluate_request ---------------------------------------------------------

TEST(EvaluateRequest, ThresholdsAreInclusive) {
  World w(2);
  EndorserState e{&w.keys[1], {}};
  EXPECT_TRUE(evaluate_request(e, w.request(0), w.registry, w.policy).approved());
}

TEST(EvaluateRequest, RejectionReasons) {
  World w(3);
  w.registry.add("small", w.policy.min_deposit - 1, w.keys[0].public_key());
  w.registry.mark_spent(World::token(2));
  auto reason = [&](EndorsementRequest req) {
    EndorserState e{&w.keys[1], {}};
    return evaluate_request(e, req, w.registry, w.policy).reject;
  };
  EXPECT_EQ(reason(w.request(0, 1, "missing")), RejectReason::InvalidToken);
  EXPECT_EQ(reason(w.request(0, 1, World::token(2))), RejectReason::SpentToken);
  EXPECT_EQ(reason(w.request(0, 1, "small")), RejectReason::InsufficientDeposit);
  for (int metric = 0; metric < 3; ++metric) {
    auto req = w.request(0);
    double* field[] = {&req.performance.cpu_score, &req.performance.bandwidth_mbps, &req.performance.storage_gb};
    *field[metric] = std::nextafter(*field[metric], 0.0);
    EXPECT_EQ(reason(req), RejectReason::InsufficientPerformance) << metric;
  }
}

TEST(EvaluateRequest, RateLimitedWithinEpoch) {
  World w(2);
  EndorserState e{&w.keys[1], {}};
  EXPECT_TRUE(evaluate_request(e, w.request(0, 1), w.registry, w.policy).approved());
  EXPECT_EQ(evaluate_request(e, w.request(0, 1), w.registry, w.policy).reject, RejectReason::RateLimited);
  EXPECT_TRUE(evaluate_request(e, w.request(0, 2), w.registry, w.policy).approved());
}

// ---- endorse ------------------------------------------------------------------

TEST(Endorse, SingleVerifiesAndSignersDiffer) {
  World w(4);
  auto set = w.set_of({1, 2, 3});
  auto req = w.request(0);
  auto m = endorsement_message(req.candidate_pk, req.token_address);
  auto s1 = endorse(w.keys[1], req, set);
  auto s2 = endorse(w.keys[2], req, set);
  EXPECT_TRUE(crypto::verify_signature(s1, m, set));
  EXPECT_TRUE(crypto::verify_signature(s2, m, set));
  EXPECT_NE(s1.point, s2.point);
  EXPECT_EQ(code_of([&] { endorse(w.keys[0], req, set); }), ErrorCode::NotAMember);
}

TEST(Endorse, ModifiedTokenFailsAggregateVerification) {
  World w(5);
  auto set = w.set_of({1, 2, 3, 4});
  auto good = w.request(0);
  auto bad = w.request(0, 1, "tok-other");
  auto m = endorsement_message(good.candidate_pk, good.token_address);
  auto vec = crypto::EndorserVector::for_set(set);
  std::vector<crypto::Signature> sigs;
  for (std::size_t i = 0; i < 4; ++i) {
    vec.set(i);
    sigs.push_back(endorse(w.keys[i + 1], i == 2 ? bad : good, set));
  }
  EXPECT_FALSE(crypto::verify_endorsement(crypto::aggregate_signatures(vec, sigs, m), set));
}

TEST(Messages, JoinAndExitAreDistinct) {
  World w(1);
  auto pk = w.keys[0].public_key();
  EXPECT_NE(endorsement_message(pk, "t"), exit_message(pk, "t"));
  EXPECT_NE(endorsement_message(pk, "t"), endorsement_message(pk, "u"));
}

// ---- collect / try_finalize ----------------------------------------------------

TEST(Collect, ThreeEndorsersNeedAllThree) {
  World w(4);
  auto set = w.set_of({1, 2, 3});
  auto req = w.request(0);
  CollectionState c(set, endorsement_message(req.candidate_pk, req.token_address));
  EXPECT_EQ(c.threshold(), 3u);
  c.collect(endorse(w.keys[1], req, set), 0);
  c.collect(endorse(w.keys[2], req, set), 1);
  EXPECT_EQ(c.popcount(), 2u);
  EXPECT_FALSE(c.finalizable());
  EXPECT_FALSE(c.try_finalize().has_value());
}

TEST(Collect, DuplicateAndInvalid) {
  World w(4);
  auto set = w.set_of({1, 2, 3});
  auto req = w.request(0);
  CollectionState c(set, endorsement_message(req.candidate_pk, req.token_address));
  auto s = endorse(w.keys[1], req, set);
  c.collect(s, 0);
  EXPECT_EQ(code_of([&] { c.collect(s, 0); }), ErrorCode::DuplicateEndorser);

  Rng rng(3);
  crypto::Signature junk{crypto::G1Point::random(rng), 1};
  EXPECT_EQ(code_of([&] { c.collect(junk, 1); }), ErrorCode::BadSignature);
  EXPECT_EQ(code_of([&] { c.collect(endorse(w.keys[3], req, set), 1); }), ErrorCode::BadSignature);
  EXPECT_EQ(code_of([&] { c.collect(s, 9); }), ErrorCode::BadSignature);
  EXPECT_EQ(c.popcount(), 1u);
  EXPECT_EQ(c.signatures().size(), 1u);
  EXPECT_EQ(c.rejected(), 3u);
  EXPECT_FALSE(c.vector().test(1));
}

class ThirtyEndorsers : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { world = new World(31, 9); }
  static void TearDownTestSuite() { delete world; }
  static World* world;
};
World* ThirtyEndorsers::world = nullptr;

TEST_F(ThirtyEndorsers, FinalizesExactlyAtThreshold) {
  const World& w = *world;
  auto set = w.set_of(range(1, 30));
  auto req = w.request(0);
  CollectionState c(set, endorsement_message(req.candidate_pk, req.token_address));
  EXPECT_EQ(c.threshold(), 21u);
  for (std::size_t i = 0; i < 20; ++i) c.collect(endorse(w.keys[i + 1], req, set), i);
  EXPECT_FALSE(c.try_finalize().has_value());
  c.collect(endorse(w.keys[21], req, set), 20);
  auto agg = c.try_finalize();
  ASSERT_TRUE(agg.has_value());

  // A fresh node holding only the announced bytes and the key set.
  auto announced = crypto::AggregateEndorsement::decode(agg->encode());
  auto fresh_set = PublicKeySet::decode(set.encode());
  EXPECT_TRUE(crypto::verify_endorsement(announced, fresh_set));

  TokenRegistry registry;
  registry.add(req.token_address, 1000, req.candidate_pk);
  GlobalLedger ledger(&registry);
  EXPECT_EQ(ledger.append({req.candidate_pk, announced, fresh_set, req.token_address, 1, RecordStatus::Active, {}}), 0u);
}

// ---- ledger -----------------------------------------------------------------------

TEST(Ledger, AppendSpendsDeposit) {
  World w(6);
  GlobalLedger ledger(&w.registry);
  EXPECT_EQ(ledger.append(w.record(0, {1, 2, 3, 4})), 0u);
  EXPECT_TRUE(w.registry.find(World::token(0))->spent);
  EXPECT_EQ(ledger.active_count(), 1u);
  EXPECT_EQ(ledger.find(w.keys[0].public_key()), 0u);
}

TEST(Ledger, DepositCannotBackTwoKeys) {
  World w(6);
  GlobalLedger ledger(&w.registry);
  ledger.append(w.record(0, {1, 2, 3, 4}));
  EXPECT_EQ(code_of([&] { ledger.append(w.record(5, {1, 2, 3, 4}, World::token(0))); }), ErrorCode::DepositReused);
  GlobalLedger bare;
  bare.append(w.record(0, {1, 2, 3, 4}));
  EXPECT_EQ(code_of([&] { bare.append(w.record(5, {1, 2, 3, 4}, World::token(0))); }), ErrorCode::DepositReused);
  EXPECT_EQ(bare.active_count(), 1u);
}

TEST(Ledger, OneRecordPerIdentity) {
  World w(6);
  GlobalLedger ledger(&w.registry);
  ledger.append(w.record(0, {1, 2, 3, 4}));
  EXPECT_EQ(code_of([&] { ledger.append(w.record(0, {1, 2, 3, 4}, World::token(5))); }), ErrorCode::DuplicateActive);
}

TEST(Ledger, RejectsBadRecords) {
  World w(6);
  GlobalLedger ledger(&w.registry);
  auto tampered = w.record(0, {1, 2, 3, 4});
  tampered.aggregate.sigma = tampered.aggregate.sigma + crypto::G1Point::generator();
  EXPECT_EQ(code_of([&] { ledger.append(tampered); }), ErrorCode::VerificationFailed);

  auto wrong_token = w.record(0, {1, 2, 3, 4});
  wrong_token.token_address = World::token(5);
  EXPECT_EQ(code_of([&] { ledger.append(wrong_token); }), ErrorCode::VerificationFailed);

  // Two of four signers: verifies cryptographically but misses the quorum of 3.
  auto req = w.request(0);
  auto set = w.set_of({1, 2, 3, 4});
  auto m = endorsement_message(req.candidate_pk, req.token_address);
  auto vec = crypto::EndorserVector::for_set(set);
  std::vector<crypto::Signature> sigs;
  for (std::size_t i : {0, 1}) {
    vec.set(i);
    sigs.push_back(endorse(w.keys[i + 1], req, set));
  }
  auto thin = crypto::aggregate_signatures(vec, sigs, m);
  ASSERT_TRUE(crypto::verify_endorsement(thin, set));
  EXPECT_EQ(code_of([&] { ledger.append({req.candidate_pk, thin, set, req.token_address, 1, RecordStatus::Active, {}}); }),
            ErrorCode::VerificationFailed);

  EXPECT_FALSE(w.registry.find(World::token(0))->spent);
  EXPECT_EQ(ledger.records().size(), 0u);
}

TEST(Ledger, GroupCheckRejectsSelfChosenEndorsers) {
  World w(8);
  auto assigned = w.set_of({1, 2, 3, 4});
  GlobalLedger ledger(&w.registry, [&](const crypto::G2Point&, const PublicKeySet& s) { return s == assigned; });
  EXPECT_EQ(code_of([&] { ledger.append(w.record(0, {5, 6, 7})); }), ErrorCode::VerificationFailed);
  EXPECT_NO_THROW(ledger.append(w.record(0, {1, 2, 3, 4})));
}

TEST(Ledger, ExportImportRoundTrip) {
  World w(8);
  GlobalLedger ledger(&w.registry);
  ledger.append(w.record(0, {1, 2, 3, 4}));
  ledger.append(w.record(5, {1, 2, 3, 4}));
  std::vector<selection::CandidateGroup> groups{{1, {NodeId{1}, NodeId{2}}}, {2, {NodeId{3}, NodeId{4}}},
                                                {3, {NodeId{6}, NodeId{7}}}, {4, {NodeId{0}, NodeId{5}}}};
  auto dir = [&](NodeId id) { return EndorserHandle{&w.keys[to_index(id)], true}; };
  ASSERT_TRUE(process_exit(ledger, w.keys[0].public_key(), NodeId{0}, groups, 3, dir).revoked);

  std::stringstream file;
  ledger.export_lines(file);
  auto text = file.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  std::istringstream in(text);
  auto back = GlobalLedger::import_lines(in);
  ASSERT_EQ(back.records().size(), 2u);
  EXPECT_EQ(back.records()[0].status, RecordStatus::Revoked);
  EXPECT_EQ(back.records()[1].status, RecordStatus::Active);
  EXPECT_EQ(back.records()[1].encode(), ledger.records()[1].encode());

  // Flip one hex digit inside the second record's signature.
  auto second = text.find('\n') + 1;
  text[second + 20] = text[second + 20] == '0' ? '1' : '0';
  std::istringstream bad(text);
  try {
    GlobalLedger::import_lines(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

// ---- exit ------------------------------------------------------------------------

class ExitFlow : public ::testing::Test {
 protected:
  ExitFlow() : w(13, 4), ledger(&w.registry) {
    std::vector<NodeId> ids;
    for (std::uint32_t i = 0; i < 12; ++i) ids.push_back(NodeId{i});
    groups = selection::partition_candidates(ids, 4, 17);
    ledger.append(w.record(0, {1, 2, 3, 4}));
  }
  EndorserHandle handle(NodeId id, bool answers = true) { return {&w.keys[to_index(id)], answers}; }

  World w;
  GlobalLedger ledger;
  std::vector<selection::CandidateGroup> groups;
};

TEST_F(ExitFlow, FullQuorumRevokesAndReleasesDeposit) {
  auto out = process_exit(ledger, w.keys[0].public_key(), NodeId{0}, groups, 5,
                          [&](NodeId id) { return handle(id); });
  EXPECT_TRUE(out.revoked);
  EXPECT_EQ(out.group.endorsers.size(), 3u);
  EXPECT_EQ(ledger.records()[0].status, RecordStatus::Revoked);
  EXPECT_FALSE(w.registry.find(World::token(0))->spent);
  EXPECT_EQ(ledger.active_count(), 0u);
  EXPECT_EQ(code_of([&] { ledger.append(w.record(0, {1, 2, 3, 4})); }), ErrorCode::DuplicateActive);
  EXPECT_NO_THROW(ledger.append(w.record(12, {1, 2, 3, 4}, World::token(0))));
}

TEST_F(ExitFlow, SilentExitGroupKeepsRecordActive) {
  auto out = process_exit(ledger, w.keys[0].public_key(), NodeId{0}, groups, 5,
                          [&](NodeId id) { return handle(id, to_index(id) % 2 == 0); });
  if (out.signatures < 3) {
    EXPECT_FALSE(out.revoked);
    EXPECT_EQ(ledger.records()[0].status, RecordStatus::Active);
  } else {
    EXPECT_TRUE(out.revoked);
  }
}

TEST_F(ExitFlow, UnknownOrRevokedKeyIsNotActive) {
  auto dir = [&](NodeId id) { return handle(id); };
  EXPECT_EQ(code_of([&] { process_exit(ledger, w.keys[7].public_key(), NodeId{7}, groups, 5, dir); }),
            ErrorCode::NotActive);
  process_exit(ledger, w.keys[0].public_key(), NodeId{0}, groups, 5, dir);
  EXPECT_EQ(code_of([&] { process_exit(ledger, w.keys[0].public_key(), NodeId{0}, groups, 5, dir); }),
            ErrorCode::NotActive);
}

TEST_F(ExitFlow, ExitProofMustCarryExitMessage) {
  auto join = ledger.records()[0];
  EXPECT_EQ(code_of([&] { ledger.revoke(join.candidate_pk, {join.aggregate, join.endorser_set}); }),
            ErrorCode::VerificationFailed);
}

TEST_F(ExitFlow, MidEpochNodeGetsFullGroup) {
  ledger.append(w.record(12, {1, 2, 3, 4}));
  auto out = process_exit(ledger, w.keys[12].public_key(), NodeId{12}, groups, 5,
                          [&](NodeId id) { return handle(id); });
  EXPECT_EQ(out.group.endorsers.size(), 3u);
  EXPECT_TRUE(out.revoked);
}

// ---- epochs ---------------------------------------------------------------------

TEST(EpochReconfigure, NoJoinsReshufflesSameMembers) {
  std::vector<NodeId> ids;
  for (std::uint32_t i = 0; i < 100; ++i) ids.push_back(NodeId{i});
  EpochState s;
  s.groups = selection::partition_candidates(ids, 9, 1);
  s.request_log.record(as_bytes("x"), 1);
  auto next = epoch_reconfigure(s, 2);
  EXPECT_EQ(next.number, 2u);
  EXPECT_EQ(next.groups.size(), 9u);
  EXPECT_EQ(next.request_log.size(), 0u);
  EXPECT_TRUE(next.pending_joins.empty());
  std::multiset<std::uint32_t> before, after;
  for (const auto& g : s.groups)
    for (auto m : g.members) before.insert(to_index(m));
  for (const auto& g : next.groups)
    for (auto m : g.members) after.insert(to_index(m));
  EXPECT_EQ(before, after);
  EXPECT_EQ(epoch_reconfigure(s, 2).groups[0].members, next.groups[0].members);
}

TEST(EpochReconfigure, PendingJoinsMergeEvenly) {
  std::vector<NodeId> ids;
  for (std::uint32_t i = 0; i < 2000; ++i) ids.push_back(NodeId{i});
  EpochState s;
  s.groups = selection::partition_candidates(ids, 29, 1);
  for (std::uint32_t j = 0; j < 10; ++j) s.pending_joins.push_back(NodeId{5000 + j});
  auto next = epoch_reconfigure(s, 3);
  std::size_t total = 0, lo = SIZE_MAX, hi = 0;
  for (const auto& g : next.groups) {
    total += g.members.size();
    lo = std::min(lo, g.members.size());
    hi = std::max(hi, g.members.size());
  }
  EXPECT_EQ(next.groups.size(), 29u);
  EXPECT_EQ(total, 2010u);
  EXPECT_LE(hi - lo, 1u);
}

// ---- properties ------------------------------------------------------------------

// Every placement of at most floor((n-1)/3) faulty endorsers, each either
// silent or returning a random point, still lets the candidate finalize.
TEST(Liveness, HonestCandidateFinalizesUnderBoundedFaults) {
  World w(13, 21);
  Rng rng(8);
  for (std::size_t n = 1; n <= 12; ++n) {
    auto set = w.set_of(range(1, n));
    auto req = w.request(0);
    auto m = endorsement_message(req.candidate_pk, req.token_address);
    std::vector<crypto::Signature> honest;
    for (std::size_t i = 0; i < n; ++i) honest.push_back(endorse(w.keys[i + 1], req, set));
    const std::size_t max_faulty = (n - 1) / 3;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) > max_faulty) continue;
      CollectionState c(set, m);
      std::size_t nth_faulty = 0;
      for (std::size_t i = 0; i < n && !c.finalizable(); ++i) {
        if (!(mask >> i & 1)) {
          c.collect(honest[i], i);
        } else if (nth_faulty++ % 2 == 1) {
          EXPECT_THROW(c.collect({crypto::G1Point::random(rng), i}, i), Error);
        }
      }
      auto agg = c.try_finalize();
      ASSERT_TRUE(agg.has_value()) << "n=" << n << " mask=" << mask;
      EXPECT_EQ(agg->vector.popcount(), selection::quorum_threshold(n));
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) EXPECT_FALSE(agg->vector.test(i));
      if (mask % 8 == 0) EXPECT_TRUE(crypto::verify_endorsement(*agg, set));
    }
  }
}

TEST(Liveness, OneThirdSilentBlocksQuorum) {
  for (std::size_t n : {3u, 6u, 9u, 12u}) {
    std::size_t honest = n - n / 3;
    EXPECT_LT(honest, selection::quorum_threshold(n)) << n;
  }
  World w(4);
  auto set = w.set_of({1, 2, 3});
  auto req = w.request(0);
  CollectionState c(set, endorsement_message(req.candidate_pk, req.token_address));
  c.collect(endorse(w.keys[1], req, set), 0);
  c.collect(endorse(w.keys[2], req, set), 1);
  EXPECT_FALSE(c.try_finalize().has_value());
}

// All action sequences of length 4 over two identities and two epochs: each
// (identity, epoch) is accepted exactly once, on its first attempt, both at
// the candidate and at an endorser.
TEST(RateLimit, ExhaustiveSequences) {
  World w(3);
  const std::pair<std::size_t, std::uint64_t> actions[] = {{0, 1}, {0, 2}, {1, 1}, {1, 2}};
  for (int seq = 0; seq < 256; ++seq) {
    RequestLog log;
    EndorserState endorser{&w.keys[2], {}};
    std::map<std::pair<std::size_t, std::uint64_t>, int> accepted, endorsed;
    std::set<std::pair<std::size_t, std::uint64_t>> seen;
    for (int step = 0, code = seq; step < 4; ++step, code /= 4) {
      auto [id, epoch] = actions[code % 4];
      bool first = seen.insert({id, epoch}).second;
      try {
        auto req = build_request({&w.keys[id], World::token(id), kGood}, epoch, w.registry, w.policy, log);
        EXPECT_TRUE(first);
        ++accepted[{id, epoch}];
      } catch (const Error& e) {
        EXPECT_FALSE(first);
        EXPECT_EQ(e.code(), ErrorCode::AlreadyRequestedThisEpoch);
      }
      auto verdict = evaluate_request(endorser, w.request(id, epoch), w.registry, w.policy);
      EXPECT_EQ(verdict.approved(), first);
      endorsed[{id, epoch}] += verdict.approved();
    }
    for (auto& [k, count] : accepted) EXPECT_EQ(count, 1);
    for (auto& [k, count] : endorsed) EXPECT_EQ(count, 1);
  }
}

// Every order of {join A with X, exit A, join B with X, rejoin A with Y}:
// no deposit ever backs two active records and a revoked key never returns.
TEST(LedgerStateMachine, ExhaustiveOrders) {
  World w(10, 6);
  std::vector<NodeId> ids;
  for (std::uint32_t i = 0; i < 10; ++i) ids.push_back(NodeId{i});
  auto groups = selection::partition_candidates(ids, 4, 2);
  const auto join_a = w.record(0, {1, 2, 3, 4});
  const auto join_b = w.record(5, {1, 2, 3, 4}, World::token(0));
  const auto rejoin_a = w.record(0, {1, 2, 3, 4}, World::token(6));
  auto dir = [&](NodeId id) { return EndorserHandle{&w.keys[to_index(id)], true}; };

  std::vector<int> order{0, 1, 2, 3};
  do {
    TokenRegistry registry;
    for (std::size_t i = 0; i < w.keys.size(); ++i) registry.add(World::token(i), 1000, w.keys[i].public_key());
    GlobalLedger ledger(&registry);
    bool a_revoked = false;
    for (int action : order) {
      try {
        switch (action) {
          case 0: ledger.append(join_a); break;
          case 1: a_revoked |= process_exit(ledger, join_a.candidate_pk, NodeId{0}, groups, 1, dir).revoked; break;
          case 2: ledger.append(join_b); break;
          case 3: ledger.append(rejoin_a); break;
        }
      } catch (const Error& e) {
        EXPECT_TRUE(e.code() == ErrorCode::DepositReused || e.code() == ErrorCode::DuplicateActive ||
                    e.code() == ErrorCode::NotActive)
            << e.what();
      }
      std::map<TokenAddress, int> active;
      for (const auto& r : ledger.records())
        if (r.status == RecordStatus::Active) ++active[r.token_address];
      for (auto& [tok, count] : active) EXPECT_LE(count, 1) << tok;
      if (a_revoked) {
        auto pos = ledger.find(join_a.candidate_pk);
        ASSERT_TRUE(pos.has_value());
        EXPECT_EQ(ledger.records()[*pos].status, RecordStatus::Revoked);
      }
    }
  } while (std::next_permutation(order.begin(), order.end()));
}

}  // namespace
}  // namespace endorse::protocol
