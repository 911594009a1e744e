#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "endorse/common/error.hpp"
#include "endorse/crypto/rogue_key.hpp"
#include "endorse/crypto/scheme.hpp"
#include "support/plain_bls.hpp"

namespace endorse::crypto {
namespace {

Bytes msg(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::vector<KeyPair> make_keys(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<KeyPair> keys;
  for (std::size_t i = 0; i < n; ++i) keys.push_back(KeyPair::generate(rng));
  return keys;
}

PublicKeySet set_of(const std::vector<KeyPair>& keys) {
  std::vector<G2Point> pks;
  for (const auto& k : keys) pks.push_back(k.public_key());
  return PublicKeySet(std::move(pks));
}

AggregateEndorsement honest_aggregate(const std::vector<KeyPair>& keys, const PublicKeySet& set,
                                      const std::vector<std::size_t>& signers, ByteView m) {
  auto vec = EndorserVector::for_set(set);
  std::vector<Signature> sigs;
  for (auto i : signers) {
    vec.set(i);
    sigs.push_back(sign(keys[i], m, set, i));
  }
  return aggregate_signatures(vec, sigs, m);
}

// ---- pairing params --------------------------------------------------------

TEST(PairingParams, GeneratorsAreInTheirGroups) {
  const auto& params = PairingParams::bls12_381();
  EXPECT_TRUE(params.generator_1.in_group());
  EXPECT_TRUE(params.generator_2.in_group());
  EXPECT_FALSE(params.generator_1.is_identity());
  EXPECT_EQ(to_hex(params.order), "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001");
}

TEST(PairingParams, PairingIsBilinearAndNonDegenerate) {
  const auto& params = PairingParams::bls12_381();
  GtElement base = pairing(params.generator_1, params.generator_2);
  EXPECT_FALSE(base.is_one());
  Rng rng(7);
  for (int trial = 0; trial < 4; ++trial) {
    Scalar a = Scalar::random(rng), b = Scalar::random(rng);
    EXPECT_EQ(pairing(params.generator_1 * a, params.generator_2 * b), base.pow(a * b));
  }
}

TEST(PairingParams, OrderAnnihilatesGenerators) {
  // q * g == identity, checked as (q-1)*g + g.
  Scalar minus_one = -Scalar::from_u64(1);
  auto g1 = G1Point::generator();
  auto g2 = G2Point::generator();
  EXPECT_TRUE((g1 * minus_one + g1).is_identity());
  EXPECT_TRUE((g2 * minus_one + g2).is_identity());
}

TEST(Scalar, FieldArithmetic) {
  Rng rng(11);
  Scalar a = Scalar::random(rng);
  EXPECT_EQ(a * a.inverse(), Scalar::from_u64(1));
  EXPECT_TRUE((a + (-a)).is_zero());
  EXPECT_EQ(Scalar::from_u64(6) * Scalar::from_u64(7), Scalar::from_u64(42));
  auto q = PairingParams::bls12_381().order;
  EXPECT_FALSE(Scalar::from_canonical(q).has_value());
  EXPECT_TRUE(Scalar::reduce(q).is_zero());
  auto bytes = a.to_bytes();
  EXPECT_EQ(*Scalar::from_canonical(bytes), a);
}

// ---- key generation --------------------------------------------------------

TEST(KeyGenerate, UnitSecretGivesGenerator) {
  auto kp = KeyPair::from_secret(Scalar::from_u64(1));
  EXPECT_EQ(kp.public_key(), G2Point::generator());
}

TEST(KeyGenerate, SameSeedSameKeys) {
  Rng a(99), b(99);
  auto ka = KeyPair::generate(a);
  auto kb = KeyPair::generate(b);
  EXPECT_EQ(ka.secret(), kb.secret());
  EXPECT_EQ(ka.public_key(), kb.public_key());
}

TEST(KeyGenerate, DoublingMatchesExponentOracle) {
  Rng rng(3);
  auto kp = KeyPair::generate(rng);
  // pk^2 by group addition against g2^(2s) by scalar multiplication.
  EXPECT_EQ(kp.public_key() + kp.public_key(), G2Point::generator() * (kp.secret() + kp.secret()));
}

TEST(KeyGenerate, ZeroSecretRejected) {
  EXPECT_THROW(KeyPair::from_secret(Scalar{}), Error);
}

// ---- H0 / H1 ---------------------------------------------------------------

TEST(HashToGroup, DeterministicAndInGroup) {
  auto a = hash_to_group(msg("endorse me"));
  EXPECT_EQ(a, hash_to_group(msg("endorse me")));
  EXPECT_TRUE(a.in_group());
  EXPECT_FALSE(a.is_identity());
}

TEST(HashToGroup, OneBitFlipGivesDistinctPoint) {
  Bytes m = msg("token-0001");
  auto base = hash_to_group(m);
  for (std::size_t bit = 0; bit < m.size() * 8; bit += 7) {
    Bytes flipped = m;
    flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_FALSE(hash_to_group(flipped) == base) << "bit " << bit;
  }
}

TEST(Coefficient, DeterministicAndSetBound) {
  auto keys = make_keys(4, 5);
  auto set = set_of(keys);
  auto p1 = coefficient(keys[1].public_key(), set);
  EXPECT_EQ(p1, coefficient(keys[1].public_key(), set));
  EXPECT_FALSE(p1.is_zero());

  auto other_keys = make_keys(3, 6);
  std::vector<G2Point> other{keys[1].public_key(), other_keys[0].public_key(), other_keys[1].public_key()};
  PublicKeySet other_set(other);
  EXPECT_FALSE(coefficient(keys[1].public_key(), other_set) == p1);
}

TEST(Coefficient, NonMemberRejected) {
  auto keys = make_keys(3, 8);
  auto set = set_of(keys);
  auto outsider = make_keys(1, 9)[0];
  try {
    coefficient(outsider.public_key(), set);
    FAIL() << "expected NotAMember";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAMember);
  }
}

TEST(PublicKeySet, DigestDependsOnOrderAndRejectsDuplicates) {
  auto keys = make_keys(3, 10);
  auto set = set_of(keys);
  EXPECT_EQ(set.digest(), set_of(keys).digest());
  std::vector<KeyPair> swapped{keys[1], keys[0], keys[2]};
  EXPECT_NE(set.digest(), set_of(swapped).digest());
  std::vector<G2Point> dup{keys[0].public_key(), keys[0].public_key()};
  EXPECT_THROW(PublicKeySet{dup}, Error);
  EXPECT_EQ(PublicKeySet::decode(set.encode()).digest(), set.digest());
}

// ---- sign / verify ---------------------------------------------------------

TEST(Sign, SingleSignerBaseCase) {
  auto keys = make_keys(1, 12);
  auto set = set_of(keys);
  auto m = msg("hello");
  auto agg = honest_aggregate(keys, set, {0}, m);
  EXPECT_TRUE(verify(agg, aggregate_public_keys(agg.vector, set)));
}

TEST(Sign, MismatchedIndexRejected) {
  auto keys = make_keys(3, 13);
  auto set = set_of(keys);
  try {
    sign(keys[0], msg("m"), set, 1);
    FAIL() << "expected IndexKeyMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexKeyMismatch);
  }
  EXPECT_THROW(sign(keys[0], msg("m"), set, 7), Error);
}

TEST(Sign, PerTermPairingChain) {
  auto keys = make_keys(5, 14);
  auto set = set_of(keys);
  auto m = msg("pairing chain");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto s = sign(keys[i], m, set, i);
    auto weighted = keys[i].public_key() * coefficient(keys[i].public_key(), set);
    EXPECT_EQ(pairing(s.point, G2Point::generator()), pairing(hash_to_group(m), weighted));
    EXPECT_TRUE(verify_signature(s, m, set));
  }
}

TEST(VerifySignature, RejectsForeignPointAndWrongIndex) {
  auto keys = make_keys(3, 15);
  auto set = set_of(keys);
  auto m = msg("x");
  auto s = sign(keys[0], m, set, 0);
  Rng rng(1);
  EXPECT_FALSE(verify_signature({G1Point::random(rng), 0}, m, set));
  EXPECT_FALSE(verify_signature({s.point, 1}, m, set));
  EXPECT_FALSE(verify_signature({G1Point{}, 0}, m, set));
  EXPECT_FALSE(verify_signature({s.point, 9}, m, set));
}

// ---- aggregation -----------------------------------------------------------

TEST(AggregateSignatures, SingleElementProduct) {
  auto keys = make_keys(4, 16);
  auto set = set_of(keys);
  auto m = msg("m");
  auto s = sign(keys[2], m, set, 2);
  auto vec = EndorserVector::for_set(set);
  vec.set(2);
  std::vector<Signature> sigs{s};
  EXPECT_EQ(aggregate_signatures(vec, sigs, m).sigma, s.point);
}

TEST(AggregateSignatures, OrderIndependentAndAssociative) {
  auto keys = make_keys(6, 17);
  auto set = set_of(keys);
  auto m = msg("order");
  auto vec = EndorserVector::for_set(set);
  std::vector<Signature> sigs;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    vec.set(i);
    sigs.push_back(sign(keys[i], m, set, i));
  }
  auto reference = aggregate_signatures(vec, sigs, m).sigma;
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(std::span(sigs));
    EXPECT_EQ(aggregate_signatures(vec, sigs, m).sigma, reference);
  }
  // (s0 s1 s2)(s3 s4 s5) grouping
  G1Point left, right;
  for (const auto& s : sigs) (s.signer_index < 3 ? left : right) += s.point;
  EXPECT_EQ(left + right, reference);
}

TEST(AggregateSignatures, ThreeHonestVerifyAndTamperingFails) {
  auto keys = make_keys(3, 18);
  auto set = set_of(keys);
  auto m = msg("three");
  auto vec = EndorserVector::for_set(set);
  std::vector<Signature> sigs;
  for (std::size_t i = 0; i < 3; ++i) {
    vec.set(i);
    sigs.push_back(sign(keys[i], m, set, i));
  }
  auto apk = aggregate_public_keys(vec, set);
  EXPECT_TRUE(verify(aggregate_signatures(vec, sigs, m), apk));
  Rng rng(4);
  for (std::size_t replace = 0; replace < 3; ++replace) {
    auto tampered = sigs;
    tampered[replace].point = G1Point::random(rng);
    EXPECT_FALSE(verify(aggregate_signatures(vec, tampered, m), apk));
  }
}

TEST(AggregateSignatures, CountOrIndexMismatchRejected) {
  auto keys = make_keys(3, 19);
  auto set = set_of(keys);
  auto m = msg("m");
  auto vec = EndorserVector::for_set(set);
  vec.set(0);
  vec.set(1);
  std::vector<Signature> one{sign(keys[0], m, set, 0)};
  EXPECT_THROW(aggregate_signatures(vec, one, m), Error);
  std::vector<Signature> wrong{sign(keys[0], m, set, 0), sign(keys[2], m, set, 2)};
  EXPECT_THROW(aggregate_signatures(vec, wrong, m), Error);
  std::vector<Signature> twice{sign(keys[0], m, set, 0), sign(keys[0], m, set, 0)};
  EXPECT_THROW(aggregate_signatures(vec, twice, m), Error);
}

TEST(AggregatePublicKeys, EmptyAndSingle) {
  auto keys = make_keys(3, 20);
  auto set = set_of(keys);
  auto vec = EndorserVector::for_set(set);
  EXPECT_TRUE(aggregate_public_keys(vec, set).point.is_identity());
  vec.set(1);
  EXPECT_EQ(aggregate_public_keys(vec, set).point,
            keys[1].public_key() * coefficient(keys[1].public_key(), set));
}

TEST(AggregatePublicKeys, DigestMismatchRejected) {
  auto set_a = set_of(make_keys(3, 21));
  auto set_b = set_of(make_keys(3, 22));
  auto vec = EndorserVector::for_set(set_a);
  vec.set(0);
  try {
    aggregate_public_keys(vec, set_b);
    FAIL() << "expected DigestMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DigestMismatch);
  }
}

TEST(AggregatePublicKeys, ThirdPartyRecomputationFromAnnouncement) {
  auto keys = make_keys(5, 23);
  auto set = set_of(keys);
  auto agg = honest_aggregate(keys, set, {0, 2, 3}, msg("announce"));
  // A verifier holding only the wire encodings reaches the same key and verdict.
  auto received = AggregateEndorsement::decode(agg.encode());
  auto received_set = PublicKeySet::decode(set.encode());
  EXPECT_EQ(aggregate_public_keys(received.vector, received_set).point,
            aggregate_public_keys(agg.vector, set).point);
  EXPECT_TRUE(verify_endorsement(received, received_set));
}

TEST(Verify, MessageBitFlipAndForeignVectorFail) {
  auto keys = make_keys(6, 24);
  auto set = set_of(keys);
  auto m = msg("verify-me");
  auto agg = honest_aggregate(keys, set, {0, 1, 4}, m);
  auto apk = aggregate_public_keys(agg.vector, set);
  EXPECT_TRUE(verify(agg, apk));

  auto flipped = agg;
  flipped.message[0] ^= 1;
  EXPECT_FALSE(verify(flipped, apk));

  auto other = EndorserVector::for_set(set);
  other.set(0);
  other.set(1);
  other.set(5);
  EXPECT_FALSE(verify(agg, aggregate_public_keys(other, set)));
}

TEST(Verify, IdentityInputsRejected) {
  auto keys = make_keys(2, 25);
  auto set = set_of(keys);
  AggregateEndorsement agg{G1Point{}, EndorserVector::for_set(set), msg("m")};
  EXPECT_FALSE(verify(agg, AggregatePublicKey{}));
  EXPECT_FALSE(verify_endorsement(agg, set));
}

TEST(SchemeProperty, RandomSubsetsVerify) {
  Rng rng(26);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 1 + rng.below(16);
    auto keys = make_keys(n, 1000 + trial);
    auto set = set_of(keys);
    std::vector<std::size_t> signers;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.below(2)) signers.push_back(i);
    if (signers.empty()) signers.push_back(rng.below(n));
    Bytes m(1 + rng.below(40));
    rng.fill(m);
    auto agg = honest_aggregate(keys, set, signers, m);
    EXPECT_TRUE(verify_endorsement(agg, set)) << "trial " << trial;
  }
}

// ---- encodings -------------------------------------------------------------

TEST(Encoding, AggregateRoundTripAndStrictDecode) {
  Rng rng(27);
  for (int trial = 0; trial < 5; ++trial) {
    std::size_t n = 1 + rng.below(20);
    auto keys = make_keys(n, 2000 + trial);
    auto set = set_of(keys);
    std::vector<std::size_t> signers{0};
    if (n > 1) signers.push_back(n - 1);
    auto agg = honest_aggregate(keys, set, signers, msg("enc"));
    auto bytes = agg.encode();
    EXPECT_EQ(AggregateEndorsement::decode(bytes).encode(), bytes);
  }
  auto keys = make_keys(3, 28);
  auto set = set_of(keys);
  auto bytes = honest_aggregate(keys, set, {1}, msg("enc")).encode();
  auto truncated = Bytes(bytes.begin(), bytes.end() - 1);
  EXPECT_THROW(AggregateEndorsement::decode(truncated), Error);
  auto padded = bytes;
  padded[48 + 4] |= 0x80;  // bit 7 of a 3-bit vector
  EXPECT_THROW(AggregateEndorsement::decode(padded), Error);
  auto bad_point = bytes;
  bad_point[5] ^= 0x55;
  EXPECT_THROW(AggregateEndorsement::decode(bad_point), Error);
}

// ---- rogue key -------------------------------------------------------------

TEST(RogueKey, PassesPlainAggregationButNotScheme) {
  auto keys = make_keys(4, 29);
  auto set = set_of(keys);
  auto vec = EndorserVector::for_set(set);
  for (std::size_t i = 0; i < 4; ++i) vec.set(i);
  Rng rng(30);
  auto forgery = rogue_key_attempt(Scalar::random(rng), set, vec, msg("forged"));
  auto agg = forgery.as_aggregate();
  EXPECT_TRUE(testing::plain_verify(agg, forgery.forged_set));
  EXPECT_FALSE(verify_endorsement(agg, forgery.forged_set));
}

TEST(RogueKey, ZeroAlphaGivesIdentitySignature) {
  auto keys = make_keys(2, 31);
  auto set = set_of(keys);
  auto vec = EndorserVector::for_set(set);
  vec.set(0);
  auto forgery = rogue_key_attempt(Scalar{}, set, vec, msg("zero"));
  EXPECT_TRUE(forgery.forged_sigma.is_identity());
  EXPECT_FALSE(testing::plain_verify(forgery.as_aggregate(), forgery.forged_set));
  EXPECT_FALSE(verify_endorsement(forgery.as_aggregate(), forgery.forged_set));
}

// ---- op accounting ---------------------------------------------------------

TEST(OpCounts, PrimitiveCostsAreStable) {
  auto keys = make_keys(5, 32);
  auto set = set_of(keys);
  auto m = msg("count");

  auto before = op_counts();
  auto s = sign(keys[3], m, set, 3);
  EXPECT_EQ(op_counts() - before, (OpCounts{2, 1, 0}));

  before = op_counts();
  EXPECT_TRUE(verify_signature(s, m, set));
  EXPECT_EQ(op_counts() - before, (OpCounts{2, 1, 2}));

  auto vec = EndorserVector::for_set(set);
  vec.set(1);
  vec.set(3);
  before = op_counts();
  auto apk = aggregate_public_keys(vec, set);
  EXPECT_EQ(op_counts() - before, (OpCounts{2, 2, 0}));

  std::vector<Signature> sigs{sign(keys[1], m, set, 1), s};
  auto agg = aggregate_signatures(vec, sigs, m);
  before = op_counts();
  EXPECT_TRUE(verify(agg, apk));
  EXPECT_EQ(op_counts() - before, (OpCounts{1, 0, 2}));
}

}  // namespace
}  // namespace endorse::crypto
