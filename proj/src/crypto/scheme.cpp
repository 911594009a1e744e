#include "endorse/crypto/scheme.hpp"

#include <blst_aux.h>

#include <algorithm>
#include <bit>
#include <set>

#include "endorse/common/error.hpp"

namespace endorse::crypto {

// ---- keys ------------------------------------------------------------------

KeyPair KeyPair::generate(Rng& rng) {
  Scalar s;
  do {
    s = Scalar::random(rng);
  } while (s.is_zero());
  return from_secret(s);
}

KeyPair KeyPair::from_secret(const Scalar& secret) {
  if (secret.is_zero()) throw Error(ErrorCode::MalformedInput, "secret key must be non-zero");
  return KeyPair(secret, G2Point::generator() * secret);
}

// ---- PublicKeySet ----------------------------------------------------------

PublicKeySet::PublicKeySet(std::vector<G2Point> keys) : keys_(std::move(keys)) {
  compressed_.reserve(keys_.size());
  std::set<G2Bytes> seen;
  Bytes concat;
  concat.reserve(keys_.size() * kG2Bytes);
  for (const auto& k : keys_) {
    auto c = k.compress();
    if (!seen.insert(c).second) throw Error(ErrorCode::DuplicateKey, "public key repeated in set");
    concat.insert(concat.end(), c.begin(), c.end());
    compressed_.push_back(c);
  }
  ++op_counts().hashes;
  digest_ = sha256(concat);
}

std::optional<std::size_t> PublicKeySet::index_of(const G2Point& pk) const {
  auto c = pk.compress();
  auto it = std::find(compressed_.begin(), compressed_.end(), c);
  if (it == compressed_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - compressed_.begin());
}

Bytes PublicKeySet::encode() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(keys_.size()));
  for (const auto& c : compressed_) w.raw(c);
  return std::move(w).take();
}

PublicKeySet PublicKeySet::decode(ByteView bytes) {
  ByteReader r(bytes);
  std::uint32_t n = r.u32();
  if (r.remaining() != static_cast<std::size_t>(n) * kG2Bytes)
    throw Error(ErrorCode::MalformedEncoding, "public key set length mismatch");
  std::vector<G2Point> keys;
  keys.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto p = G2Point::decompress(r.raw(kG2Bytes));
    if (!p) throw Error(ErrorCode::MalformedEncoding, "invalid G2 point in key set");
    keys.push_back(*p);
  }
  return PublicKeySet(std::move(keys));
}

// ---- EndorserVector --------------------------------------------------------

EndorserVector::EndorserVector(std::size_t size, const Digest& set_digest)
    : size_(size), bits_((size + 7) / 8, 0), set_digest_(set_digest) {}

bool EndorserVector::test(std::size_t i) const {
  return i < size_ && ((bits_[i / 8] >> (i % 8)) & 1);
}

void EndorserVector::set(std::size_t i, bool value) {
  if (i >= size_) throw Error(ErrorCode::VectorSignatureMismatch, "bit index out of range");
  auto mask = static_cast<std::uint8_t>(1u << (i % 8));
  if (value)
    bits_[i / 8] |= mask;
  else
    bits_[i / 8] &= static_cast<std::uint8_t>(~mask);
}

std::size_t EndorserVector::popcount() const {
  std::size_t n = 0;
  for (auto b : bits_) n += static_cast<std::size_t>(std::popcount(b));
  return n;
}

std::vector<std::size_t> EndorserVector::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size_; ++i)
    if (test(i)) out.push_back(i);
  return out;
}

Bytes EndorserVector::encode_bits() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(size_));
  w.raw(bits_);
  return std::move(w).take();
}

Bytes EndorserVector::encode() const {
  Bytes out = encode_bits();
  out.insert(out.end(), set_digest_.begin(), set_digest_.end());
  return out;
}

EndorserVector EndorserVector::decode(ByteReader& reader) {
  std::uint32_t n = reader.u32();
  auto bits = reader.raw((static_cast<std::size_t>(n) + 7) / 8);
  if (n % 8 != 0 && !bits.empty() && (bits.back() >> (n % 8)) != 0)
    throw Error(ErrorCode::MalformedEncoding, "non-zero padding bits in endorser vector");
  auto digest = reader.raw(kDigestBytes);
  Digest d;
  std::copy(digest.begin(), digest.end(), d.begin());
  EndorserVector v(n, d);
  std::copy(bits.begin(), bits.end(), v.bits_.begin());
  return v;
}

// ---- Signature / AggregateEndorsement encodings ----------------------------

Bytes Signature::encode() const {
  ByteWriter w;
  w.raw(point.compress());
  w.u32(static_cast<std::uint32_t>(signer_index));
  return std::move(w).take();
}

Signature Signature::decode(ByteView bytes) {
  ByteReader r(bytes);
  auto p = G1Point::decompress(r.raw(kG1Bytes));
  if (!p) throw Error(ErrorCode::MalformedEncoding, "invalid G1 point in signature");
  Signature s{*p, r.u32()};
  r.expect_done();
  return s;
}

Bytes AggregateEndorsement::encode() const {
  ByteWriter w;
  w.raw(sigma.compress());
  w.raw(vector.encode());
  w.field(message);
  return std::move(w).take();
}

AggregateEndorsement AggregateEndorsement::decode(ByteReader& r) {
  auto p = G1Point::decompress(r.raw(kG1Bytes));
  if (!p) throw Error(ErrorCode::MalformedEncoding, "invalid G1 point in aggregate");
  AggregateEndorsement agg;
  agg.sigma = *p;
  agg.vector = EndorserVector::decode(r);
  auto m = r.field();
  agg.message.assign(m.begin(), m.end());
  return agg;
}

AggregateEndorsement AggregateEndorsement::decode(ByteView bytes) {
  ByteReader r(bytes);
  auto agg = decode(r);
  r.expect_done();
  return agg;
}

// ---- scheme ----------------------------------------------------------------

G1Point hash_to_group(ByteView message) { return G1Point::hash_to_group(message, kSignatureTag); }

Scalar coefficient_at(const PublicKeySet& set, std::size_t index) {
  const auto& pk = set.compressed(index);
  const auto& digest = set.digest();
  Bytes input;
  input.reserve(kG2Bytes + kDigestBytes + 4);
  input.insert(input.end(), pk.begin(), pk.end());
  input.insert(input.end(), digest.begin(), digest.end());
  input.resize(input.size() + 4);
  // 48 bytes per attempt keeps the reduction mod q close to uniform.
  std::array<std::uint8_t, 48> wide;
  for (std::uint32_t counter = 0;; ++counter) {
    for (int b = 0; b < 4; ++b) input[input.size() - 4 + b] = static_cast<std::uint8_t>(counter >> (24 - 8 * b));
    ++op_counts().hashes;
    blst_expand_message_xmd(wide.data(), wide.size(), input.data(), input.size(),
                            reinterpret_cast<const byte*>(kCoefficientTag.data()), kCoefficientTag.size());
    Scalar p = Scalar::reduce(wide);
    if (!p.is_zero()) return p;
  }
}

Scalar coefficient(const G2Point& pk, const PublicKeySet& set) {
  auto idx = set.index_of(pk);
  if (!idx) throw Error(ErrorCode::NotAMember, "public key is not in the set");
  return coefficient_at(set, *idx);
}

Signature sign(const KeyPair& key, ByteView message, const PublicKeySet& set, std::size_t signer_index) {
  if (signer_index >= set.size() || !(set[signer_index] == key.public_key()))
    throw Error(ErrorCode::IndexKeyMismatch, "key at signer index does not match the signing key");
  Scalar exponent = coefficient_at(set, signer_index) * key.secret();
  return {hash_to_group(message) * exponent, signer_index};
}

bool verify_signature(const Signature& sig, ByteView message, const PublicKeySet& set) {
  if (sig.signer_index >= set.size()) return false;
  if (sig.point.is_identity() || !sig.point.in_group()) return false;
  G2Point weighted = set[sig.signer_index] * coefficient_at(set, sig.signer_index);
  return pairing_equal(sig.point, G2Point::generator(), hash_to_group(message), weighted);
}

AggregateEndorsement aggregate_signatures(const EndorserVector& vector, std::span<const Signature> sigs,
                                          ByteView message) {
  if (vector.popcount() != sigs.size())
    throw Error(ErrorCode::VectorSignatureMismatch, "signature count differs from set bits");
  std::set<std::size_t> used;
  G1Point sigma;
  for (const auto& s : sigs) {
    if (!vector.test(s.signer_index) || !used.insert(s.signer_index).second)
      throw Error(ErrorCode::VectorSignatureMismatch, "signature index not selected by vector");
    sigma += s.point;
  }
  return {sigma, vector, Bytes(message.begin(), message.end())};
}

AggregatePublicKey aggregate_public_keys(const EndorserVector& vector, const PublicKeySet& set) {
  if (vector.set_digest() != set.digest() || vector.size() != set.size())
    throw Error(ErrorCode::DigestMismatch, "endorser vector indexes a different key set");
  G2Point a;
  for (std::size_t j : vector.indices()) a += set[j] * coefficient_at(set, j);
  return {a};
}

bool verify(const AggregateEndorsement& agg, const AggregatePublicKey& apk) {
  if (agg.sigma.is_identity() || !agg.sigma.in_group()) return false;
  if (apk.point.is_identity() || !apk.point.in_group()) return false;
  return pairing_equal(agg.sigma, G2Point::generator(), hash_to_group(agg.message), apk.point);
}

bool verify_endorsement(const AggregateEndorsement& agg, const PublicKeySet& set) {
  if (agg.vector.set_digest() != set.digest() || agg.vector.size() != set.size()) return false;
  return verify(agg, aggregate_public_keys(agg.vector, set));
}

}  // namespace endorse::crypto
