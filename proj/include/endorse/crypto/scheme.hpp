#pragma once

// Coefficient-weighted aggregate multi-signature over the endorsement group.
//
// Each signer i of a public-key set PK signs with an exponent p_i * sk_i,
// where p_i = H1(pk_i, PK). Aggregation multiplies the collected signatures;
// anyone holding the endorser vector and PK recomputes the weighted
// aggregate key a = prod pk_j^{p_j} and checks e(sigma, g2) = e(H0(m), a).
// The per-key coefficients bind every key to the whole set, which is what
// defeats rogue-key constructions without proofs of possession.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "endorse/crypto/pairing.hpp"

namespace endorse::crypto {

inline constexpr std::string_view kSignatureTag = "ENDORSE-SIG-V1";
inline constexpr std::string_view kCoefficientTag = "ENDORSE-COEF-V1";

class KeyPair {
 public:
  /// Uniform non-zero secret; resamples on zero.
  static KeyPair generate(Rng& rng);
  /// Throws Error(MalformedInput) for a zero secret.
  static KeyPair from_secret(const Scalar& secret);

  const Scalar& secret() const { return secret_; }
  const G2Point& public_key() const { return public_; }

 private:
  KeyPair(Scalar s, G2Point p) : secret_(s), public_(p) {}
  Scalar secret_;
  G2Point public_;
};

/// Ordered endorser keys. The order is fixed when the group is formed and the
/// digest is SHA-256 over the concatenated compressed keys in that order.
class PublicKeySet {
 public:
  /// Throws Error(DuplicateKey) if a key repeats.
  explicit PublicKeySet(std::vector<G2Point> keys);

  std::size_t size() const { return keys_.size(); }
  const std::vector<G2Point>& keys() const { return keys_; }
  const G2Point& operator[](std::size_t i) const { return keys_[i]; }
  const G2Bytes& compressed(std::size_t i) const { return compressed_[i]; }
  const Digest& digest() const { return digest_; }
  std::optional<std::size_t> index_of(const G2Point& pk) const;

  /// u32 count followed by the compressed keys.
  Bytes encode() const;
  static PublicKeySet decode(ByteView bytes);

  friend bool operator==(const PublicKeySet& a, const PublicKeySet& b) { return a.digest_ == b.digest_; }

 private:
  std::vector<G2Point> keys_;
  std::vector<G2Bytes> compressed_;
  Digest digest_{};
};

/// c_i: one bit per position of a PublicKeySet.
class EndorserVector {
 public:
  EndorserVector() = default;
  EndorserVector(std::size_t size, const Digest& set_digest);
  static EndorserVector for_set(const PublicKeySet& set) { return {set.size(), set.digest()}; }

  std::size_t size() const { return size_; }
  const Digest& set_digest() const { return set_digest_; }
  bool test(std::size_t i) const;
  void set(std::size_t i, bool value = true);
  std::size_t popcount() const;
  std::vector<std::size_t> indices() const;

  /// u32 size, then ceil(size/8) bytes with bit i at byte i/8, mask 1<<(i%8).
  Bytes encode_bits() const;
  /// encode_bits() followed by the 32-byte set digest.
  Bytes encode() const;
  static EndorserVector decode(ByteReader& reader);

  friend bool operator==(const EndorserVector&, const EndorserVector&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint8_t> bits_;
  Digest set_digest_{};
};

struct Signature {
  G1Point point;
  std::size_t signer_index = 0;

  Bytes encode() const;  // 48-byte point || u32 index
  static Signature decode(ByteView bytes);
};

struct AggregatePublicKey {
  G2Point point;
};

struct AggregateEndorsement {
  G1Point sigma;
  EndorserVector vector;
  Bytes message;

  /// sigma || vector bits || set digest || length-prefixed message.
  Bytes encode() const;
  static AggregateEndorsement decode(ByteView bytes);
  static AggregateEndorsement decode(ByteReader& reader);
};

/// H0: {0,1}* -> G1.
G1Point hash_to_group(ByteView message);

/// H1(pk, PK) in Z_q, never zero. Throws Error(NotAMember).
Scalar coefficient(const G2Point& pk, const PublicKeySet& set);
/// Same, by position; avoids the membership search.
Scalar coefficient_at(const PublicKeySet& set, std::size_t index);

/// s_i = H0(m)^(p_i * sk_i). Throws Error(IndexKeyMismatch).
Signature sign(const KeyPair& key, ByteView message, const PublicKeySet& set, std::size_t signer_index);

/// Single-signer check e(s_i, g2) = e(H0(m), pk_i^{p_i}).
bool verify_signature(const Signature& sig, ByteView message, const PublicKeySet& set);

/// sigma = prod_{j in y} s_j. Throws Error(VectorSignatureMismatch).
AggregateEndorsement aggregate_signatures(const EndorserVector& vector, std::span<const Signature> sigs,
                                          ByteView message);

/// a = prod_{j in y} pk_j^{H1(pk_j, PK)}. Throws Error(DigestMismatch).
AggregatePublicKey aggregate_public_keys(const EndorserVector& vector, const PublicKeySet& set);

/// e(sigma, g2) == e(H0(m), a). Identity or out-of-group inputs are rejected.
bool verify(const AggregateEndorsement& agg, const AggregatePublicKey& apk);

/// Third-party check from the announced (sigma, c_i, m) and PK. False on a
/// digest mismatch instead of throwing.
bool verify_endorsement(const AggregateEndorsement& agg, const PublicKeySet& set);

}  // namespace endorse::crypto
