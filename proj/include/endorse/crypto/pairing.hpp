#pragma once

// Value types over the BLS12-381 pairing groups. Signatures live in G1
// (48-byte compressed), public keys in G2 (96-byte compressed).

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <blst.h>

#include "endorse/common/bytes.hpp"
#include "endorse/common/rng.hpp"

namespace endorse::crypto {

inline constexpr std::size_t kScalarBytes = 32;
inline constexpr std::size_t kG1Bytes = 48;
inline constexpr std::size_t kG2Bytes = 96;
inline constexpr std::size_t kDigestBytes = 32;

using Digest = std::array<std::uint8_t, kDigestBytes>;
using G1Bytes = std::array<std::uint8_t, kG1Bytes>;
using G2Bytes = std::array<std::uint8_t, kG2Bytes>;
using ScalarBytes = std::array<std::uint8_t, kScalarBytes>;

/// Counters for the expensive primitives, per thread. The simulator's
/// declared cost model is checked against these.
struct OpCounts {
  std::uint64_t hashes = 0;
  std::uint64_t exponentiations = 0;
  std::uint64_t pairings = 0;

  friend bool operator==(const OpCounts&, const OpCounts&) = default;
  OpCounts operator-(const OpCounts& o) const {
    return {hashes - o.hashes, exponentiations - o.exponentiations, pairings - o.pairings};
  }
};

OpCounts& op_counts() noexcept;

Digest sha256(ByteView data);

/// Element of Z_q, q the prime order shared by G1, G2 and Gt.
class Scalar {
 public:
  Scalar() = default;

  static Scalar from_u64(std::uint64_t v);
  /// Big-endian bytes of any length, reduced mod q.
  static Scalar reduce(ByteView big_endian);
  /// Rejects encodings >= q.
  static std::optional<Scalar> from_canonical(ByteView big_endian);
  /// Uniform over Z_q (zero included).
  static Scalar random(Rng& rng);

  ScalarBytes to_bytes() const;  // big-endian
  bool is_zero() const;
  Scalar inverse() const;  // of a non-zero scalar

  Scalar operator*(const Scalar& o) const;
  Scalar operator+(const Scalar& o) const;
  Scalar operator-() const;
  friend bool operator==(const Scalar& a, const Scalar& b);

  const blst_scalar& raw() const { return v_; }

 private:
  blst_scalar v_{};  // little-endian canonical bytes
};

class G1Point {
 public:
  G1Point() = default;  // identity

  static G1Point generator();
  /// H0: RFC 9380 hash-to-curve (SSWU, SHA-256) under the given tag.
  static G1Point hash_to_group(ByteView message, std::string_view domain_tag);
  /// Uniformly random point in G1 (random multiple of the generator).
  static G1Point random(Rng& rng);
  /// Rejects non-canonical encodings, points off the curve and points
  /// outside the prime-order subgroup.
  static std::optional<G1Point> decompress(ByteView bytes);

  G1Bytes compress() const;
  bool is_identity() const;
  bool in_group() const;

  G1Point operator+(const G1Point& o) const;
  G1Point& operator+=(const G1Point& o);
  G1Point operator*(const Scalar& k) const;
  G1Point operator-() const;
  friend bool operator==(const G1Point& a, const G1Point& b);

  const blst_p1& raw() const { return p_; }

 private:
  blst_p1 p_{};
};

class G2Point {
 public:
  G2Point() = default;  // identity

  static G2Point generator();
  static std::optional<G2Point> decompress(ByteView bytes);

  G2Bytes compress() const;
  bool is_identity() const;
  bool in_group() const;

  G2Point operator+(const G2Point& o) const;
  G2Point& operator+=(const G2Point& o);
  G2Point operator*(const Scalar& k) const;
  G2Point operator-() const;
  friend bool operator==(const G2Point& a, const G2Point& b);

  const blst_p2& raw() const { return p_; }

 private:
  blst_p2 p_{};
};

/// Element of the target group (after final exponentiation).
class GtElement {
 public:
  GtElement();  // one

  GtElement operator*(const GtElement& o) const;
  GtElement pow(const Scalar& k) const;
  bool is_one() const;
  friend bool operator==(const GtElement& a, const GtElement& b);

 private:
  friend GtElement pairing(const G1Point&, const G2Point&);
  blst_fp12 v_;
};

/// e: G1 x G2 -> Gt.
GtElement pairing(const G1Point& p, const G2Point& q);

/// Checks e(a1, b1) == e(a2, b2) with two Miller loops and one final
/// exponentiation. Counts as two pairings.
bool pairing_equal(const G1Point& a1, const G2Point& b1, const G1Point& a2, const G2Point& b2);

struct GroupDescriptor {
  std::string name;
  std::string description;
};

/// Public parameters of the instantiated pairing.
struct PairingParams {
  GroupDescriptor group_1;
  GroupDescriptor group_2;
  GroupDescriptor group_t;
  G1Point generator_1;  // not used by the scheme; kept for completeness
  G2Point generator_2;
  ScalarBytes order;  // q, big-endian

  static const PairingParams& bls12_381();
};

}  // namespace endorse::crypto
