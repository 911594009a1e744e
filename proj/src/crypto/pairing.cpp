#include "endorse/crypto/pairing.hpp"

#include <blst_aux.h>

#include <algorithm>
#include <cstring>

namespace endorse::crypto {

namespace {

constexpr std::size_t kScalarBits = 255;

blst_fr to_fr(const Scalar& s) {
  blst_fr out;
  blst_fr_from_scalar(&out, &s.raw());
  return out;
}

}  // namespace

OpCounts& op_counts() noexcept {
  thread_local OpCounts counts;
  return counts;
}

Digest sha256(ByteView data) {
  Digest out;
  blst_sha256(out.data(), data.data(), data.size());
  return out;
}

// ---- Scalar ----------------------------------------------------------------

Scalar Scalar::from_u64(std::uint64_t v) {
  std::uint64_t limbs[4] = {v, 0, 0, 0};
  Scalar s;
  blst_scalar_from_uint64(&s.v_, limbs);
  return s;
}

Scalar Scalar::reduce(ByteView big_endian) {
  Scalar s;
  if (!big_endian.empty()) blst_scalar_from_be_bytes(&s.v_, big_endian.data(), big_endian.size());
  return s;
}

std::optional<Scalar> Scalar::from_canonical(ByteView big_endian) {
  if (big_endian.size() != kScalarBytes) return std::nullopt;
  Scalar s;
  blst_scalar_from_bendian(&s.v_, big_endian.data());
  if (!s.is_zero() && !blst_scalar_fr_check(&s.v_)) return std::nullopt;
  return s;
}

Scalar Scalar::random(Rng& rng) {
  // 64 uniform bytes reduced mod q: statistical distance from uniform < 2^-256.
  std::array<std::uint8_t, 64> wide;
  rng.fill(wide);
  return reduce(wide);
}

ScalarBytes Scalar::to_bytes() const {
  ScalarBytes out;
  blst_bendian_from_scalar(out.data(), &v_);
  return out;
}

bool Scalar::is_zero() const {
  return std::all_of(std::begin(v_.b), std::end(v_.b), [](std::uint8_t b) { return b == 0; });
}

Scalar Scalar::inverse() const {
  blst_fr a = to_fr(*this);
  blst_fr inv;
  blst_fr_inverse(&inv, &a);
  Scalar s;
  blst_scalar_from_fr(&s.v_, &inv);
  return s;
}

Scalar Scalar::operator*(const Scalar& o) const {
  blst_fr a = to_fr(*this), b = to_fr(o), c;
  blst_fr_mul(&c, &a, &b);
  Scalar s;
  blst_scalar_from_fr(&s.v_, &c);
  return s;
}

Scalar Scalar::operator+(const Scalar& o) const {
  blst_fr a = to_fr(*this), b = to_fr(o), c;
  blst_fr_add(&c, &a, &b);
  Scalar s;
  blst_scalar_from_fr(&s.v_, &c);
  return s;
}

Scalar Scalar::operator-() const {
  blst_fr a = to_fr(*this), c;
  blst_fr_cneg(&c, &a, true);
  Scalar s;
  blst_scalar_from_fr(&s.v_, &c);
  return s;
}

bool operator==(const Scalar& a, const Scalar& b) {
  return std::memcmp(a.v_.b, b.v_.b, sizeof(a.v_.b)) == 0;
}

// ---- G1 --------------------------------------------------------------------

G1Point G1Point::generator() {
  G1Point g;
  g.p_ = *blst_p1_generator();
  return g;
}

G1Point G1Point::hash_to_group(ByteView message, std::string_view domain_tag) {
  ++op_counts().hashes;
  G1Point h;
  blst_hash_to_g1(&h.p_, message.data(), message.size(),
                  reinterpret_cast<const byte*>(domain_tag.data()), domain_tag.size(), nullptr, 0);
  return h;
}

G1Point G1Point::random(Rng& rng) { return generator() * Scalar::random(rng); }

std::optional<G1Point> G1Point::decompress(ByteView bytes) {
  if (bytes.size() != kG1Bytes) return std::nullopt;
  blst_p1_affine aff;
  if (blst_p1_uncompress(&aff, bytes.data()) != BLST_SUCCESS) return std::nullopt;
  if (!blst_p1_affine_in_g1(&aff)) return std::nullopt;
  G1Point out;
  blst_p1_from_affine(&out.p_, &aff);
  // blst decodes the infinity encoding to an affine (0,0); normalise it.
  if (blst_p1_affine_is_inf(&aff)) out.p_ = blst_p1{};
  return out;
}

G1Bytes G1Point::compress() const {
  G1Bytes out;
  blst_p1_compress(out.data(), &p_);
  return out;
}

bool G1Point::is_identity() const { return blst_p1_is_inf(&p_); }
bool G1Point::in_group() const { return blst_p1_in_g1(&p_); }

G1Point G1Point::operator+(const G1Point& o) const {
  G1Point r;
  blst_p1_add_or_double(&r.p_, &p_, &o.p_);
  return r;
}

G1Point& G1Point::operator+=(const G1Point& o) {
  blst_p1_add_or_double(&p_, &p_, &o.p_);
  return *this;
}

G1Point G1Point::operator*(const Scalar& k) const {
  ++op_counts().exponentiations;
  G1Point r;
  if (k.is_zero() || is_identity()) return r;
  blst_p1_mult(&r.p_, &p_, k.raw().b, kScalarBits);
  return r;
}

G1Point G1Point::operator-() const {
  G1Point r = *this;
  blst_p1_cneg(&r.p_, true);
  return r;
}

bool operator==(const G1Point& a, const G1Point& b) { return blst_p1_is_equal(&a.p_, &b.p_); }

// ---- G2 --------------------------------------------------------------------

G2Point G2Point::generator() {
  G2Point g;
  g.p_ = *blst_p2_generator();
  return g;
}

std::optional<G2Point> G2Point::decompress(ByteView bytes) {
  if (bytes.size() != kG2Bytes) return std::nullopt;
  blst_p2_affine aff;
  if (blst_p2_uncompress(&aff, bytes.data()) != BLST_SUCCESS) return std::nullopt;
  if (!blst_p2_affine_in_g2(&aff)) return std::nullopt;
  G2Point out;
  blst_p2_from_affine(&out.p_, &aff);
  if (blst_p2_affine_is_inf(&aff)) out.p_ = blst_p2{};
  return out;
}

G2Bytes G2Point::compress() const {
  G2Bytes out;
  blst_p2_compress(out.data(), &p_);
  return out;
}

bool G2Point::is_identity() const { return blst_p2_is_inf(&p_); }
bool G2Point::in_group() const { return blst_p2_in_g2(&p_); }

G2Point G2Point::operator+(const G2Point& o) const {
  G2Point r;
  blst_p2_add_or_double(&r.p_, &p_, &o.p_);
  return r;
}

G2Point& G2Point::operator+=(const G2Point& o) {
  blst_p2_add_or_double(&p_, &p_, &o.p_);
  return *this;
}

G2Point G2Point::operator*(const Scalar& k) const {
  ++op_counts().exponentiations;
  G2Point r;
  if (k.is_zero() || is_identity()) return r;
  blst_p2_mult(&r.p_, &p_, k.raw().b, kScalarBits);
  return r;
}

G2Point G2Point::operator-() const {
  G2Point r = *this;
  blst_p2_cneg(&r.p_, true);
  return r;
}

bool operator==(const G2Point& a, const G2Point& b) { return blst_p2_is_equal(&a.p_, &b.p_); }

// ---- Gt --------------------------------------------------------------------

GtElement::GtElement() : v_(*blst_fp12_one()) {}

GtElement GtElement::operator*(const GtElement& o) const {
  GtElement r;
  blst_fp12_mul(&r.v_, &v_, &o.v_);
  return r;
}

GtElement GtElement::pow(const Scalar& k) const {
  GtElement acc;
  auto bytes = k.to_bytes();
  for (auto byte : bytes) {
    for (int bit = 7; bit >= 0; --bit) {
      blst_fp12_sqr(&acc.v_, &acc.v_);
      if ((byte >> bit) & 1) blst_fp12_mul(&acc.v_, &acc.v_, &v_);
    }
  }
  return acc;
}

bool GtElement::is_one() const { return blst_fp12_is_one(&v_); }

bool operator==(const GtElement& a, const GtElement& b) { return blst_fp12_is_equal(&a.v_, &b.v_); }

GtElement pairing(const G1Point& p, const G2Point& q) {
  ++op_counts().pairings;
  GtElement out;
  if (p.is_identity() || q.is_identity()) return out;
  blst_p1_affine pa;
  blst_p2_affine qa;
  blst_p1_to_affine(&pa, &p.raw());
  blst_p2_to_affine(&qa, &q.raw());
  blst_miller_loop(&out.v_, &qa, &pa);
  blst_final_exp(&out.v_, &out.v_);
  return out;
}

bool pairing_equal(const G1Point& a1, const G2Point& b1, const G1Point& a2, const G2Point& b2) {
  op_counts().pairings += 2;
  auto miller = [](const G1Point& p, const G2Point& q) {
    blst_fp12 f = *blst_fp12_one();
    if (p.is_identity() || q.is_identity()) return f;
    blst_p1_affine pa;
    blst_p2_affine qa;
    blst_p1_to_affine(&pa, &p.raw());
    blst_p2_to_affine(&qa, &q.raw());
    blst_miller_loop(&f, &qa, &pa);
    return f;
  };
  blst_fp12 lhs = miller(a1, b1);
  blst_fp12 rhs = miller(a2, b2);
  return blst_fp12_finalverify(&lhs, &rhs);
}

// ---- params ----------------------------------------------------------------

const PairingParams& PairingParams::bls12_381() {
  static const PairingParams params = [] {
    PairingParams p;
    p.group_1 = {"G1", "BLS12-381 E(Fp) prime-order subgroup, 48-byte compressed points (signatures)"};
    p.group_2 = {"G2", "BLS12-381 E'(Fp2) prime-order subgroup, 96-byte compressed points (public keys)"};
    p.group_t = {"Gt", "order-q subgroup of Fp12^*"};
    p.generator_1 = G1Point::generator();
    p.generator_2 = G2Point::generator();
    auto q = from_hex("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001");
    std::copy(q.begin(), q.end(), p.order.begin());
    return p;
  }();
  return params;
}

}  // namespace endorse::crypto
