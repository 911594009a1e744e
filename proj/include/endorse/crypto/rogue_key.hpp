#pragma once

#include "endorse/crypto/scheme.hpp"

namespace endorse::crypto {

/// Output of the classic rogue-key construction against the keys selected by
/// `vector` in `victim_set`:
///   pk' = g2^alpha * prod_{j in y} pk_j^{-1},   sigma' = H0(m)^alpha.
/// forged_set is victim_set with pk' appended and forged_vector selects the
/// victims plus pk'. With all coefficients equal to 1 the forged keys multiply
/// to g2^alpha, so the pair passes a plain (coefficient-free) aggregate check.
/// The scheme's H1 weighting breaks the cancellation.
struct RogueKeyForgery {
  G2Point rogue_key;
  G1Point forged_sigma;
  PublicKeySet forged_set;
  EndorserVector forged_vector;
  Bytes message;

  AggregateEndorsement as_aggregate() const { return {forged_sigma, forged_vector, message}; }
};

RogueKeyForgery rogue_key_attempt(const Scalar& alpha, const PublicKeySet& victim_set,
                                  const EndorserVector& vector, ByteView message);

}  // namespace endorse::crypto
