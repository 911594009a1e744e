#pragma once

// Coefficient-free aggregate verification (plain BLS multi-signature). Used
// only as an attack oracle: the rogue-key construction must pass here.

#include "endorse/crypto/scheme.hpp"

namespace endorse::testing {

inline crypto::AggregatePublicKey plain_aggregate_public_keys(const crypto::EndorserVector& vector,
                                                              const crypto::PublicKeySet& set) {
  crypto::G2Point a;
  for (std::size_t j : vector.indices()) a += set[j];
  return {a};
}

inline bool plain_verify(const crypto::AggregateEndorsement& agg, const crypto::PublicKeySet& set) {
  if (agg.sigma.is_identity() || !agg.sigma.in_group()) return false;
  auto apk = plain_aggregate_public_keys(agg.vector, set);
  if (apk.point.is_identity()) return false;
  return crypto::pairing(agg.sigma, crypto::G2Point::generator()) ==
         crypto::pairing(crypto::hash_to_group(agg.message), apk.point);
}

}  // namespace endorse::testing
