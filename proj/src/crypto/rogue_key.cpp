#include "endorse/crypto/rogue_key.hpp"

#include "endorse/common/error.hpp"

namespace endorse::crypto {

RogueKeyForgery rogue_key_attempt(const Scalar& alpha, const PublicKeySet& victim_set,
                                  const EndorserVector& vector, ByteView message) {
  if (vector.set_digest() != victim_set.digest() || vector.size() != victim_set.size())
    throw Error(ErrorCode::DigestMismatch, "vector does not index the victim set");

  G2Point rogue = G2Point::generator() * alpha;
  for (std::size_t j : vector.indices()) rogue += -victim_set[j];

  std::vector<G2Point> keys = victim_set.keys();
  keys.push_back(rogue);
  PublicKeySet forged_set(std::move(keys));

  EndorserVector forged_vector = EndorserVector::for_set(forged_set);
  for (std::size_t j : vector.indices()) forged_vector.set(j);
  forged_vector.set(forged_set.size() - 1);

  return {rogue, hash_to_group(message) * alpha, std::move(forged_set), std::move(forged_vector),
          Bytes(message.begin(), message.end())};
}

}  // namespace endorse::crypto
