#pragma once

#include <optional>
#include <vector>

#include "endorse/crypto/scheme.hpp"

namespace endorse::protocol {

/// Candidate-side accumulation of endorsement signatures.
class CollectionState {
 public:
  CollectionState(crypto::PublicKeySet set, Bytes message);

  /// Single-signer check before the bit is set. Throws Error(DuplicateEndorser)
  /// or Error(BadSignature); state is unchanged on error.
  void collect(const crypto::Signature& sig, std::size_t from_index);

  std::size_t popcount() const { return vector_.popcount(); }
  std::size_t threshold() const { return threshold_; }
  bool finalizable() const { return popcount() >= threshold_; }
  std::size_t rejected() const { return rejected_; }

  const crypto::EndorserVector& vector() const { return vector_; }
  const std::vector<crypto::Signature>& signatures() const { return signatures_; }
  const crypto::PublicKeySet& set() const { return set_; }
  const Bytes& message() const { return message_; }

  std::optional<crypto::AggregateEndorsement> try_finalize() const;

 private:
  crypto::PublicKeySet set_;
  Bytes message_;
  crypto::EndorserVector vector_;
  std::vector<crypto::Signature> signatures_;
  std::size_t threshold_;
  std::size_t rejected_ = 0;
};

}  // namespace endorse::protocol
