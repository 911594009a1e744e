#include "endorse/protocol/collection.hpp"

#include "endorse/common/error.hpp"
#include "endorse/selection/probability.hpp"

namespace endorse::protocol {

CollectionState::CollectionState(crypto::PublicKeySet set, Bytes message)
    : set_(std::move(set)),
      message_(std::move(message)),
      vector_(crypto::EndorserVector::for_set(set_)),
      threshold_(selection::quorum_threshold(set_.size())) {}

void CollectionState::collect(const crypto::Signature& sig, std::size_t from_index) {
  if (from_index >= set_.size()) {
    ++rejected_;
    throw Error(ErrorCode::BadSignature, "index outside the endorsement group");
  }
  if (vector_.test(from_index)) throw Error(ErrorCode::DuplicateEndorser, "index " + std::to_string(from_index));
  if (sig.signer_index != from_index || !crypto::verify_signature(sig, message_, set_)) {
    ++rejected_;
    throw Error(ErrorCode::BadSignature, "index " + std::to_string(from_index));
  }
  vector_.set(from_index);
  signatures_.push_back(sig);
}

std::optional<crypto::AggregateEndorsement> CollectionState::try_finalize() const {
  if (!finalizable()) return std::nullopt;
  return crypto::aggregate_signatures(vector_, signatures_, message_);
}

}  // namespace endorse::protocol
