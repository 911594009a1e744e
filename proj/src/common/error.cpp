#include "endorse/common/error.hpp"

namespace endorse {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotAMember: return "NotAMember";
    case ErrorCode::IndexKeyMismatch: return "IndexKeyMismatch";
    case ErrorCode::VectorSignatureMismatch: return "VectorSignatureMismatch";
    case ErrorCode::DigestMismatch: return "DigestMismatch";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::MalformedEncoding: return "MalformedEncoding";
    case ErrorCode::TooFewNodes: return "TooFewNodes";
    case ErrorCode::UnknownCandidate: return "UnknownCandidate";
    case ErrorCode::BadRatio: return "BadRatio";
    case ErrorCode::NoDeposit: return "NoDeposit";
    case ErrorCode::AlreadyRequestedThisEpoch: return "AlreadyRequestedThisEpoch";
    case ErrorCode::DuplicateEndorser: return "DuplicateEndorser";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::DepositReused: return "DepositReused";
    case ErrorCode::DuplicateActive: return "DuplicateActive";
    case ErrorCode::NotActive: return "NotActive";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

}  // namespace endorse
