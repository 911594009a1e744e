#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace endorse {

enum class ErrorCode {
  // crypto
  NotAMember,
  IndexKeyMismatch,
  VectorSignatureMismatch,
  DigestMismatch,
  DuplicateKey,
  MalformedEncoding,
  // selection
  TooFewNodes,
  UnknownCandidate,
  BadRatio,
  // protocol
  NoDeposit,
  AlreadyRequestedThisEpoch,
  DuplicateEndorser,
  BadSignature,
  VerificationFailed,
  DepositReused,
  DuplicateActive,
  NotActive,
  // simulator / cli
  ConfigInvalid,
  IoFailure,
  BadRange,
  MalformedInput,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. Every contract violation in the
/// library surfaces as one of these.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace endorse
