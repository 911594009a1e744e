#pragma once

// Participation requests and the endorser-side decision.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "endorse/common/bytes.hpp"
#include "endorse/crypto/scheme.hpp"

namespace endorse::protocol {

using TokenAddress = std::string;

struct PerformanceMatrix {
  double cpu_score = 0.0;
  double bandwidth_mbps = 0.0;
  double storage_gb = 0.0;
};

struct Policy {
  double min_cpu_score = 1.0;
  double min_bandwidth_mbps = 25.0;
  double min_storage_gb = 1.0;
  std::uint64_t min_deposit = 1000;
};

struct Deposit {
  std::uint64_t amount = 0;
  crypto::G2Bytes owner{};
  bool spent = false;
};

/// In-memory stand-in for deposit storage.
class TokenRegistry {
 public:
  /// Throws Error(MalformedInput) if the address is already registered.
  void add(const TokenAddress& address, std::uint64_t amount, const crypto::G2Point& owner);
  const Deposit* find(const TokenAddress& address) const;
  bool usable(const TokenAddress& address, std::uint64_t minimum) const;
  /// Throw Error(NoDeposit) for an unknown address.
  void mark_spent(const TokenAddress& address);
  void release(const TokenAddress& address);
  std::size_t size() const { return deposits_.size(); }

 private:
  std::map<TokenAddress, Deposit> deposits_;
};

/// (identity, epoch) pairs that have already been used.
class RequestLog {
 public:
  bool contains(ByteView identity, std::uint64_t epoch) const;
  /// False if the pair was already present.
  bool record(ByteView identity, std::uint64_t epoch);
  void clear() { entries_.clear(); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::set<std::pair<Bytes, std::uint64_t>> entries_;
};

struct EndorsementRequest {
  crypto::G2Point candidate_pk;
  PerformanceMatrix performance;
  TokenAddress token_address;
  std::uint64_t epoch = 0;

  Bytes encode() const;
  static EndorsementRequest decode(ByteView bytes);
};

struct CandidateState {
  const crypto::KeyPair* key = nullptr;
  TokenAddress token_address;
  PerformanceMatrix performance;
};

/// Throws Error(NoDeposit) when the deposit is unknown, spent or below the
/// policy minimum, and Error(AlreadyRequestedThisEpoch) on a second request.
EndorsementRequest build_request(const CandidateState& candidate, std::uint64_t epoch, const TokenRegistry& registry,
                                 const Policy& policy, RequestLog& log);

enum class RejectReason { InvalidToken, SpentToken, InsufficientDeposit, InsufficientPerformance, RateLimited };

std::string_view to_string(RejectReason reason);

struct Verdict {
  std::optional<RejectReason> reject;
  bool approved() const { return !reject; }
};

struct EndorserState {
  const crypto::KeyPair* key = nullptr;
  RequestLog approved;
};

/// Thresholds are inclusive. An approval is remembered, so the same identity
/// is refused for the rest of the epoch.
Verdict evaluate_request(EndorserState& endorser, const EndorsementRequest& req, const TokenRegistry& registry,
                         const Policy& policy);

/// m = field(compressed pk) || field(token address).
Bytes endorsement_message(const crypto::G2Point& candidate_pk, std::string_view token_address);
/// field("exit") || field(compressed pk) || field(token address).
Bytes exit_message(const crypto::G2Point& candidate_pk, std::string_view token_address);

/// Sign the request's message at the endorser's position in the set.
/// Throws Error(NotAMember) if the endorser's key is not in the set.
crypto::Signature endorse(const crypto::KeyPair& endorser, const EndorsementRequest& req,
                          const crypto::PublicKeySet& set);

}  // namespace endorse::protocol
