#pragma once

// Global state ledger: an append-only log of verified endorsements.

#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "endorse/protocol/request.hpp"

namespace endorse::protocol {

enum class RecordStatus : std::uint8_t { Active = 0, Revoked = 1 };

struct ExitProof {
  crypto::AggregateEndorsement aggregate;
  crypto::PublicKeySet endorser_set;
};

struct LedgerRecord {
  crypto::G2Point candidate_pk;
  crypto::AggregateEndorsement aggregate;
  crypto::PublicKeySet endorser_set;
  TokenAddress token_address;
  std::uint64_t epoch = 0;
  RecordStatus status = RecordStatus::Active;
  std::optional<ExitProof> exit;

  Bytes encode() const;
  static LedgerRecord decode(ByteView bytes);
};

/// Deposit linearity and one-record-per-identity bookkeeping, independent of
/// how records are verified.
class DepositBook {
 public:
  /// Throws Error(DuplicateActive) if the identity already has a record (a
  /// revoked key pair stays invalid), Error(DepositReused) if the token backs
  /// an active record.
  void check(ByteView identity, const TokenAddress& token) const;
  void activate(ByteView identity, const TokenAddress& token, std::size_t position);
  void release(const TokenAddress& token);

  std::size_t active_count() const { return active_.size(); }
  bool is_active(const TokenAddress& token) const { return active_.count(token) != 0; }
  std::optional<std::size_t> position_of(ByteView identity) const;

 private:
  std::map<Bytes, std::size_t> identities_;
  std::map<TokenAddress, std::size_t> active_;
};

/// Decides whether a set is the endorsement group assigned to a candidate.
using GroupCheck = std::function<bool(const crypto::G2Point& candidate, const crypto::PublicKeySet& set)>;

class GlobalLedger {
 public:
  /// Without a registry only the linearity rules are enforced; with one the
  /// deposit must exist and be unspent, and it is marked spent on append.
  explicit GlobalLedger(TokenRegistry* registry = nullptr, GroupCheck group_check = {});

  /// Throws Error(VerificationFailed) if the message is not the endorsement
  /// message for (pk, token), the popcount is below quorum, the set is not the
  /// assigned group, or the aggregate does not verify. Throws
  /// Error(DepositReused) / Error(DuplicateActive) / Error(NoDeposit).
  std::size_t append(LedgerRecord record);

  /// Flip an active record to revoked once a verifying exit quorum over
  /// exit_message(pk, token) is presented. Releases the deposit. Throws
  /// Error(NotActive) or Error(VerificationFailed).
  void revoke(const crypto::G2Point& candidate_pk, ExitProof proof);

  const std::vector<LedgerRecord>& records() const { return records_; }
  std::optional<std::size_t> find(const crypto::G2Point& pk) const;
  std::size_t active_count() const { return book_.active_count(); }

  /// Re-enter an exported record: append it as active, then revoke it with
  /// its exit proof if it carries one. Same errors as append and revoke.
  void replay(LedgerRecord record);

  /// One hex-encoded record per line.
  void export_lines(std::ostream& out) const;
  /// Replays every line with full verification; blank lines and lines
  /// starting with '#' are skipped. Throws Error(MalformedEncoding) or the
  /// replay errors, prefixed with the 1-based line number.
  static GlobalLedger import_lines(std::istream& in);

 private:
  void verify_quorum(const crypto::G2Point& pk, const crypto::AggregateEndorsement& agg,
                     const crypto::PublicKeySet& set, const Bytes& expected_message) const;

  TokenRegistry* registry_;
  GroupCheck group_check_;
  DepositBook book_;
  std::vector<LedgerRecord> records_;
};

}  // namespace endorse::protocol
