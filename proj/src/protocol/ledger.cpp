#include "endorse/protocol/ledger.hpp"

#include <string>

#include "endorse/common/error.hpp"
#include "endorse/selection/probability.hpp"

namespace endorse::protocol {

namespace {

void write_proof(ByteWriter& w, const crypto::AggregateEndorsement& agg, const crypto::PublicKeySet& set) {
  w.field(agg.encode());
  w.field(set.encode());
}

crypto::PublicKeySet read_set(ByteReader& r) { return crypto::PublicKeySet::decode(r.field()); }

crypto::AggregateEndorsement read_aggregate(ByteReader& r) {
  ByteReader inner(r.field());
  auto agg = crypto::AggregateEndorsement::decode(inner);
  inner.expect_done();
  return agg;
}

Bytes identity_bytes(const crypto::G2Point& pk) {
  auto c = pk.compress();
  return {c.begin(), c.end()};
}

}  // namespace

Bytes LedgerRecord::encode() const {
  ByteWriter w;
  w.field(candidate_pk.compress());
  write_proof(w, aggregate, endorser_set);
  w.field(token_address);
  w.u64(epoch);
  w.u8(static_cast<std::uint8_t>(status));
  w.u8(exit ? 1 : 0);
  if (exit) write_proof(w, exit->aggregate, exit->endorser_set);
  return std::move(w).take();
}

LedgerRecord LedgerRecord::decode(ByteView bytes) {
  ByteReader r(bytes);
  auto pk = crypto::G2Point::decompress(r.field());
  if (!pk) throw Error(ErrorCode::MalformedEncoding, "record public key");
  auto agg = read_aggregate(r);
  auto set = read_set(r);
  LedgerRecord rec{*pk, std::move(agg), std::move(set), r.field_string(), 0, RecordStatus::Active, std::nullopt};
  rec.epoch = r.u64();
  auto status = r.u8();
  if (status > 1) throw Error(ErrorCode::MalformedEncoding, "record status");
  rec.status = static_cast<RecordStatus>(status);
  auto has_exit = r.u8();
  if (has_exit > 1) throw Error(ErrorCode::MalformedEncoding, "exit flag");
  if (has_exit) {
    auto exit_agg = read_aggregate(r);
    rec.exit = ExitProof{std::move(exit_agg), read_set(r)};
  }
  r.expect_done();
  if ((rec.status == RecordStatus::Revoked) != rec.exit.has_value())
    throw Error(ErrorCode::MalformedEncoding, "revoked status requires an exit proof");
  return rec;
}

void DepositBook::check(ByteView identity, const TokenAddress& token) const {
  if (identities_.count(Bytes(identity.begin(), identity.end())))
    throw Error(ErrorCode::DuplicateActive, "identity already has a ledger record");
  if (active_.count(token)) throw Error(ErrorCode::DepositReused, "deposit already backs an active record: " + token);
}

void DepositBook::activate(ByteView identity, const TokenAddress& token, std::size_t position) {
  check(identity, token);
  identities_.emplace(Bytes(identity.begin(), identity.end()), position);
  active_.emplace(token, position);
}

void DepositBook::release(const TokenAddress& token) { active_.erase(token); }

std::optional<std::size_t> DepositBook::position_of(ByteView identity) const {
  auto it = identities_.find(Bytes(identity.begin(), identity.end()));
  if (it == identities_.end()) return std::nullopt;
  return it->second;
}

GlobalLedger::GlobalLedger(TokenRegistry* registry, GroupCheck group_check)
    : registry_(registry), group_check_(std::move(group_check)) {}

void GlobalLedger::verify_quorum(const crypto::G2Point& pk, const crypto::AggregateEndorsement& agg,
                                 const crypto::PublicKeySet& set, const Bytes& expected_message) const {
  if (agg.message != expected_message) throw Error(ErrorCode::VerificationFailed, "message does not match record");
  if (agg.vector.popcount() < selection::quorum_threshold(set.size()))
    throw Error(ErrorCode::VerificationFailed, "popcount below quorum");
  if (!crypto::verify_endorsement(agg, set)) throw Error(ErrorCode::VerificationFailed, "aggregate does not verify");
  if (group_check_ && !group_check_(pk, set))
    throw Error(ErrorCode::VerificationFailed, "key set is not the assigned endorsement group");
}

std::size_t GlobalLedger::append(LedgerRecord record) {
  if (record.status != RecordStatus::Active || record.exit)
    throw Error(ErrorCode::VerificationFailed, "only active records can be appended");
  verify_quorum(record.candidate_pk, record.aggregate, record.endorser_set,
                endorsement_message(record.candidate_pk, record.token_address));
  const Bytes id = identity_bytes(record.candidate_pk);
  book_.check(id, record.token_address);
  if (registry_) {
    const Deposit* d = registry_->find(record.token_address);
    if (!d) throw Error(ErrorCode::NoDeposit, "unknown token address: " + record.token_address);
    if (d->spent) throw Error(ErrorCode::DepositReused, "deposit already spent: " + record.token_address);
    registry_->mark_spent(record.token_address);
  }
  const std::size_t pos = records_.size();
  book_.activate(id, record.token_address, pos);
  records_.push_back(std::move(record));
  return pos;
}

void GlobalLedger::revoke(const crypto::G2Point& candidate_pk, ExitProof proof) {
  auto pos = find(candidate_pk);
  if (!pos || records_[*pos].status != RecordStatus::Active)
    throw Error(ErrorCode::NotActive, "no active record for this key");
  LedgerRecord& rec = records_[*pos];
  // The exit group is freshly assigned, so the join-time group check does not apply.
  if (proof.aggregate.message != exit_message(candidate_pk, rec.token_address))
    throw Error(ErrorCode::VerificationFailed, "message does not match exit");
  if (proof.aggregate.vector.popcount() < selection::quorum_threshold(proof.endorser_set.size()))
    throw Error(ErrorCode::VerificationFailed, "exit popcount below quorum");
  if (!crypto::verify_endorsement(proof.aggregate, proof.endorser_set))
    throw Error(ErrorCode::VerificationFailed, "exit aggregate does not verify");
  rec.status = RecordStatus::Revoked;
  rec.exit = std::move(proof);
  book_.release(rec.token_address);
  if (registry_) registry_->release(rec.token_address);
}

std::optional<std::size_t> GlobalLedger::find(const crypto::G2Point& pk) const {
  return book_.position_of(identity_bytes(pk));
}

void GlobalLedger::export_lines(std::ostream& out) const {
  for (const auto& rec : records_) out << to_hex(rec.encode()) << '\n';
}

void GlobalLedger::replay(LedgerRecord record) {
  auto exit = std::move(record.exit);
  record.exit.reset();
  record.status = RecordStatus::Active;
  const auto pk = record.candidate_pk;
  append(std::move(record));
  if (exit) revoke(pk, std::move(*exit));
}

GlobalLedger GlobalLedger::import_lines(std::istream& in) {
  GlobalLedger ledger;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    try {
      ledger.replay(LedgerRecord::decode(from_hex(line)));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(number) + ": " + e.detail());
    }
  }
  return ledger;
}

}  // namespace endorse::protocol
