#include "endorse/protocol/request.hpp"

#include <bit>
#include <cstring>

#include "endorse/common/error.hpp"

namespace endorse::protocol {

namespace {

void put_double(ByteWriter& w, double v) { w.u64(std::bit_cast<std::uint64_t>(v)); }
double get_double(ByteReader& r) { return std::bit_cast<double>(r.u64()); }

ByteView identity_of(const crypto::G2Point& pk, crypto::G2Bytes& scratch) {
  scratch = pk.compress();
  return scratch;
}

}  // namespace

void TokenRegistry::add(const TokenAddress& address, std::uint64_t amount, const crypto::G2Point& owner) {
  auto [it, inserted] = deposits_.try_emplace(address, Deposit{amount, owner.compress(), false});
  if (!inserted) throw Error(ErrorCode::MalformedInput, "token address already registered: " + address);
}

const Deposit* TokenRegistry::find(const TokenAddress& address) const {
  auto it = deposits_.find(address);
  return it == deposits_.end() ? nullptr : &it->second;
}

bool TokenRegistry::usable(const TokenAddress& address, std::uint64_t minimum) const {
  const Deposit* d = find(address);
  return d && !d->spent && d->amount >= minimum;
}

void TokenRegistry::mark_spent(const TokenAddress& address) {
  auto it = deposits_.find(address);
  if (it == deposits_.end()) throw Error(ErrorCode::NoDeposit, "unknown token address: " + address);
  it->second.spent = true;
}

void TokenRegistry::release(const TokenAddress& address) {
  auto it = deposits_.find(address);
  if (it == deposits_.end()) throw Error(ErrorCode::NoDeposit, "unknown token address: " + address);
  it->second.spent = false;
}

bool RequestLog::contains(ByteView identity, std::uint64_t epoch) const {
  return entries_.count({Bytes(identity.begin(), identity.end()), epoch}) != 0;
}

bool RequestLog::record(ByteView identity, std::uint64_t epoch) {
  return entries_.emplace(Bytes(identity.begin(), identity.end()), epoch).second;
}

Bytes EndorsementRequest::encode() const {
  ByteWriter w;
  w.field(candidate_pk.compress());
  put_double(w, performance.cpu_score);
  put_double(w, performance.bandwidth_mbps);
  put_double(w, performance.storage_gb);
  w.field(token_address);
  w.u64(epoch);
  return std::move(w).take();
}

EndorsementRequest EndorsementRequest::decode(ByteView bytes) {
  ByteReader r(bytes);
  EndorsementRequest req;
  auto pk = crypto::G2Point::decompress(r.field());
  if (!pk) throw Error(ErrorCode::MalformedEncoding, "request public key");
  req.candidate_pk = *pk;
  req.performance.cpu_score = get_double(r);
  req.performance.bandwidth_mbps = get_double(r);
  req.performance.storage_gb = get_double(r);
  req.token_address = r.field_string();
  req.epoch = r.u64();
  r.expect_done();
  return req;
}

EndorsementRequest build_request(const CandidateState& candidate, std::uint64_t epoch, const TokenRegistry& registry,
                                 const Policy& policy, RequestLog& log) {
  if (!candidate.key) throw Error(ErrorCode::MalformedInput, "candidate has no key pair");
  if (!registry.usable(candidate.token_address, policy.min_deposit))
    throw Error(ErrorCode::NoDeposit, "no usable deposit at " + candidate.token_address);
  crypto::G2Bytes id;
  if (!log.record(identity_of(candidate.key->public_key(), id), epoch))
    throw Error(ErrorCode::AlreadyRequestedThisEpoch, "epoch " + std::to_string(epoch));
  return {candidate.key->public_key(), candidate.performance, candidate.token_address, epoch};
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::InvalidToken: return "InvalidToken";
    case RejectReason::SpentToken: return "SpentToken";
    case RejectReason::InsufficientDeposit: return "InsufficientDeposit";
    case RejectReason::InsufficientPerformance: return "InsufficientPerformance";
    case RejectReason::RateLimited: return "RateLimited";
  }
  return "Unknown";
}

Verdict evaluate_request(EndorserState& endorser, const EndorsementRequest& req, const TokenRegistry& registry,
                         const Policy& policy) {
  const Deposit* d = registry.find(req.token_address);
  if (!d) return {RejectReason::InvalidToken};
  if (d->spent) return {RejectReason::SpentToken};
  if (d->amount < policy.min_deposit) return {RejectReason::InsufficientDeposit};
  const auto& perf = req.performance;
  if (perf.cpu_score < policy.min_cpu_score || perf.bandwidth_mbps < policy.min_bandwidth_mbps ||
      perf.storage_gb < policy.min_storage_gb)
    return {RejectReason::InsufficientPerformance};
  crypto::G2Bytes id;
  if (!endorser.approved.record(identity_of(req.candidate_pk, id), req.epoch)) return {RejectReason::RateLimited};
  return {};
}

Bytes endorsement_message(const crypto::G2Point& candidate_pk, std::string_view token_address) {
  ByteWriter w;
  w.field(candidate_pk.compress());
  w.field(token_address);
  return std::move(w).take();
}

Bytes exit_message(const crypto::G2Point& candidate_pk, std::string_view token_address) {
  ByteWriter w;
  w.field("exit");
  w.field(candidate_pk.compress());
  w.field(token_address);
  return std::move(w).take();
}

crypto::Signature endorse(const crypto::KeyPair& endorser, const EndorsementRequest& req,
                          const crypto::PublicKeySet& set) {
  auto index = set.index_of(endorser.public_key());
  if (!index) throw Error(ErrorCode::NotAMember, "endorser key not in the endorsement group");
  return crypto::sign(endorser, endorsement_message(req.candidate_pk, req.token_address), set, *index);
}

}  // namespace endorse::protocol
