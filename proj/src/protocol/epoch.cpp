#include "endorse/protocol/epoch.hpp"

#include <string>

#include "endorse/common/error.hpp"
#include "endorse/common/rng.hpp"
#include "endorse/protocol/collection.hpp"

namespace endorse::protocol {

EpochState epoch_reconfigure(const EpochState& state, std::uint64_t seed) {
  std::vector<selection::NodeId> members;
  for (const auto& g : state.groups) members.insert(members.end(), g.members.begin(), g.members.end());
  members.insert(members.end(), state.pending_joins.begin(), state.pending_joins.end());

  EpochState next;
  next.number = state.number + 1;
  next.groups = selection::partition_candidates(members, state.groups.size(), seed);
  return next;
}

ExitOutcome process_exit(GlobalLedger& ledger, const crypto::G2Point& candidate_pk, selection::NodeId node,
                         std::span<const selection::CandidateGroup> groups, std::uint64_t seed,
                         const KeyDirectory& keys) {
  auto pos = ledger.find(candidate_pk);
  if (!pos || ledger.records()[*pos].status != RecordStatus::Active)
    throw Error(ErrorCode::NotActive, "no active record for this key");
  const LedgerRecord& rec = ledger.records()[*pos];

  ExitOutcome out;
  selection::GroupIndex index(groups);
  const std::uint64_t exit_seed = derive_seed(seed, 0x65786974);
  out.group = index.group_of(node) >= 0 ? index.assign(node, exit_seed)
                                        : selection::mid_epoch_assign(node, groups, exit_seed);

  std::vector<crypto::G2Point> set_keys;
  std::vector<EndorserHandle> signers;
  for (auto e : out.group.endorsers) {
    EndorserHandle h = keys(e);
    if (!h.key) throw Error(ErrorCode::UnknownCandidate, "no key for node " + std::to_string(to_index(e)));
    signers.push_back(h);
    set_keys.push_back(h.key->public_key());
  }
  crypto::PublicKeySet set(std::move(set_keys));
  CollectionState collection(set, exit_message(candidate_pk, rec.token_address));
  for (std::size_t i = 0; i < signers.size(); ++i) {
    if (!signers[i].answers) continue;
    collection.collect(crypto::sign(*signers[i].key, collection.message(), set, i), i);
  }
  out.signatures = collection.popcount();
  if (auto agg = collection.try_finalize()) {
    ledger.revoke(candidate_pk, ExitProof{std::move(*agg), set});
    out.revoked = true;
  }
  return out;
}

}  // namespace endorse::protocol
