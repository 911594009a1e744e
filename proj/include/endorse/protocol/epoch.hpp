#pragma once

#include <functional>
#include <span>
#include <vector>

#include "endorse/protocol/ledger.hpp"
#include "endorse/selection/selection.hpp"

namespace endorse::protocol {

struct EpochState {
  std::uint64_t number = 1;
  std::vector<selection::CandidateGroup> groups;
  std::vector<selection::NodeId> pending_joins;
  RequestLog request_log;
};

/// Re-partition current members plus pending joins into the same number of
/// groups; advance the epoch and clear the request log.
EpochState epoch_reconfigure(const EpochState& state, std::uint64_t seed);

struct EndorserHandle {
  const crypto::KeyPair* key = nullptr;
  bool answers = true;
};

/// Resolves a node to its key pair and whether it responds.
using KeyDirectory = std::function<EndorserHandle(selection::NodeId)>;

struct ExitOutcome {
  selection::EndorsementGroup group;
  std::size_t signatures = 0;
  bool revoked = false;
};

/// Assign a fresh endorsement group to an active node, collect exit
/// endorsements from the members that answer, and revoke the record once the
/// join quorum is met. A node outside the current groups is assigned as a
/// mid-epoch join. Throws Error(NotActive), or Error(UnknownCandidate) when
/// the directory has no key for an endorser.
ExitOutcome process_exit(GlobalLedger& ledger, const crypto::G2Point& candidate_pk, selection::NodeId node,
                         std::span<const selection::CandidateGroup> groups, std::uint64_t seed,
                         const KeyDirectory& keys);

}  // namespace endorse::protocol
