#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "endorse/selection/selection.hpp"
#include "endorse/simulator/config.hpp"
#include "endorse/simulator/network.hpp"

namespace endorse::simulator {

/// A candidate identity. Base identity i is hosted on node i; Sybil extras are
/// hosted on their owner's node and share its deposit.
struct Identity {
  std::uint32_t host = 0;
  std::uint32_t deposit = 0;  // index of the backing deposit (= owner node)
  bool extra = false;
  std::vector<std::uint32_t> endorsers;  // host nodes, in key-set order
};

/// Deterministic setup shared by the simulator and by tests that need to know
/// who endorses whom.
struct BootstrapPlan {
  std::vector<selection::CandidateGroup> groups;
  std::vector<std::optional<AdversaryKind>> node_kind;  // per node, empty = honest
  std::vector<Identity> identities;

  bool honest(std::uint32_t node) const { return !node_kind[node]; }
  /// SILENT and INVALID_SIG endorsers never contribute a valid signature.
  bool responds(std::uint32_t node) const {
    return !node_kind[node] || (*node_kind[node] != AdversaryKind::Silent && *node_kind[node] != AdversaryKind::InvalidSig);
  }
};

/// Throws Error(ConfigInvalid).
BootstrapPlan plan_bootstrap(const SimConfig& sim);

/// The network ends the epoch with sim.node_count nodes; the last `joins` of
/// them are newcomers. Existing members form the groups and every joiner is
/// assigned as a mid-epoch join. joins == node_count is a full bootstrap.
/// Throws Error(ConfigInvalid).
BootstrapPlan plan_reconfiguration(const SimConfig& sim, std::size_t joins);

struct TimeSummary {
  double min = 0, p50 = 0, p90 = 0, max = 0, mean = 0;
};

struct OpTotals {
  std::uint64_t signs = 0;
  std::uint64_t signature_verifications = 0;
  std::uint64_t announcement_verifications = 0;
  crypto::OpCounts ops;
  std::uint64_t work_units = 0;

  friend bool operator==(const OpTotals&, const OpTotals&) = default;
};

struct BootstrapReport {
  std::size_t nodes = 0;
  std::size_t identities = 0;
  std::size_t endorsement_nodes = 0;
  bool stress_run = false;

  double completion_time_s = 0;  // last honest node done verifying the last honest announcement
  std::vector<double> per_node_times_s;  // per honest identity, -1 if it never completed
  TimeSummary per_node_summary;

  std::size_t finalized = 0;
  std::size_t failed_candidates = 0;
  std::map<std::string, std::size_t> failure_reasons;

  std::uint64_t messages_total = 0;
  std::uint64_t messages_per_node_max = 0;
  double messages_per_node_mean = 0;
  std::uint64_t duplicates_suppressed = 0;
  /// Candidate-role traffic: requests sent, responses received and the
  /// candidate's own announcement pushes.
  std::uint64_t max_direct_per_candidate = 0;
  /// Requests plus originated announcements over all identities.
  std::uint64_t direct_total = 0;
  std::uint64_t direct_expected = 0;  // identities * (n + 1)

  OpTotals crypto;

  std::size_t ledger_active = 0;
  std::size_t distinct_deposits = 0;
  std::size_t forgery_attempts = 0;
  std::size_t forgeries_accepted = 0;
  std::uint64_t invalid_signatures_discarded = 0;

  double max_hop_ms = 0;          // honest-to-honest single message
  double max_round_trip_ms = 0;   // request sent to response received
  std::size_t honest_unreached = 0;  // (honest node, accepted announcement) pairs never verified

  /// Honest identities whose group has a responding quorum but did not finalize.
  std::size_t conformant_stalled = 0;

  nlohmann::json to_json() const;
};

struct BootstrapOptions {
  bool record_events = false;
  /// Ledger export lines (full crypto only).
  bool export_ledger = false;
};

struct BootstrapResult {
  BootstrapReport report;
  std::vector<std::string> events_csv_rows;  // without header
  std::vector<std::string> ledger_lines;
  /// Per identity, the endorser nodes aggregated into its record (empty if it
  /// never reached the threshold).
  std::vector<std::vector<std::uint32_t>> signers;
};

/// Run the identities of `plan`; plan.node_kind must cover sim.node_count nodes.
/// Throws Error(ConfigInvalid).
BootstrapResult run_plan(const SimConfig& sim, const NetworkConfig& net, const BootstrapPlan& plan,
                         const BootstrapOptions& options = {});

/// Throws Error(ConfigInvalid).
BootstrapResult run_bootstrap(const SimConfig& sim, const NetworkConfig& net, const BootstrapOptions& options = {});

inline constexpr const char* kEventsCsvHeader = "event_time,event_type,node_id";

/// Declared per-operation costs used by the modeled mode.
namespace op_model {
inline constexpr crypto::OpCounts kSign{2, 1, 0};
inline constexpr crypto::OpCounts kInvalidSign{0, 1, 0};
inline constexpr crypto::OpCounts kVerifySignature{2, 1, 2};
/// verify_endorsement over an aggregate with `signers` set bits.
constexpr crypto::OpCounts verify_aggregate(std::size_t signers) { return {signers + 1, signers, 2}; }
}  // namespace op_model

}  // namespace endorse::simulator
