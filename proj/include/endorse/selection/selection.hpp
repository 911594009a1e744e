#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace endorse::selection {

enum class NodeId : std::uint32_t {};

constexpr std::uint32_t to_index(NodeId id) { return static_cast<std::uint32_t>(id); }

struct SelectionConfig {
  std::size_t total_candidates = 0;  // N_c
  std::size_t group_count = 0;       // n + 1
  double adversary_ratio = 0.0;      // N_cF / N_c
  std::uint64_t seed = 0;

  std::size_t endorsers_per_candidate() const { return group_count - 1; }
  /// Throws Error(ConfigInvalid).
  void validate() const;
};

/// G_i, index in [1, n+1].
struct CandidateGroup {
  std::size_t index = 0;
  std::vector<NodeId> members;
};

/// V_i at the selection level: one endorser from every other subgroup.
struct EndorsementGroup {
  NodeId candidate{};
  std::vector<NodeId> endorsers;
  std::vector<std::size_t> source_groups;
};

/// Seeded Fisher-Yates shuffle, then contiguous slices; the first N mod g
/// groups get the extra member. Throws Error(TooFewNodes).
std::vector<CandidateGroup> partition_candidates(std::span<const NodeId> nodes, std::size_t group_count,
                                                 std::uint64_t seed);

/// One uniformly drawn member from each group except the candidate's own.
/// Each candidate draws from its own stream derived from (seed, candidate),
/// so the result does not depend on call order. Throws Error(UnknownCandidate).
EndorsementGroup assign_endorsers(NodeId candidate, std::span<const CandidateGroup> groups, std::uint64_t seed);

/// A node joining mid-epoch skips one uniformly chosen group and draws one
/// endorser from each of the remaining n. The groups are not modified; the
/// node joins a subgroup only at the next epoch boundary.
EndorsementGroup mid_epoch_assign(NodeId new_node, std::span<const CandidateGroup> groups, std::uint64_t seed);

/// Membership lookup for repeated assignment over the same partition.
class GroupIndex {
 public:
  explicit GroupIndex(std::span<const CandidateGroup> groups);

  /// Position in the groups span, or -1.
  std::ptrdiff_t group_of(NodeId node) const;
  EndorsementGroup assign(NodeId candidate, std::uint64_t seed) const;

 private:
  std::span<const CandidateGroup> groups_;
  std::unordered_map<std::uint32_t, std::size_t> position_;
};

}  // namespace endorse::selection
