#include "endorse/selection/selection.hpp"

#include "endorse/common/error.hpp"
#include "endorse/common/rng.hpp"

namespace endorse::selection {

namespace {

EndorsementGroup draw_from(NodeId candidate, std::span<const CandidateGroup> groups, std::ptrdiff_t skip,
                           Rng& rng) {
  EndorsementGroup out;
  out.candidate = candidate;
  out.endorsers.reserve(groups.size());
  out.source_groups.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (static_cast<std::ptrdiff_t>(g) == skip) continue;
    const auto& members = groups[g].members;
    if (members.empty()) throw Error(ErrorCode::TooFewNodes, "empty candidate group");
    out.endorsers.push_back(members[rng.below(members.size())]);
    out.source_groups.push_back(groups[g].index);
  }
  return out;
}

}  // namespace

void SelectionConfig::validate() const {
  if (group_count < 2) throw Error(ErrorCode::ConfigInvalid, "group_count must be at least 2");
  if (total_candidates < group_count)
    throw Error(ErrorCode::ConfigInvalid, "total_candidates must be at least group_count");
  if (!(adversary_ratio >= 0.0 && adversary_ratio <= 0.5))
    throw Error(ErrorCode::ConfigInvalid, "adversary_ratio must lie in [0, 1/2]");
}

std::vector<CandidateGroup> partition_candidates(std::span<const NodeId> nodes, std::size_t group_count,
                                                 std::uint64_t seed) {
  if (group_count == 0 || nodes.size() < group_count)
    throw Error(ErrorCode::TooFewNodes, "fewer candidates than groups");
  std::vector<NodeId> shuffled(nodes.begin(), nodes.end());
  Rng rng(seed);
  rng.shuffle(std::span(shuffled));

  const std::size_t base = shuffled.size() / group_count;
  const std::size_t extra = shuffled.size() % group_count;
  std::vector<CandidateGroup> groups(group_count);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < group_count; ++g) {
    std::size_t size = base + (g < extra ? 1 : 0);
    groups[g].index = g + 1;
    groups[g].members.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(pos),
                             shuffled.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return groups;
}

EndorsementGroup assign_endorsers(NodeId candidate, std::span<const CandidateGroup> groups, std::uint64_t seed) {
  return GroupIndex(groups).assign(candidate, seed);
}

EndorsementGroup mid_epoch_assign(NodeId new_node, std::span<const CandidateGroup> groups, std::uint64_t seed) {
  if (groups.size() < 2) throw Error(ErrorCode::TooFewNodes, "need at least two candidate groups");
  Rng rng(derive_seed(seed, to_index(new_node)));
  auto skip = static_cast<std::ptrdiff_t>(rng.below(groups.size()));
  return draw_from(new_node, groups, skip, rng);
}

GroupIndex::GroupIndex(std::span<const CandidateGroup> groups) : groups_(groups) {
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (auto m : groups[g].members) position_.emplace(to_index(m), g);
}

std::ptrdiff_t GroupIndex::group_of(NodeId node) const {
  auto it = position_.find(to_index(node));
  return it == position_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

EndorsementGroup GroupIndex::assign(NodeId candidate, std::uint64_t seed) const {
  auto own = group_of(candidate);
  if (own < 0) throw Error(ErrorCode::UnknownCandidate, "candidate is not in any group");
  Rng rng(derive_seed(seed, to_index(candidate)));
  return draw_from(candidate, groups_, own, rng);
}

}  // namespace endorse::selection
