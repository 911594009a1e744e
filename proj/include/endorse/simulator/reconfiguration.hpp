#pragma once

#include <nlohmann/json.hpp>

#include "endorse/simulator/bootstrap.hpp"

namespace endorse::simulator {

struct ReconfigurationReport {
  std::size_t nodes = 0;
  std::size_t joins = 0;
  std::size_t joiners_finalized = 0;

  /// Joiner endorsements plus the configuration block gossip.
  std::uint64_t messages = 0;
  std::uint64_t work_units = 0;
  std::uint64_t config_block_messages = 0;
  double completion_time_s = 0;

  std::uint64_t bootstrap_messages = 0;
  std::uint64_t bootstrap_work_units = 0;

  double message_ratio() const;
  double work_ratio() const;
  nlohmann::json to_json() const;
};

/// One epoch boundary on a network of sim.node_count nodes whose last `joins`
/// nodes are newcomers, compared with a full bootstrap of the same network.
/// Every node checks the configuration block digest (one hash). Throws
/// Error(ConfigInvalid).
ReconfigurationReport measure_reconfiguration(const SimConfig& sim, const NetworkConfig& net, std::size_t joins);

}  // namespace endorse::simulator
