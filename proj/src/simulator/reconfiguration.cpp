#include "endorse/simulator/reconfiguration.hpp"

#include <algorithm>
#include <memory>

#include "endorse/common/rng.hpp"

namespace endorse::simulator {

namespace {

constexpr std::uint64_t kConfigBlockStream = 0x636f6e666967;

}  // namespace

ReconfigurationReport measure_reconfiguration(const SimConfig& sim, const NetworkConfig& net, std::size_t joins) {
  const auto plan = plan_reconfiguration(sim, joins);
  const auto bootstrap = run_bootstrap(sim, net).report;
  const auto epoch = run_plan(sim, net, plan).report;

  const std::uint64_t seed = derive_seed(sim.seed, kConfigBlockStream);
  Overlay overlay(sim.node_count, net.gossip_fanout, seed);
  auto relays = std::make_unique<bool[]>(sim.node_count);
  for (std::size_t i = 0; i < sim.node_count; ++i) relays[i] = plan.node_kind[i] != AdversaryKind::Silent;
  const auto block = gossip(overlay, 0, sim.message_sizes.config_block, net,
                            std::span<const bool>(relays.get(), sim.node_count), seed);

  ReconfigurationReport r;
  r.nodes = sim.node_count;
  r.joins = joins;
  r.joiners_finalized = epoch.finalized;
  r.config_block_messages = block.messages;
  r.messages = epoch.messages_total + block.messages;
  r.work_units = epoch.crypto.work_units + sim.node_count * sim.work.hash;
  const SimTime block_done = *std::max_element(block.delivered.begin(), block.delivered.end());
  r.completion_time_s = std::max(epoch.completion_time_s, to_seconds(block_done));
  r.bootstrap_messages = bootstrap.messages_total;
  r.bootstrap_work_units = bootstrap.crypto.work_units;
  return r;
}

double ReconfigurationReport::message_ratio() const {
  return static_cast<double>(messages) / static_cast<double>(bootstrap_messages);
}

double ReconfigurationReport::work_ratio() const {
  return static_cast<double>(work_units) / static_cast<double>(bootstrap_work_units);
}

nlohmann::json ReconfigurationReport::to_json() const {
  return {{"nodes", nodes},
          {"joins", joins},
          {"joiners_finalized", joiners_finalized},
          {"messages", messages},
          {"work_units", work_units},
          {"config_block_messages", config_block_messages},
          {"completion_time_s", completion_time_s},
          {"bootstrap_messages", bootstrap_messages},
          {"bootstrap_work_units", bootstrap_work_units},
          {"message_ratio", message_ratio()},
          {"work_ratio", work_ratio()}};
}

}  // namespace endorse::simulator
