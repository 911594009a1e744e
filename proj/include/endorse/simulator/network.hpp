#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "endorse/common/rng.hpp"
#include "endorse/simulator/config.hpp"

namespace endorse::simulator {

/// Simulated time in nanoseconds.
using SimTime = std::int64_t;

constexpr SimTime from_ms(double ms) { return static_cast<SimTime>(ms * 1e6 + 0.5); }
constexpr double to_seconds(SimTime t) { return static_cast<double>(t) / 1e9; }

/// Serialization time of `bytes` on one link.
SimTime transmission_time(std::size_t bytes, const NetworkConfig& net);

/// Fixed gossip overlay: a random simple digraph in which every node pushes to
/// exactly `fanout` peers and hears from exactly `fanout` peers. One out-edge
/// per node follows a seeded random cycle, which keeps the graph strongly
/// connected. A fanout of at least N - 1 gives the full mesh.
class Overlay {
 public:
  Overlay(std::size_t nodes, std::size_t fanout, std::uint64_t seed);

  std::size_t size() const { return peers_.size(); }
  std::span<const std::uint32_t> peers(std::uint32_t node) const { return peers_[node]; }

 private:
  std::vector<std::vector<std::uint32_t>> peers_;
};

/// Directed links with FIFO serialization: a message waits until the link has
/// finished sending earlier ones, then takes size/bandwidth plus latency plus
/// an optional uniform jitter.
class Links {
 public:
  Links(const NetworkConfig& net, std::uint64_t seed) : net_(net), rng_(seed) {}

  /// Arrival time of a message handed to the link at `now`.
  SimTime send(std::uint32_t from, std::uint32_t to, std::size_t bytes, SimTime now);

 private:
  NetworkConfig net_;
  Rng rng_;
  std::unordered_map<std::uint64_t, SimTime> busy_until_;
};

struct GossipResult {
  std::vector<SimTime> delivered;  // -1 when never reached
  std::uint64_t messages = 0;
  std::uint64_t duplicates_suppressed = 0;
};

/// Flood one message from `origin` over the overlay. Nodes with relays[i] ==
/// false receive but do not forward. Each node forwards once, on first receipt.
GossipResult gossip(const Overlay& overlay, std::uint32_t origin, std::size_t bytes, const NetworkConfig& net,
                    std::span<const bool> relays, std::uint64_t seed);

}  // namespace endorse::simulator
