#include "endorse/simulator/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <tuple>

namespace endorse::simulator {

SimTime transmission_time(std::size_t bytes, const NetworkConfig& net) {
  // bits / (Mbit/s) = microseconds
  return static_cast<SimTime>(std::llround(static_cast<double>(bytes) * 8.0 / net.link_bandwidth_mbps * 1e3));
}

namespace {

/// Repairs self-loops and repeated edges in a stub matching by swapping
/// targets between slots. Returns false if it gives up.
bool repair(std::vector<std::vector<std::uint32_t>>& peers, std::size_t fixed, Rng& rng) {
  const std::size_t nodes = peers.size();
  const std::size_t degree = peers[0].size();
  auto valid = [&](std::uint32_t node, std::size_t slot, std::uint32_t target) {
    if (target == node) return false;
    for (std::size_t k = 0; k < degree; ++k)
      if (k != slot && peers[node][k] == target) return false;
    return true;
  };
  for (std::size_t pass = 0; pass < 64; ++pass) {
    bool clean = true;
    for (std::uint32_t i = 0; i < nodes; ++i) {
      for (std::size_t k = fixed; k < degree; ++k) {
        if (valid(i, k, peers[i][k])) continue;
        clean = false;
        for (int attempt = 0; attempt < 256; ++attempt) {
          auto j = static_cast<std::uint32_t>(rng.below(nodes));
          auto l = fixed + rng.below(degree - fixed);
          if (j == i) continue;
          if (valid(i, k, peers[j][l]) && valid(j, l, peers[i][k])) {
            std::swap(peers[i][k], peers[j][l]);
            break;
          }
        }
      }
    }
    if (clean) return true;
  }
  return false;
}

}  // namespace

Overlay::Overlay(std::size_t nodes, std::size_t fanout, std::uint64_t seed) : peers_(nodes) {
  Rng rng(seed);
  if (nodes < 2) return;
  if (fanout >= nodes - 1) {
    for (std::uint32_t i = 0; i < nodes; ++i)
      for (std::uint32_t j = 0; j < nodes; ++j)
        if (i != j) peers_[i].push_back(j);
    return;
  }
  std::vector<std::uint32_t> cycle(nodes);
  for (std::uint32_t i = 0; i < nodes; ++i) cycle[i] = i;
  rng.shuffle(std::span(cycle));
  for (int restart = 0; restart < 16; ++restart) {
    std::vector<std::uint32_t> stubs;
    stubs.reserve(nodes * (fanout - 1));
    for (std::uint32_t i = 0; i < nodes; ++i) stubs.insert(stubs.end(), fanout - 1, i);
    rng.shuffle(std::span(stubs));
    for (std::size_t k = 0; k < nodes; ++k) {
      auto& p = peers_[cycle[k]];
      p.assign(1, cycle[(k + 1) % nodes]);
      p.insert(p.end(), stubs.begin() + static_cast<std::ptrdiff_t>(cycle[k] * (fanout - 1)),
               stubs.begin() + static_cast<std::ptrdiff_t>((cycle[k] + 1) * (fanout - 1)));
    }
    if (repair(peers_, 1, rng)) return;
  }
  // Dense corner cases: fixed offsets along the cycle are always simple.
  for (std::size_t k = 0; k < nodes; ++k) {
    auto& p = peers_[cycle[k]];
    p.clear();
    for (std::size_t d = 1; d <= fanout; ++d) p.push_back(cycle[(k + d) % nodes]);
  }
}

SimTime Links::send(std::uint32_t from, std::uint32_t to, std::size_t bytes, SimTime now) {
  auto& busy = busy_until_[(static_cast<std::uint64_t>(from) << 32) | to];
  const SimTime start = std::max(now, busy);
  busy = start + transmission_time(bytes, net_);
  SimTime jitter = 0;
  if (net_.jitter_ms > 0) jitter = static_cast<SimTime>(rng_.unit() * net_.jitter_ms * 1e6);
  return busy + from_ms(net_.link_latency_ms) + jitter;
}

GossipResult gossip(const Overlay& overlay, std::uint32_t origin, std::size_t bytes, const NetworkConfig& net,
                    std::span<const bool> relays, std::uint64_t seed) {
  GossipResult out;
  out.delivered.assign(overlay.size(), -1);
  Links links(net, seed);
  using Arrival = std::tuple<SimTime, std::uint64_t, std::uint32_t>;  // time, seq, node
  std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> queue;
  std::uint64_t seq = 0;
  queue.emplace(0, seq++, origin);
  while (!queue.empty()) {
    auto [t, s, node] = queue.top();
    queue.pop();
    if (out.delivered[node] >= 0) {
      ++out.duplicates_suppressed;
      continue;
    }
    out.delivered[node] = t;
    if (node != origin && !relays[node]) continue;
    for (auto peer : overlay.peers(node)) {
      if (out.delivered[peer] >= 0) continue;
      ++out.messages;
      queue.emplace(links.send(node, peer, bytes, t), seq++, peer);
    }
  }
  return out;
}

}  // namespace endorse::simulator
