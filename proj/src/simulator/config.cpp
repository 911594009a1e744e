#include "endorse/simulator/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "endorse/common/error.hpp"

namespace endorse::simulator {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

/// Strict object reader: every key must be consumed by a known field.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_ + " must be an object");
  }
  void done() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) invalid("unknown key " + path_ + "." + key);
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_unsigned_v<T>) {
        if (!it->is_number_unsigned()) invalid(path_ + "." + key + " must be a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) invalid(path_ + "." + key + " must be a number");
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      invalid(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& what) {
  if (!ok) invalid(what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0; }

}  // namespace

std::string_view to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::Silent: return "SILENT";
    case AdversaryKind::InvalidSig: return "INVALID_SIG";
    case AdversaryKind::SybilDuplicate: return "SYBIL_DUPLICATE";
    case AdversaryKind::RogueKey: return "ROGUE_KEY";
  }
  return "UNKNOWN";
}

AdversaryKind adversary_kind_from(std::string_view name) {
  for (auto k : {AdversaryKind::Silent, AdversaryKind::InvalidSig, AdversaryKind::SybilDuplicate,
                 AdversaryKind::RogueKey})
    if (to_string(k) == name) return k;
  invalid("unknown adversary kind " + std::string(name));
}

void NetworkConfig::validate() const {
  check(finite_nonneg(link_latency_ms), "network.link_latency_ms must be >= 0");
  check(std::isfinite(link_bandwidth_mbps) && link_bandwidth_mbps > 0, "network.link_bandwidth_mbps must be > 0");
  check(std::isfinite(delta_ms) && delta_ms > 0, "network.delta_ms must be > 0");
  check(finite_nonneg(protocol_timeout_ms), "network.protocol_timeout_ms must be >= 0");
  check(gossip_fanout >= 1, "network.gossip_fanout must be >= 1");
  check(finite_nonneg(jitter_ms), "network.jitter_ms must be >= 0");
}

void SimConfig::validate() const {
  check(endorsement_nodes >= 1, "sim.endorsement_nodes must be >= 1");
  check(node_count >= endorsement_nodes + 1, "sim.node_count must be at least endorsement_nodes + 1");
  check(node_count <= (1u << 24), "sim.node_count is too large");
  check(std::isfinite(adversary_fraction) && adversary_fraction >= 0 && adversary_fraction < 1,
        "sim.adversary_fraction must lie in [0, 1)");
  const auto& m = adversary_mix;
  for (double v : {m.silent, m.invalid_sig, m.sybil_duplicate, m.rogue_key})
    check(finite_nonneg(v), "sim.adversary_mix weights must be >= 0");
  check(adversary_fraction == 0 || m.silent + m.invalid_sig + m.sybil_duplicate + m.rogue_key > 0,
        "sim.adversary_mix must have a positive weight");
  std::set<std::uint32_t> nodes;
  for (const auto& a : adversaries) {
    check(a.node < node_count, "sim.adversaries node out of range");
    check(nodes.insert(a.node).second, "sim.adversaries lists a node twice");
  }
  const auto& s = message_sizes;
  check(s.request > 0 && s.response > 0 && s.announcement > 0 && s.config_block > 0,
        "sim.message_sizes must be positive");
  check(std::isfinite(epoch_length_ms) && epoch_length_ms > 0, "sim.epoch_length_ms must be > 0");
  check(sybil_identities >= 1, "sim.sybil_identities must be >= 1");
  check(std::isfinite(work_unit_us) && work_unit_us >= 0, "sim.work_unit_us must be >= 0");
}

bool SimConfig::stress_run() const {
  if (!adversaries.empty()) return 3 * adversaries.size() >= node_count;
  return 3 * adversary_fraction >= 1.0;
}

void to_json(json& j, const NetworkConfig& c) {
  j = json{{"link_latency_ms", c.link_latency_ms},   {"link_bandwidth_mbps", c.link_bandwidth_mbps},
           {"delta_ms", c.delta_ms},                 {"protocol_timeout_ms", c.protocol_timeout_ms},
           {"gossip_fanout", c.gossip_fanout},       {"jitter_ms", c.jitter_ms}};
}

void to_json(json& j, const SimConfig& c) {
  json adversaries = json::array();
  for (const auto& a : c.adversaries) adversaries.push_back({{"node", a.node}, {"kind", to_string(a.kind)}});
  j = json{{"node_count", c.node_count},
           {"endorsement_nodes", c.endorsement_nodes},
           {"adversary_fraction", c.adversary_fraction},
           {"adversary_mix",
            {{"SILENT", c.adversary_mix.silent},
             {"INVALID_SIG", c.adversary_mix.invalid_sig},
             {"SYBIL_DUPLICATE", c.adversary_mix.sybil_duplicate},
             {"ROGUE_KEY", c.adversary_mix.rogue_key}}},
           {"adversaries", adversaries},
           {"seed", c.seed},
           {"message_sizes",
            {{"request", c.message_sizes.request},
             {"response", c.message_sizes.response},
             {"announcement", c.message_sizes.announcement},
             {"config_block", c.message_sizes.config_block}}},
           {"epoch_length_ms", c.epoch_length_ms},
           {"sybil_identities", c.sybil_identities},
           {"crypto", c.crypto == CryptoMode::Full ? "full" : "modeled"},
           {"work_model",
            {{"pairing", c.work.pairing}, {"exponentiation", c.work.exponentiation}, {"hash", c.work.hash}}},
           {"work_unit_us", c.work_unit_us}};
}

json to_json(const RunConfig& c) { return json{{"sim", c.sim}, {"network", c.net}}; }

RunConfig run_config_from_json(const json& j) {
  RunConfig out;
  Reader root(j, "config");
  if (const json* s = root.child("sim")) {
    Reader r(*s, "sim");
    auto& c = out.sim;
    r.get("node_count", c.node_count);
    r.get("endorsement_nodes", c.endorsement_nodes);
    r.get("adversary_fraction", c.adversary_fraction);
    if (const json* m = r.child("adversary_mix")) {
      Reader mr(*m, r.path("adversary_mix"));
      mr.get("SILENT", c.adversary_mix.silent);
      mr.get("INVALID_SIG", c.adversary_mix.invalid_sig);
      mr.get("SYBIL_DUPLICATE", c.adversary_mix.sybil_duplicate);
      mr.get("ROGUE_KEY", c.adversary_mix.rogue_key);
      mr.done();
    }
    if (const json* list = r.child("adversaries")) {
      if (!list->is_array()) invalid("sim.adversaries must be an array");
      for (const auto& item : *list) {
        Reader ar(item, r.path("adversaries[]"));
        ExplicitAdversary a;
        std::string kind = "SILENT";
        ar.get("node", a.node);
        ar.get("kind", kind);
        ar.done();
        a.kind = adversary_kind_from(kind);
        c.adversaries.push_back(a);
      }
    }
    r.get("seed", c.seed);
    if (const json* m = r.child("message_sizes")) {
      Reader mr(*m, r.path("message_sizes"));
      mr.get("request", c.message_sizes.request);
      mr.get("response", c.message_sizes.response);
      mr.get("announcement", c.message_sizes.announcement);
      mr.get("config_block", c.message_sizes.config_block);
      mr.done();
    }
    r.get("epoch_length_ms", c.epoch_length_ms);
    r.get("sybil_identities", c.sybil_identities);
    std::string crypto = c.crypto == CryptoMode::Full ? "full" : "modeled";
    r.get("crypto", crypto);
    if (crypto == "full") {
      c.crypto = CryptoMode::Full;
    } else if (crypto == "modeled") {
      c.crypto = CryptoMode::Modeled;
    } else {
      invalid("sim.crypto must be \"full\" or \"modeled\"");
    }
    if (const json* w = r.child("work_model")) {
      Reader wr(*w, r.path("work_model"));
      wr.get("pairing", c.work.pairing);
      wr.get("exponentiation", c.work.exponentiation);
      wr.get("hash", c.work.hash);
      wr.done();
    }
    r.get("work_unit_us", c.work_unit_us);
    r.done();
  }
  if (const json* n = root.child("network")) {
    Reader r(*n, "network");
    auto& c = out.net;
    r.get("link_latency_ms", c.link_latency_ms);
    r.get("link_bandwidth_mbps", c.link_bandwidth_mbps);
    r.get("delta_ms", c.delta_ms);
    r.get("protocol_timeout_ms", c.protocol_timeout_ms);
    r.get("gossip_fanout", c.gossip_fanout);
    r.get("jitter_ms", c.jitter_ms);
    r.done();
  }
  root.done();
  out.sim.validate();
  out.net.validate();
  return out;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    invalid(path + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace endorse::simulator
