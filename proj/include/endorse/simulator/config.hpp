#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "endorse/crypto/pairing.hpp"

namespace endorse::simulator {

enum class AdversaryKind : std::uint8_t { Silent, InvalidSig, SybilDuplicate, RogueKey };

std::string_view to_string(AdversaryKind kind);
/// Accepts "SILENT", "INVALID_SIG", "SYBIL_DUPLICATE", "ROGUE_KEY". Throws Error(ConfigInvalid).
AdversaryKind adversary_kind_from(std::string_view name);

enum class CryptoMode : std::uint8_t {
  Full,     // real pairing arithmetic through the protocol module
  Modeled,  // symbolic validity with the same operation accounting
};

struct NetworkConfig {
  double link_latency_ms = 100.0;
  double link_bandwidth_mbps = 25.0;
  double delta_ms = 1000.0;             // Δ
  double protocol_timeout_ms = 2000.0;  // P
  std::size_t gossip_fanout = 6;
  double jitter_ms = 0.0;  // uniform extra propagation delay in [0, jitter)

  /// Throws Error(ConfigInvalid).
  void validate() const;
};

struct AdversaryMix {
  double silent = 1.0;
  double invalid_sig = 0.0;
  double sybil_duplicate = 0.0;
  double rogue_key = 0.0;
};

struct MessageSizes {
  std::size_t request = 512;
  std::size_t response = 128;
  std::size_t announcement = 256;  // plus the packed endorser vector
  std::size_t config_block = 1024;
};

struct WorkModel {
  std::uint64_t pairing = 50;
  std::uint64_t exponentiation = 5;
  std::uint64_t hash = 1;

  std::uint64_t units(const crypto::OpCounts& ops) const {
    return ops.pairings * pairing + ops.exponentiations * exponentiation + ops.hashes * hash;
  }
};

struct ExplicitAdversary {
  std::uint32_t node = 0;
  AdversaryKind kind = AdversaryKind::Silent;
};

struct SimConfig {
  std::size_t node_count = 100;        // N
  std::size_t endorsement_nodes = 10;  // n
  double adversary_fraction = 0.0;
  AdversaryMix adversary_mix;
  /// When non-empty, replaces the sampled adversary placement.
  std::vector<ExplicitAdversary> adversaries;
  std::uint64_t seed = 1;
  MessageSizes message_sizes;
  double epoch_length_ms = 600000.0;
  std::size_t sybil_identities = 5;  // identities per SYBIL_DUPLICATE deposit
  CryptoMode crypto = CryptoMode::Modeled;
  WorkModel work;
  double work_unit_us = 20.0;  // simulated CPU time per work unit

  /// Throws Error(ConfigInvalid).
  void validate() const;
  /// Fraction at or above 1/3 is outside the threat model.
  bool stress_run() const;
};

struct RunConfig {
  SimConfig sim;
  NetworkConfig net;
};

void to_json(nlohmann::json& j, const NetworkConfig& c);
void to_json(nlohmann::json& j, const SimConfig& c);
nlohmann::json to_json(const RunConfig& c);

/// Missing keys keep their defaults; unknown keys and wrong types are
/// rejected with Error(ConfigInvalid). Both sections are validated.
RunConfig run_config_from_json(const nlohmann::json& j);
/// Throws Error(IoFailure) or Error(ConfigInvalid).
RunConfig load_run_config(const std::string& path);

}  // namespace endorse::simulator
