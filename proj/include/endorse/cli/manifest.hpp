#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace endorse::cli {

inline constexpr std::string_view kToolVersion = ENDORSE_VERSION;

/// Provenance attached to every output.
struct RunManifest {
  std::string command;
  std::string config_digest;  // SHA-256 hex of the canonical input JSON
  std::uint64_t seed = 0;
  std::string tool_version{kToolVersion};
  std::vector<std::string> output_paths;  // relative to the output directory

  nlohmann::json to_json() const;
  /// Single comment line for CSV and line-oriented outputs, without newline.
  std::string comment_line() const;
};

RunManifest make_manifest(std::string command, const nlohmann::json& canonical_input, std::uint64_t seed);

}  // namespace endorse::cli
