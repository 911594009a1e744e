#include "endorse/cli/manifest.hpp"

#include "endorse/common/bytes.hpp"
#include "endorse/crypto/pairing.hpp"

namespace endorse::cli {

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},
          {"config_digest", config_digest},
          {"seed", seed},
          {"tool_version", tool_version},
          {"output_paths", output_paths}};
}

std::string RunManifest::comment_line() const { return "# manifest " + to_json().dump(); }

RunManifest make_manifest(std::string command, const nlohmann::json& canonical_input, std::uint64_t seed) {
  RunManifest m;
  m.command = std::move(command);
  m.config_digest = to_hex(crypto::sha256(as_bytes(canonical_input.dump())));
  m.seed = seed;
  return m;
}

}  // namespace endorse::cli
