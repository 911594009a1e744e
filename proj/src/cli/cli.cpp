#include "endorse/cli/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include "endorse/cli/manifest.hpp"
#include "endorse/common/error.hpp"
#include "endorse/crypto/scheme.hpp"
#include "endorse/protocol/collection.hpp"
#include "endorse/protocol/ledger.hpp"
#include "endorse/selection/probability.hpp"
#include "endorse/simulator/bootstrap.hpp"
#include "endorse/simulator/pow.hpp"
#include "endorse/simulator/reconfiguration.hpp"

namespace endorse::cli {

namespace {

using nlohmann::json;

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = std::make_shared<spdlog::logger>("endorse", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    const char* level = std::getenv("ENDORSE_LOG");
    l->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    return l;
  }();
  return *logger;
}

/// Raised when a verification verdict is negative; maps to exit code 1.
struct Rejected {
  std::string reason;
};

// ---- outputs ---------------------------------------------------------------------

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_config, bool with_format) {
  if (with_config) cmd->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--out", o.out, "output directory (default: primary output to stdout)");
  if (with_format) cmd->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

/// Collects outputs so that every file can list all of them in its manifest.
class Outputs {
 public:
  using Render = std::function<std::string(const RunManifest&)>;

  Outputs(const CommonOptions& opts, std::ostream& out) : dir_(opts.out), out_(out) {}

  /// Only primary outputs are printed when no directory is given.
  void add(std::string name, Render render, bool primary = false) {
    items_.push_back({std::move(name), std::move(render), primary});
  }

  void write(RunManifest manifest) {
    for (const auto& item : items_) manifest.output_paths.push_back(item.name);
    if (dir_.empty()) {
      for (const auto& item : items_) {
        if (item.primary) {
          out_ << item.render(manifest);
        } else {
          log().info("skipping {} (no --out directory)", item.name);
        }
      }
      return;
    }
    manifest.output_paths.push_back("manifest.json");
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir_ + ": " + ec.message());
    for (const auto& item : items_) save(item.name, item.render(manifest));
    save("manifest.json", manifest.to_json().dump(2) + "\n");
  }

 private:
  struct Item {
    std::string name;
    Render render;
    bool primary;
  };

  void save(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::path(dir_) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    log().info("wrote {}", path.string());
  }

  std::string dir_;
  std::ostream& out_;
  std::vector<Item> items_;
};

std::string json_document(const RunManifest& m, json body) {
  body["manifest"] = m.to_json();
  return body.dump(2) + "\n";
}

std::string csv_document(const RunManifest& m, const std::string& table) { return m.comment_line() + "\n" + table; }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedInput, path + ": " + e.what());
  }
}

std::string field_string(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw Error(ErrorCode::MalformedInput, path + ": missing string field " + key);
  return it->get<std::string>();
}

Bytes field_hex(const json& j, const char* key, const std::string& path) {
  try {
    return from_hex(field_string(j, key, path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MalformedEncoding) throw;
    throw Error(ErrorCode::MalformedInput, path + ": field " + key + ": " + e.detail());
  }
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) | rd();
}

/// Flatten nested objects into metric,value rows; arrays are left to JSON.
void flatten(const json& j, const std::string& prefix, std::string& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten(value, name, out);
    } else if (!value.is_array()) {
      out += name + "," + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
    }
  }
}

std::string flat_csv(const json& j) {
  std::string out = "metric,value\n";
  flatten(j, "", out);
  return out;
}

// ---- probability-table ------------------------------------------------------------

struct Ratio {
  std::string text;
  double value;
  std::string column;
};

Ratio parse_ratio(const std::string& text) {
  auto bad = [&] { return Error(ErrorCode::BadRatio, "cannot parse ratio '" + text + "'"); };
  Ratio r{text, 0, ""};
  try {
    std::size_t used = 0;
    if (auto slash = text.find('/'); slash != std::string::npos) {
      const double num = std::stod(text.substr(0, slash), &used);
      if (used != slash) throw bad();
      const std::string rest = text.substr(slash + 1);
      const double den = std::stod(rest, &used);
      if (used != rest.size() || den == 0) throw bad();
      r.value = num / den;
    } else {
      r.value = std::stod(text, &used);
      if (used != text.size()) throw bad();
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  if (text == "1/2") {
    r.column = "p_half";
  } else if (text == "1/3") {
    r.column = "p_third";
  } else {
    r.column = "p_" + text;
    for (auto& c : r.column)
      if (c == '/' || c == '.') c = '_';
  }
  return r;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

int cmd_probability_table(int n_min, int n_max, const std::vector<std::string>& ratio_texts, const CommonOptions& o,
                          std::ostream& out) {
  if (n_min < 1 || n_min > n_max)
    throw Error(ErrorCode::BadRange, "need 1 <= n-min <= n-max, got " + std::to_string(n_min) + ".." +
                                         std::to_string(n_max));
  std::vector<Ratio> ratios;
  for (const auto& t : ratio_texts) ratios.push_back(parse_ratio(t));
  std::vector<std::vector<double>> values;
  for (int n = n_min; n <= n_max; ++n) {
    values.emplace_back();
    for (const auto& r : ratios) values.back().push_back(selection::failure_probability(n, r.value));
  }
  const json input{{"n_min", n_min}, {"n_max", n_max}, {"ratios", ratio_texts}};
  Outputs outputs(o, out);
  if (o.format == "csv") {
    outputs.add(
        "probability_table.csv",
        [&](const RunManifest& m) {
          std::string table = "n";
          for (const auto& r : ratios) table += "," + r.column;
          table += "\n";
          for (int n = n_min; n <= n_max; ++n) {
            table += std::to_string(n);
            for (double v : values[static_cast<std::size_t>(n - n_min)]) table += "," + sci(v);
            table += "\n";
          }
          return csv_document(m, table);
        },
        true);
  } else {
    outputs.add(
        "probability_table.json",
        [&](const RunManifest& m) {
          json rows = json::array();
          for (int n = n_min; n <= n_max; ++n) {
            json row{{"n", n}};
            for (std::size_t k = 0; k < ratios.size(); ++k)
              row[ratios[k].column] = values[static_cast<std::size_t>(n - n_min)][k];
            rows.push_back(row);
          }
          return json_document(m, {{"rows", rows}});
        },
        true);
  }
  outputs.write(make_manifest("probability-table", input, 0));
  return kSuccess;
}

// ---- key tooling -------------------------------------------------------------------

crypto::G2Point parse_public_key(const json& j, const std::string& path) {
  auto bytes = field_hex(j, "public_key", path);
  auto pk = crypto::G2Point::decompress(bytes);
  if (!pk) throw Error(ErrorCode::MalformedInput, path + ": invalid public key");
  return *pk;
}

crypto::KeyPair parse_key(const std::string& path) {
  const json j = read_json(path);
  auto secret = crypto::Scalar::from_canonical(field_hex(j, "secret_key", path));
  if (!secret || secret->is_zero()) throw Error(ErrorCode::MalformedInput, path + ": invalid secret key");
  auto key = crypto::KeyPair::from_secret(*secret);
  if (!(key.public_key() == parse_public_key(j, path)))
    throw Error(ErrorCode::MalformedInput, path + ": public key does not match secret key");
  return key;
}

crypto::PublicKeySet parse_set(const std::string& path) {
  const json j = read_json(path);
  auto it = j.find("public_keys");
  if (it == j.end() || !it->is_array()) throw Error(ErrorCode::MalformedInput, path + ": missing public_keys array");
  std::vector<crypto::G2Point> keys;
  for (const auto& item : *it) {
    if (!item.is_string()) throw Error(ErrorCode::MalformedInput, path + ": public_keys must hold hex strings");
    Bytes bytes;
    try {
      bytes = from_hex(item.get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedInput, path + ": " + e.detail());
    }
    auto pk = crypto::G2Point::decompress(bytes);
    if (!pk) throw Error(ErrorCode::MalformedInput, path + ": invalid public key");
    keys.push_back(*pk);
  }
  crypto::PublicKeySet set(std::move(keys));
  if (j.contains("digest") && field_string(j, "digest", path) != to_hex(set.digest()))
    throw Error(ErrorCode::MalformedInput, path + ": digest does not match the keys");
  return set;
}

Bytes message_from(const std::string& text, const std::string& hex) {
  if (!hex.empty()) {
    try {
      return from_hex(hex);
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedInput, "--message-hex: " + e.detail());
    }
  }
  return {text.begin(), text.end()};
}

int cmd_keygen(const std::string& name, const CommonOptions& o, std::ostream& out) {
  const std::uint64_t seed = o.seed.value_or(fresh_seed());
  Rng rng(seed);
  const auto key = crypto::KeyPair::generate(rng);
  Outputs outputs(o, out);
  outputs.add(
      name + ".json",
      [&](const RunManifest& m) {
        return json_document(
            m, {{"secret_key", to_hex(key.secret().to_bytes())}, {"public_key", to_hex(key.public_key().compress())}});
      },
      true);
  outputs.write(make_manifest("keygen", json{{"name", name}}, seed));
  return kSuccess;
}

int cmd_keyset(const std::vector<std::string>& files, const std::string& name, const CommonOptions& o,
               std::ostream& out) {
  std::vector<crypto::G2Point> keys;
  json hexes = json::array();
  for (const auto& f : files) {
    keys.push_back(parse_public_key(read_json(f), f));
    hexes.push_back(to_hex(keys.back().compress()));
  }
  crypto::PublicKeySet set(std::move(keys));
  Outputs outputs(o, out);
  outputs.add(
      name + ".json",
      [&](const RunManifest& m) { return json_document(m, {{"public_keys", hexes}, {"digest", to_hex(set.digest())}}); },
      true);
  outputs.write(make_manifest("keyset", json{{"public_keys", hexes}}, 0));
  return kSuccess;
}

int cmd_sign(const std::string& key_path, const std::string& set_path, const Bytes& message, const std::string& name,
             const CommonOptions& o, std::ostream& out) {
  const auto key = parse_key(key_path);
  const auto set = parse_set(set_path);
  auto index = set.index_of(key.public_key());
  if (!index) throw Error(ErrorCode::NotAMember, "key is not in the set");
  const auto sig = crypto::sign(key, message, set, *index);
  Outputs outputs(o, out);
  outputs.add(
      name + ".json",
      [&](const RunManifest& m) {
        return json_document(m, {{"signature", to_hex(sig.encode())},
                                 {"set_digest", to_hex(set.digest())},
                                 {"message", to_hex(message)}});
      },
      true);
  outputs.write(make_manifest(
      "sign", json{{"public_key", to_hex(key.public_key().compress())}, {"set", to_hex(set.digest())}, {"message", to_hex(message)}},
      0));
  return kSuccess;
}

json aggregate_json(const crypto::AggregateEndorsement& agg) {
  return {{"sigma", to_hex(agg.sigma.compress())},
          {"vector", to_hex(agg.vector.encode_bits())},
          {"set_digest", to_hex(agg.vector.set_digest())},
          {"message", to_hex(agg.message)}};
}

int cmd_aggregate(const std::string& set_path, const std::vector<std::string>& files, const std::string& name,
                  const CommonOptions& o, std::ostream& out) {
  const auto set = parse_set(set_path);
  std::optional<protocol::CollectionState> collection;
  for (const auto& f : files) {
    const json j = read_json(f);
    if (field_hex(j, "set_digest", f) != Bytes(set.digest().begin(), set.digest().end()))
      throw Rejected{f + ": signature is for a different key set"};
    const auto message = field_hex(j, "message", f);
    if (!collection) {
      collection.emplace(set, message);
    } else if (collection->message() != message) {
      throw Rejected{f + ": signature is over a different message"};
    }
    crypto::Signature sig;
    try {
      sig = crypto::Signature::decode(field_hex(j, "signature", f));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MalformedInput) throw;
      throw Rejected{f + ": " + e.detail()};
    }
    try {
      collection->collect(sig, sig.signer_index);
    } catch (const Error& e) {
      throw Rejected{f + ": " + std::string(to_string(e.code())) + ": " + e.detail()};
    }
  }
  if (!collection) throw Error(ErrorCode::MalformedInput, "no signature files given");
  auto agg = collection->try_finalize();
  if (!agg)
    throw Rejected{"only " + std::to_string(collection->popcount()) + " of the " +
                   std::to_string(collection->threshold()) + " required signatures"};
  Outputs outputs(o, out);
  outputs.add(name + ".json", [&](const RunManifest& m) { return json_document(m, aggregate_json(*agg)); }, true);
  outputs.write(make_manifest("aggregate", aggregate_json(*agg), 0));
  return kSuccess;
}

// ---- verify -------------------------------------------------------------------------

/// Returns the rejection reason, or nothing when the aggregate is accepted.
std::optional<std::string> check_aggregate(const json& j, const std::string& path, const crypto::PublicKeySet& set) {
  ByteWriter w;
  w.raw(field_hex(j, "sigma", path));
  w.raw(field_hex(j, "vector", path));
  w.raw(field_hex(j, "set_digest", path));
  w.field(field_hex(j, "message", path));
  crypto::AggregateEndorsement agg;
  try {
    agg = crypto::AggregateEndorsement::decode(w.bytes());
  } catch (const Error& e) {
    return std::string(to_string(e.code())) + ": " + e.detail();
  }
  if (agg.vector.set_digest() != set.digest()) return "aggregate is for a different key set";
  if (agg.vector.popcount() < selection::quorum_threshold(set.size()))
    return "endorser vector below quorum (" + std::to_string(agg.vector.popcount()) + " of " +
           std::to_string(selection::quorum_threshold(set.size())) + ")";
  try {
    if (!crypto::verify_endorsement(agg, set)) return "signature does not verify";
  } catch (const Error& e) {
    return std::string(to_string(e.code())) + ": " + e.detail();
  }
  return std::nullopt;
}

int cmd_verify_aggregate(const std::string& agg_path, const std::string& set_path, const CommonOptions& o,
                         std::ostream& out) {
  const auto set = parse_set(set_path);
  const json j = read_json(agg_path);
  const auto reason = check_aggregate(j, agg_path, set);
  json verdict{{"verdict", reason ? "REJECT" : "ACCEPT"}};
  if (reason) verdict["reason"] = *reason;
  if (o.format == "json") {
    out << verdict.dump() << "\n";
  } else {
    out << (reason ? "REJECT: " + *reason : std::string("ACCEPT")) << "\n";
  }
  return reason ? kVerificationFailed : kSuccess;
}

int cmd_verify_ledger(const std::string& path, const CommonOptions& o, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  protocol::GlobalLedger ledger;
  json lines = json::array();
  std::size_t accepted = 0, rejected = 0, number = 0;
  for (std::string line; std::getline(in, line);) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::optional<std::string> reason;
    try {
      ledger.replay(protocol::LedgerRecord::decode(from_hex(line)));
    } catch (const Error& e) {
      reason = std::string(to_string(e.code())) + ": " + e.detail();
    }
    reason ? ++rejected : ++accepted;
    json entry{{"line", number}, {"verdict", reason ? "REJECT" : "ACCEPT"}};
    if (reason) entry["reason"] = *reason;
    lines.push_back(entry);
    log().debug("line {}: {}", number, reason.value_or("ACCEPT"));
  }
  const bool ok = rejected == 0 && accepted > 0;
  if (o.format == "json") {
    out << json{{"verdict", ok ? "ACCEPT" : "REJECT"}, {"accepted", accepted}, {"rejected", rejected}, {"records", lines}}
               .dump()
        << "\n";
  } else {
    for (const auto& e : lines)
      out << "line " << e["line"].get<std::size_t>() << ": " << e["verdict"].get<std::string>()
          << (e.contains("reason") ? " (" + e["reason"].get<std::string>() + ")" : "") << "\n";
    out << (ok ? "ACCEPT" : "REJECT") << " " << accepted << "/" << accepted + rejected << " records\n";
  }
  return ok ? kSuccess : kVerificationFailed;
}

// ---- simulate ----------------------------------------------------------------------

struct SweepPoint {
  std::string label;
  simulator::RunConfig config;
};

std::vector<std::size_t> sweep_values(const json& sweep, const char* key, std::size_t fallback) {
  auto it = sweep.find(key);
  if (it == sweep.end()) return {fallback};
  if (!it->is_array() || it->empty()) throw Error(ErrorCode::ConfigInvalid, std::string("sweep.") + key + " must be a non-empty array");
  std::vector<std::size_t> out;
  for (const auto& v : *it) {
    if (!v.is_number_unsigned()) throw Error(ErrorCode::ConfigInvalid, std::string("sweep.") + key + " must hold non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

/// Config file = run config plus an optional "sweep" over node_count and
/// endorsement_nodes.
std::pair<json, std::vector<SweepPoint>> load_simulation(const CommonOptions& o) {
  json raw = o.config.empty() ? json::object() : read_json(o.config);
  if (!raw.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be an object");
  json sweep;
  if (auto it = raw.find("sweep"); it != raw.end()) {
    sweep = *it;
    raw.erase("sweep");
    if (!sweep.is_object()) throw Error(ErrorCode::ConfigInvalid, "sweep must be an object");
    for (const auto& [key, value] : sweep.items())
      if (key != "node_count" && key != "endorsement_nodes") throw Error(ErrorCode::ConfigInvalid, "unknown key sweep." + key);
  }
  auto base = simulator::run_config_from_json(raw);
  if (o.seed) base.sim.seed = *o.seed;
  json canonical = simulator::to_json(base);
  std::vector<SweepPoint> points;
  if (sweep.is_null()) {
    points.push_back({"", base});
    return {canonical, points};
  }
  canonical["sweep"] = sweep;
  for (auto nodes : sweep_values(sweep, "node_count", base.sim.node_count)) {
    for (auto n : sweep_values(sweep, "endorsement_nodes", base.sim.endorsement_nodes)) {
      auto c = base;
      c.sim.node_count = nodes;
      c.sim.endorsement_nodes = n;
      c.sim.validate();
      points.push_back({"N" + std::to_string(nodes) + "_n" + std::to_string(n), c});
    }
  }
  return {canonical, points};
}

std::string events_csv(const RunManifest& m, const std::vector<std::string>& rows) {
  std::string table = std::string(simulator::kEventsCsvHeader) + "\n";
  for (const auto& r : rows) table += r + "\n";
  return csv_document(m, table);
}

int cmd_simulate(const CommonOptions& o, bool events, bool export_ledger, std::ostream& out) {
  auto [canonical, points] = load_simulation(o);
  const bool sweep = points.size() > 1 || !points.front().label.empty();
  if (export_ledger) {
    for (const auto& p : points)
      if (p.config.sim.crypto != simulator::CryptoMode::Full)
        throw Error(ErrorCode::ConfigInvalid, "--export-ledger needs sim.crypto = \"full\"");
  }
  const bool want_events = events && !o.out.empty();
  std::vector<simulator::BootstrapResult> results;
  for (const auto& p : points) {
    log().info("simulating {} nodes, n = {}, seed {}", p.config.sim.node_count, p.config.sim.endorsement_nodes,
               p.config.sim.seed);
    results.push_back(simulator::run_bootstrap(p.config.sim, p.config.net, {want_events, export_ledger}));
    const auto& r = results.back().report;
    log().info("completion {:.6f} s, {} finalized, {} failed", r.completion_time_s, r.finalized, r.failed_candidates);
    if (r.stress_run) log().warn("adversary share is at least 1/3: stress run outside the threat model");
  }

  Outputs outputs(o, out);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const std::string suffix = points[k].label.empty() ? "" : "_" + points[k].label;
    const auto* result = &results[k];
    const auto* point = &points[k];
    const bool primary = !sweep;
    if (o.format == "csv") {
      outputs.add("report" + suffix + ".csv",
                  [result](const RunManifest& m) { return csv_document(m, flat_csv(result->report.to_json())); }, primary);
    } else {
      outputs.add("report" + suffix + ".json",
                  [result, point](const RunManifest& m) {
                    return json_document(m, {{"config", simulator::to_json(point->config)},
                                             {"report", result->report.to_json()}});
                  },
                  primary);
    }
    if (want_events)
      outputs.add("events" + suffix + ".csv", [result](const RunManifest& m) { return events_csv(m, result->events_csv_rows); });
    if (export_ledger) {
      outputs.add("ledger" + suffix + ".txt", [result](const RunManifest& m) {
        std::string text = m.comment_line() + "\n";
        for (const auto& line : result->ledger_lines) text += line + "\n";
        return text;
      });
    }
  }
  if (sweep) {
    auto row_json = [&](std::size_t k) {
      const auto& r = results[k].report;
      return json{{"node_count", r.nodes},
                  {"endorsement_nodes", r.endorsement_nodes},
                  {"completion_time_s", r.completion_time_s},
                  {"finalized", r.finalized},
                  {"failed_candidates", r.failed_candidates},
                  {"messages_total", r.messages_total},
                  {"work_units", r.crypto.work_units}};
    };
    if (o.format == "csv") {
      outputs.add(
          "sweep.csv",
          [&](const RunManifest& m) {
            std::string table = "node_count,endorsement_nodes,completion_time_s,finalized,failed_candidates,messages_total,work_units\n";
            for (std::size_t k = 0; k < results.size(); ++k) {
              auto j = row_json(k);
              table += j["node_count"].dump() + "," + j["endorsement_nodes"].dump() + "," +
                       j["completion_time_s"].dump() + "," + j["finalized"].dump() + "," +
                       j["failed_candidates"].dump() + "," + j["messages_total"].dump() + "," + j["work_units"].dump() +
                       "\n";
            }
            return csv_document(m, table);
          },
          true);
    } else {
      outputs.add(
          "sweep.json",
          [&](const RunManifest& m) {
            json rows = json::array();
            for (std::size_t k = 0; k < results.size(); ++k) rows.push_back(row_json(k));
            return json_document(m, {{"points", rows}});
          },
          true);
    }
  }
  outputs.write(make_manifest(sweep ? "simulate-sweep" : "simulate", canonical, points.front().config.sim.seed));
  return kSuccess;
}

int cmd_reconfigure(std::size_t joins, const CommonOptions& o, std::ostream& out) {
  auto [canonical, points] = load_simulation(o);
  if (points.size() != 1 || !points.front().label.empty())
    throw Error(ErrorCode::ConfigInvalid, "reconfigure does not take a sweep");
  const auto& c = points.front().config;
  const auto report = simulator::measure_reconfiguration(c.sim, c.net, joins);
  canonical["joins"] = joins;
  Outputs outputs(o, out);
  if (o.format == "csv") {
    outputs.add("reconfiguration.csv", [&](const RunManifest& m) { return csv_document(m, flat_csv(report.to_json())); },
                true);
  } else {
    outputs.add("reconfiguration.json", [&](const RunManifest& m) { return json_document(m, report.to_json()); }, true);
  }
  outputs.write(make_manifest("reconfigure", canonical, c.sim.seed));
  return kSuccess;
}

// ---- pow ---------------------------------------------------------------------------

int cmd_pow(std::optional<unsigned> difficulty, double seconds, std::size_t trials, double unit_us,
            std::size_t endorsement_nodes, const CommonOptions& o, std::ostream& out) {
  const std::uint64_t seed = o.seed.value_or(1);
  simulator::WorkModel work;
  const unsigned d = difficulty.value_or(simulator::calibrate_difficulty(seconds, work, unit_us));
  const auto pow = simulator::run_pow_baseline(d, trials, seed, work, unit_us);
  const auto endorsement = simulator::measure_endorsement_work(endorsement_nodes, seed, work);
  json body{{"pow", pow.to_json()},
            {"endorsement", endorsement.to_json()},
            {"work_ratio", pow.cpu_work_units / static_cast<double>(endorsement.work_units)},
            {"work_unit_us", unit_us}};
  json input{{"difficulty", d}, {"trials", trials}, {"work_unit_us", unit_us}, {"endorsement_nodes", endorsement_nodes}};
  Outputs outputs(o, out);
  if (o.format == "csv") {
    outputs.add(
        "pow.csv",
        [&](const RunManifest& m) {
          std::string table = "trial,hashes\n";
          for (std::size_t t = 0; t < pow.per_trial_hashes.size(); ++t)
            table += std::to_string(t) + "," + std::to_string(pow.per_trial_hashes[t]) + "\n";
          return csv_document(m, table);
        },
        true);
  } else {
    outputs.add("pow.json", [&](const RunManifest& m) { return json_document(m, body); }, true);
  }
  outputs.write(make_manifest("pow", input, seed));
  return kSuccess;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::VerificationFailed:
    case ErrorCode::BadSignature:
      return kVerificationFailed;
    default:
      return kConfigError;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deposit-backed endorsement bootstrapping: probabilities, keys, verification and simulation"};
  app.name("endorse");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonOptions common;
  std::function<int()> action;

  auto* table = app.add_subcommand("probability-table", "failure probability per endorsement-group size");
  int n_min = 10, n_max = 30;
  std::vector<std::string> ratios{"1/2", "1/3"};
  table->add_option("--n-min", n_min, "smallest n")->capture_default_str();
  table->add_option("--n-max", n_max, "largest n")->capture_default_str();
  table->add_option("--ratios", ratios, "adversary ratios, as fractions or decimals")->delimiter(',')->capture_default_str();
  add_common(table, common, false, true);
  common.format = "csv";
  table->callback([&] { action = [&] { return cmd_probability_table(n_min, n_max, ratios, common, out); }; });

  std::string key_name, set_name, sig_name, agg_name;
  auto* keygen = app.add_subcommand("keygen", "generate a key pair");
  keygen->add_option("--name", key_name, "output file stem")->default_val("key");
  add_common(keygen, common, false, false);
  keygen->callback([&] { action = [&] { return cmd_keygen(key_name, common, out); }; });

  std::vector<std::string> files;
  auto* keyset = app.add_subcommand("keyset", "combine public keys into an ordered endorser set");
  keyset->add_option("keys", files, "key files, in set order")->required()->check(CLI::ExistingFile);
  keyset->add_option("--name", set_name, "output file stem")->default_val("set");
  add_common(keyset, common, false, false);
  keyset->callback([&] { action = [&] { return cmd_keyset(files, set_name, common, out); }; });

  std::string key_path, set_path, message_text, message_hex;
  auto* sign = app.add_subcommand("sign", "endorsement signature by one member of a set");
  sign->add_option("--key", key_path, "key file")->required()->check(CLI::ExistingFile);
  sign->add_option("--set", set_path, "set file")->required()->check(CLI::ExistingFile);
  auto* text_opt = sign->add_option("--message", message_text, "message text");
  sign->add_option("--message-hex", message_hex, "message bytes in hex")->excludes(text_opt);
  sign->add_option("--name", sig_name, "output file stem")->default_val("signature");
  add_common(sign, common, false, false);
  sign->callback([&] {
    action = [&] { return cmd_sign(key_path, set_path, message_from(message_text, message_hex), sig_name, common, out); };
  });

  auto* aggregate = app.add_subcommand("aggregate", "combine signatures into an aggregate endorsement");
  aggregate->add_option("--set", set_path, "set file")->required()->check(CLI::ExistingFile);
  aggregate->add_option("signatures", files, "signature files")->required()->check(CLI::ExistingFile);
  aggregate->add_option("--name", agg_name, "output file stem")->default_val("aggregate");
  add_common(aggregate, common, false, false);
  aggregate->callback([&] { action = [&] { return cmd_aggregate(set_path, files, agg_name, common, out); }; });

  std::string agg_path, ledger_path;
  auto* verify = app.add_subcommand("verify", "check an aggregate endorsement or a ledger export");
  auto* agg_opt = verify->add_option("--aggregate", agg_path, "aggregate file")->check(CLI::ExistingFile);
  auto* vset_opt = verify->add_option("--set", set_path, "set file")->check(CLI::ExistingFile);
  auto* ledger_opt = verify->add_option("--ledger", ledger_path, "ledger export")->check(CLI::ExistingFile);
  agg_opt->needs(vset_opt);
  ledger_opt->excludes(agg_opt);
  verify->add_option("--format", common.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  verify->preparse_callback([&](std::size_t) { common.format = "text"; });
  verify->callback([&] {
    action = [&] {
      if (!ledger_path.empty()) return cmd_verify_ledger(ledger_path, common, out);
      if (agg_path.empty()) throw Error(ErrorCode::MalformedInput, "verify needs --aggregate and --set, or --ledger");
      return cmd_verify_aggregate(agg_path, set_path, common, out);
    };
  });

  bool no_events = false, export_ledger = false;
  auto* simulate = app.add_subcommand("simulate", "run the bootstrap simulation (optionally a sweep)");
  add_common(simulate, common, true, true);
  simulate->add_flag("--no-events", no_events, "skip the event time series");
  simulate->add_flag("--export-ledger", export_ledger, "write the ledger (needs full crypto)");
  simulate->callback([&] { action = [&] { return cmd_simulate(common, !no_events, export_ledger, out); }; });

  std::size_t joins = 0;
  auto* reconfigure = app.add_subcommand("reconfigure", "epoch reconfiguration cost against a full bootstrap");
  add_common(reconfigure, common, true, true);
  reconfigure->add_option("--joins", joins, "nodes joining this epoch")->required();
  reconfigure->callback([&] { action = [&] { return cmd_reconfigure(joins, common, out); }; });

  std::optional<unsigned> difficulty;
  double seconds = 20.0, unit_us = 20.0;
  std::size_t trials = 30, endorsement_nodes = 10;
  auto* pow = app.add_subcommand("pow", "proof-of-work baseline against one endorsement");
  auto* diff_opt = pow->add_option("--difficulty", difficulty, "leading zero bits (at most 30)");
  pow->add_option("--calibrate-seconds", seconds, "pick the difficulty for this solve time")
      ->capture_default_str()
      ->excludes(diff_opt);
  pow->add_option("--trials", trials, "solves to average")->capture_default_str();
  pow->add_option("--work-unit-us", unit_us, "simulated microseconds per work unit")->capture_default_str();
  pow->add_option("--endorsement-nodes", endorsement_nodes, "n for the endorsement comparison")->capture_default_str();
  add_common(pow, common, false, true);
  pow->callback([&] { action = [&] { return cmd_pow(difficulty, seconds, trials, unit_us, endorsement_nodes, common, out); }; });

  // Subcommand defaults for --format differ; reset before parsing.
  common.format = "json";
  table->preparse_callback([&](std::size_t) { common.format = "csv"; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << json{{"error", "Usage"}, {"message", e.what()}}.dump() << "\n";
    return kConfigError;
  }

  try {
    return action();
  } catch (const Rejected& r) {
    if (common.format == "json") {
      out << json{{"verdict", "REJECT"}, {"reason", r.reason}}.dump() << "\n";
    } else {
      out << "REJECT: " << r.reason << "\n";
    }
    return kVerificationFailed;
  } catch (const Error& e) {
    err << json{{"error", to_string(e.code())}, {"message", e.detail()}}.dump() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return kConfigError;
  }
}

}  // namespace endorse::cli
