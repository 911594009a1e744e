#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "endorse/cli/cli.hpp"
#include "endorse/cli/manifest.hpp"
#include "endorse/common/bytes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = endorse::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string config_path(const char* name) { return std::string(ENDORSE_SOURCE_DIR) + "/configs/" + name; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("endorse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

json error_of(const Run& r) { return json::parse(r.err); }

}  // namespace

TEST_F(CliTest, ProbabilityTableFirstRow) {
  auto r = cli({"probability-table", "--n-min", "10", "--n-max", "10", "--ratios", "1/2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string manifest, header, row, extra;
  std::getline(lines, manifest);
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(manifest.rfind("# manifest {", 0), 0u);
  EXPECT_EQ(header, "n,p_half");
  EXPECT_EQ(row, "10,5.8594e-03");
  EXPECT_FALSE(std::getline(lines, extra));
}

TEST_F(CliTest, ProbabilityTableFullRange) {
  auto r = cli({"probability-table", "--out", path("t")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(dir_ / "t" / "probability_table.csv");
  std::istringstream lines(text);
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  ASSERT_EQ(rows.size(), 23u);
  EXPECT_EQ(rows[1], "n,p_half,p_third");
  EXPECT_EQ(rows[20], "28,6.7055e-08,1.8190e-08");
  EXPECT_EQ(rows[18].substr(0, 3), "26,");
  EXPECT_NE(rows[18].find(",6.4968e-08"), std::string::npos);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST_F(CliTest, ProbabilityTableJsonAndDecimalRatios) {
  auto r = cli({"probability-table", "--n-min", "12", "--n-max", "13", "--ratios", "0.25,1/3", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["n"], 12);
  EXPECT_TRUE(j["rows"][0].contains("p_0_25"));
  EXPECT_TRUE(j["rows"][1].contains("p_third"));
  EXPECT_EQ(j["manifest"]["command"], "probability-table");
}

TEST_F(CliTest, ProbabilityTableErrors) {
  auto r = cli({"probability-table", "--n-min", "5", "--n-max", "4"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r)["error"], "BadRange");
  EXPECT_TRUE(r.out.empty());
  r = cli({"probability-table", "--n-min", "0", "--n-max", "4"});
  EXPECT_EQ(error_of(r)["error"], "BadRange");
  r = cli({"probability-table", "--ratios", "two/3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r)["error"], "BadRatio");
  r = cli({"probability-table", "--ratios", "0.7"});
  EXPECT_EQ(error_of(r)["error"], "BadRatio");
}

TEST_F(CliTest, UsageErrorsAreMachineReadable) {
  auto r = cli({});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r)["error"], "Usage");
  r = cli({"simulate", "--format", "xml"});
  EXPECT_EQ(r.code, 2);
  r = cli({"verify", "--aggregate", path("missing.json"), "--set", path("missing.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({"--version"}).out, std::string(endorse::cli::kToolVersion) + "\n");
}

TEST_F(CliTest, KeygenIsSeededAndRecordsFreshSeeds) {
  ASSERT_EQ(cli({"keygen", "--seed", "7", "--out", path("a")}).code, 0);
  ASSERT_EQ(cli({"keygen", "--seed", "7", "--out", path("b")}).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "key.json"), slurp(dir_ / "b" / "key.json"));

  auto fresh = cli({"keygen"});
  ASSERT_EQ(fresh.code, 0);
  auto j = json::parse(fresh.out);
  const auto seed = j["manifest"]["seed"].get<std::uint64_t>();
  auto again = json::parse(cli({"keygen", "--seed", std::to_string(seed)}).out);
  EXPECT_EQ(j["secret_key"], again["secret_key"]);
  EXPECT_EQ(endorse::from_hex(j["public_key"].get<std::string>()).size(), 96u);
}

TEST_F(CliTest, SingleEndorserRoundTrip) {
  ASSERT_EQ(cli({"keygen", "--seed", "1", "--out", path("")}).code, 0);
  ASSERT_EQ(cli({"keyset", path("key.json"), "--out", path("")}).code, 0);
  ASSERT_EQ(cli({"sign", "--key", path("key.json"), "--set", path("set.json"), "--message", "self", "--out", path("")}).code, 0);
  ASSERT_EQ(cli({"aggregate", "--set", path("set.json"), path("signature.json"), "--out", path("")}).code, 0);

  auto r = cli({"verify", "--aggregate", path("aggregate.json"), "--set", path("set.json")});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out, "ACCEPT\n");

  auto agg = json::parse(slurp(dir_ / "aggregate.json"));
  auto sigma = endorse::from_hex(agg["sigma"].get<std::string>());
  for (std::size_t byte : {0u, 5u, 47u}) {
    auto tampered = agg;
    auto bad = sigma;
    bad[byte] ^= 0x01;
    tampered["sigma"] = endorse::to_hex(bad);
    std::ofstream(path("tampered.json")) << tampered.dump();
    r = cli({"verify", "--aggregate", path("tampered.json"), "--set", path("set.json")});
    EXPECT_EQ(r.code, 1) << byte;
    EXPECT_EQ(r.out.rfind("REJECT", 0), 0u);
  }
}

TEST_F(CliTest, QuorumAggregateAcrossFourKeys) {
  std::vector<std::string> keyset{"keyset"};
  for (int k = 0; k < 4; ++k) {
    const auto name = "k" + std::to_string(k);
    ASSERT_EQ(cli({"keygen", "--seed", std::to_string(100 + k), "--name", name, "--out", path("")}).code, 0);
    keyset.push_back(path(name + ".json"));
  }
  keyset.insert(keyset.end(), {"--out", path("")});
  ASSERT_EQ(cli(keyset).code, 0);
  std::vector<std::string> sigs;
  for (int k = 0; k < 3; ++k) {
    const auto name = "s" + std::to_string(k);
    ASSERT_EQ(cli({"sign", "--key", path("k" + std::to_string(k) + ".json"), "--set", path("set.json"), "--message-hex",
                   "00ff10", "--name", name, "--out", path("")})
                  .code,
              0);
    sigs.push_back(path(name + ".json"));
  }

  auto below = cli({"aggregate", "--set", path("set.json"), sigs[0], sigs[1]});
  EXPECT_EQ(below.code, 1);

  ASSERT_EQ(cli({"aggregate", "--set", path("set.json"), sigs[0], sigs[1], sigs[2], "--out", path("")}).code, 0);
  auto r = cli({"verify", "--aggregate", path("aggregate.json"), "--set", path("set.json"), "--format", "json"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["verdict"], "ACCEPT");

  auto agg = json::parse(slurp(dir_ / "aggregate.json"));
  auto wrong_message = agg;
  wrong_message["message"] = "00ff11";
  std::ofstream(path("m.json")) << wrong_message.dump();
  EXPECT_EQ(cli({"verify", "--aggregate", path("m.json"), "--set", path("set.json")}).code, 1);

  auto bits = endorse::from_hex(agg["vector"].get<std::string>());
  bits.back() ^= 0x08;  // claim the fourth endorser too
  auto extra_bit = agg;
  extra_bit["vector"] = endorse::to_hex(bits);
  std::ofstream(path("v.json")) << extra_bit.dump();
  EXPECT_EQ(cli({"verify", "--aggregate", path("v.json"), "--set", path("set.json")}).code, 1);

  ASSERT_EQ(cli({"keyset", keyset[2], keyset[3], keyset[4], "--name", "other", "--out", path("")}).code, 0);
  EXPECT_EQ(cli({"verify", "--aggregate", path("aggregate.json"), "--set", path("other.json")}).code, 1);

  auto mismatched = cli({"sign", "--key", path("k0.json"), "--set", path("other.json"), "--message", "x"});
  EXPECT_EQ(mismatched.code, 2);
  EXPECT_EQ(error_of(mismatched)["error"], "NotAMember");
}

TEST_F(CliTest, MalformedInputsExitTwo) {
  std::ofstream(path("garbage.json")) << "{not json";
  std::ofstream(path("set.json")) << R"({"public_keys": []})";
  auto r = cli({"verify", "--aggregate", path("garbage.json"), "--set", path("set.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r)["error"], "MalformedInput");
  std::ofstream(path("agg.json")) << R"({"sigma": "zz"})";
  r = cli({"verify", "--aggregate", path("agg.json"), "--set", path("set.json")});
  EXPECT_EQ(error_of(r)["error"], "MalformedInput");
  std::ofstream(path("badset.json")) << R"({"public_keys": ["00"]})";
  r = cli({"verify", "--aggregate", path("agg.json"), "--set", path("badset.json")});
  EXPECT_EQ(error_of(r)["error"], "MalformedInput");
}

TEST_F(CliTest, BundledDefaultConfigSimulates) {
  auto r = cli({"simulate", "--config", config_path("default.json"), "--out", path("run")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = json::parse(slurp(dir_ / "run" / "report.json"));
  EXPECT_EQ(report["report"]["failed_candidates"]["count"], 0);
  EXPECT_EQ(report["manifest"]["command"], "simulate");

  auto manifest = json::parse(slurp(dir_ / "run" / "manifest.json"));
  EXPECT_EQ(manifest, report["manifest"]);
  for (const auto& p : manifest["output_paths"]) EXPECT_TRUE(fs::exists(dir_ / "run" / p.get<std::string>())) << p;

  const auto events = slurp(dir_ / "run" / "events.csv");
  std::istringstream lines(events);
  std::string first, header;
  std::getline(lines, first);
  std::getline(lines, header);
  EXPECT_EQ(first, "# " + std::string("manifest ") + manifest.dump());
  EXPECT_EQ(header, "event_time,event_type,node_id");
}

TEST_F(CliTest, SimulateIsByteIdentical) {
  for (const char* format : {"json", "csv"}) {
    for (const char* out : {"a", "b"})
      ASSERT_EQ(cli({"simulate", "--seed", "5", "--format", format, "--out", path(std::string(format) + out)}).code, 0);
    for (const auto& entry : fs::directory_iterator(dir_ / (std::string(format) + "a"))) {
      const auto name = entry.path().filename();
      EXPECT_EQ(slurp(entry.path()), slurp(dir_ / (std::string(format) + "b") / name)) << name;
    }
  }
}

TEST_F(CliTest, SeedOverridesConfigAndChangesDigest) {
  auto a = json::parse(cli({"simulate", "--seed", "1", "--no-events"}).out);
  auto b = json::parse(cli({"simulate", "--seed", "2", "--no-events"}).out);
  EXPECT_EQ(a["config"]["sim"]["seed"], 1);
  EXPECT_EQ(b["manifest"]["seed"], 2);
  EXPECT_NE(a["manifest"]["config_digest"], b["manifest"]["config_digest"]);
}

TEST_F(CliTest, SweepReportsAreMonotone) {
  auto r = cli({"simulate", "--config", config_path("sweep.json"), "--no-events", "--out", path("sweep")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto summary = json::parse(slurp(dir_ / "sweep" / "sweep.json"));
  ASSERT_EQ(summary["points"].size(), 4u);
  double last = 0;
  for (const auto& point : summary["points"]) {
    EXPECT_GT(point["completion_time_s"].get<double>(), last);
    last = point["completion_time_s"].get<double>();
    const auto file = "report_N" + point["node_count"].dump() + "_n20.json";
    EXPECT_TRUE(fs::exists(dir_ / "sweep" / file)) << file;
  }
}

TEST_F(CliTest, LedgerExportVerifiesRecordByRecord) {
  auto r = cli({"simulate", "--config", config_path("adversarial.json"), "--no-events", "--export-ledger", "--out",
                path("run")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = json::parse(slurp(dir_ / "run" / "report.json"))["report"];
  const auto ledger = path("run/ledger.txt");

  r = cli({"verify", "--ledger", ledger, "--format", "json"});
  EXPECT_EQ(r.code, 0) << r.out;
  auto verdict = json::parse(r.out);
  EXPECT_EQ(verdict["accepted"], report["ledger"]["active_records"]);
  EXPECT_EQ(verdict["rejected"], 0);

  std::ifstream in(ledger);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_GT(lines.size(), 2u);
  lines[2][120] = lines[2][120] == '0' ? '1' : '0';
  std::ofstream tampered(path("tampered.txt"));
  for (const auto& l : lines) tampered << l << "\n";
  tampered.close();
  r = cli({"verify", "--ledger", path("tampered.txt"), "--format", "json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.out)["rejected"], 1);

  lines.push_back(lines[1]);
  std::ofstream duplicated(path("dup.txt"));
  for (const auto& l : lines) duplicated << l << "\n";
  duplicated.close();
  EXPECT_EQ(cli({"verify", "--ledger", path("dup.txt")}).code, 1);
}

TEST_F(CliTest, SimulateConfigErrors) {
  std::ofstream(path("bad.json")) << R"({"sim": {"node_count": 2}})";
  auto r = cli({"simulate", "--config", path("bad.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r)["error"], "ConfigInvalid");

  std::ofstream(path("unknown.json")) << R"({"sim": {"nodes": 2}})";
  EXPECT_EQ(error_of(cli({"simulate", "--config", path("unknown.json")}))["error"], "ConfigInvalid");

  std::ofstream(path("sweep.json")) << R"({"sweep": {"fanout": [1]}})";
  EXPECT_EQ(error_of(cli({"simulate", "--config", path("sweep.json")}))["error"], "ConfigInvalid");

  std::ofstream(path("broken.json")) << "{";
  EXPECT_EQ(error_of(cli({"simulate", "--config", path("broken.json")}))["error"], "MalformedInput");

  r = cli({"simulate", "--export-ledger"});
  EXPECT_EQ(error_of(r)["error"], "ConfigInvalid");

  std::ofstream(path("file")) << "x";
  r = cli({"simulate", "--out", path("file/sub")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r)["error"], "IoFailure");
}

TEST_F(CliTest, PowAndReconfigure) {
  auto r = cli({"pow", "--difficulty", "8", "--trials", "20", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["pow"]["difficulty"], 8);
  EXPECT_EQ(j["endorsement"]["work_units"], 1302);
  EXPECT_EQ(r.out, cli({"pow", "--difficulty", "8", "--trials", "20", "--seed", "3"}).out);
  EXPECT_EQ(cli({"pow", "--difficulty", "31"}).code, 2);

  r = cli({"reconfigure", "--joins", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_EQ(j["joiners_finalized"], 5);
  EXPECT_LT(j["work_ratio"].get<double>(), 0.1);
  EXPECT_EQ(cli({"reconfigure", "--joins", "101"}).code, 2);
  EXPECT_EQ(cli({"reconfigure", "--config", config_path("sweep.json"), "--joins", "1"}).code, 2);
}
