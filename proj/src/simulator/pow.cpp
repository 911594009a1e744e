#include "endorse/simulator/pow.hpp"

#include <bit>
#include <cmath>

#include "endorse/common/error.hpp"
#include "endorse/common/rng.hpp"
#include "endorse/crypto/scheme.hpp"
#include "endorse/protocol/collection.hpp"
#include "endorse/protocol/ledger.hpp"
#include "endorse/protocol/request.hpp"

namespace endorse::simulator {

namespace {

unsigned leading_zero_bits(const crypto::Digest& d) {
  unsigned bits = 0;
  for (auto byte : d) {
    if (byte != 0) return bits + static_cast<unsigned>(std::countl_zero(byte));
    bits += 8;
  }
  return bits;
}

nlohmann::json ops_json(const crypto::OpCounts& ops) {
  return {{"hashes", ops.hashes}, {"exponentiations", ops.exponentiations}, {"pairings", ops.pairings}};
}

}  // namespace

PowBaselineReport run_pow_baseline(unsigned difficulty, std::size_t trials, std::uint64_t seed, const WorkModel& work,
                                   double work_unit_us) {
  if (difficulty > 30) throw Error(ErrorCode::ConfigInvalid, "difficulty must be at most 30");
  if (trials == 0) throw Error(ErrorCode::ConfigInvalid, "trials must be positive");
  PowBaselineReport r;
  r.difficulty = difficulty;
  r.trials = trials;
  r.expected_hashes = std::ldexp(1.0, static_cast<int>(difficulty));
  for (std::size_t t = 0; t < trials; ++t) {
    ByteWriter w;
    w.u64(seed);
    w.u64(t);
    const auto challenge = crypto::sha256(w.bytes());
    std::uint8_t input[40];
    std::copy(challenge.begin(), challenge.end(), input);
    std::uint64_t hashes = 0;
    for (std::uint64_t nonce = 0;; ++nonce) {
      for (int b = 0; b < 8; ++b) input[32 + b] = static_cast<std::uint8_t>(nonce >> (56 - 8 * b));
      ++hashes;
      if (leading_zero_bits(crypto::sha256(input)) >= difficulty) break;
    }
    r.per_trial_hashes.push_back(hashes);
    r.measured_hashes += hashes;
  }
  r.mean_hashes = static_cast<double>(r.measured_hashes) / static_cast<double>(trials);
  r.cpu_work_units = r.mean_hashes * static_cast<double>(work.hash);
  r.solve_time_s = r.cpu_work_units * work_unit_us / 1e6;
  return r;
}

unsigned calibrate_difficulty(double seconds, const WorkModel& work, double work_unit_us) {
  if (!(seconds > 0) || !(work_unit_us > 0) || work.hash == 0)
    throw Error(ErrorCode::ConfigInvalid, "calibration needs positive time, unit cost and hash cost");
  const double hashes = seconds * 1e6 / work_unit_us / static_cast<double>(work.hash);
  const double bits = std::round(std::log2(hashes));
  return static_cast<unsigned>(std::clamp(bits, 0.0, 30.0));
}

EndorsementWork measure_endorsement_work(std::size_t endorsement_nodes, std::uint64_t seed, const WorkModel& work) {
  if (endorsement_nodes == 0) throw Error(ErrorCode::ConfigInvalid, "endorsement_nodes must be positive");
  using crypto::op_counts;
  const crypto::OpCounts outer = op_counts();

  Rng rng(seed);
  const auto candidate = crypto::KeyPair::generate(rng);
  std::vector<crypto::KeyPair> endorsers;
  for (std::size_t i = 0; i < endorsement_nodes; ++i) endorsers.push_back(crypto::KeyPair::generate(rng));
  protocol::Policy policy;
  protocol::TokenRegistry registry;
  registry.add("deposit", policy.min_deposit, candidate.public_key());
  protocol::RequestLog log;
  const auto request = protocol::build_request({&candidate, "deposit", {1.0, 25.0, 1.0}}, 1, registry, policy, log);

  EndorsementWork out;
  out.endorsement_nodes = endorsement_nodes;
  op_counts() = {};
  std::vector<crypto::G2Point> pks;
  for (const auto& e : endorsers) pks.push_back(e.public_key());
  crypto::PublicKeySet set(std::move(pks));
  const crypto::OpCounts setup = op_counts();

  op_counts() = {};
  std::vector<crypto::Signature> sigs;
  for (const auto& e : endorsers) {
    protocol::EndorserState state{&e, {}};
    if (!protocol::evaluate_request(state, request, registry, policy).approved())
      throw Error(ErrorCode::VerificationFailed, "request rejected");
    sigs.push_back(protocol::endorse(e, request, set));
  }
  out.signing = op_counts();

  op_counts() = setup;
  protocol::CollectionState collection(set, protocol::endorsement_message(candidate.public_key(), "deposit"));
  for (std::size_t i = 0; i < sigs.size(); ++i) collection.collect(sigs[i], i);
  auto agg = collection.try_finalize();
  out.collection = op_counts();

  op_counts() = {};
  protocol::GlobalLedger ledger(&registry);
  ledger.append({candidate.public_key(), *agg, set, "deposit", 1, protocol::RecordStatus::Active, std::nullopt});
  out.record_check = op_counts();

  op_counts() = outer;
  out.work_units = work.units(out.signing) + work.units(out.collection) + work.units(out.record_check);
  return out;
}

nlohmann::json PowBaselineReport::to_json() const {
  return {{"difficulty", difficulty},
          {"trials", trials},
          {"expected_hashes", expected_hashes},
          {"measured_hashes", measured_hashes},
          {"mean_hashes", mean_hashes},
          {"per_trial_hashes", per_trial_hashes},
          {"solve_time_s", solve_time_s},
          {"cpu_work_units", cpu_work_units}};
}

nlohmann::json EndorsementWork::to_json() const {
  return {{"endorsement_nodes", endorsement_nodes},
          {"signing", ops_json(signing)},
          {"collection", ops_json(collection)},
          {"record_check", ops_json(record_check)},
          {"work_units", work_units}};
}

}  // namespace endorse::simulator
