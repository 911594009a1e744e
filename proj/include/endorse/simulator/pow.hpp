#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "endorse/simulator/config.hpp"

namespace endorse::simulator {

struct PowBaselineReport {
  unsigned difficulty = 0;  // leading zero bits
  std::size_t trials = 0;
  double expected_hashes = 0;  // 2^difficulty
  std::uint64_t measured_hashes = 0;  // over all trials
  double mean_hashes = 0;
  std::vector<std::uint64_t> per_trial_hashes;
  double solve_time_s = 0;  // mean simulated seconds per solve
  double cpu_work_units = 0;  // mean per solve

  nlohmann::json to_json() const;
};

/// SHA-256 preimage search: trial t hashes challenge_t || nonce for nonce =
/// 0, 1, ... until the digest has `difficulty` leading zero bits. Throws
/// Error(ConfigInvalid) for difficulty > 30 or zero trials.
PowBaselineReport run_pow_baseline(unsigned difficulty, std::size_t trials, std::uint64_t seed,
                                   const WorkModel& work = {}, double work_unit_us = 20.0);

/// Difficulty whose expected solve takes `seconds` of simulated CPU time.
unsigned calibrate_difficulty(double seconds, const WorkModel& work = {}, double work_unit_us = 20.0);

/// Work one candidate's endorsement costs: n endorser signatures, n response
/// verifications by the candidate and one check of the finished record,
/// measured on the real scheme.
struct EndorsementWork {
  std::size_t endorsement_nodes = 0;
  crypto::OpCounts signing, collection, record_check;
  std::uint64_t work_units = 0;

  nlohmann::json to_json() const;
};

EndorsementWork measure_endorsement_work(std::size_t endorsement_nodes, std::uint64_t seed,
                                         const WorkModel& work = {});

}  // namespace endorse::simulator
