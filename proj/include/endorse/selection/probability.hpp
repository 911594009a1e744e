#pragma once

#include <cstdint>

#include "endorse/selection/selection.hpp"

namespace endorse::selection {

/// Pr[F] = sum_{i=1}^{floor(2n/3)} p^(n/3 + i) * (1-p)^(2n/3 - i), evaluated
/// with real-valued exponents n/3 and 2n/3. This is the convention that
/// reproduces the reference failure-probability table for p in {1/2, 1/3}.
/// Throws Error(BadRatio) unless p in (0, 1/2]; Error(BadRange) if n < 1.
double failure_probability(int n, double adversary_ratio);

/// Smallest n such that failure_probability(m, p) < target for every m >= n.
/// The formula is zero at n = 1 (empty sum) and non-increasing from n = 2 on,
/// so the scan stops at the first n >= 2 below the target.
int min_group_count(double target, double adversary_ratio);

/// Mean number of group allocations until the first failure, 1 / p_fail.
inline double expected_groups_to_first_failure(double p_fail) { return 1.0 / p_fail; }

/// Quorum threshold floor(2n/3) + 1.
constexpr std::size_t quorum_threshold(std::size_t n) { return (2 * n) / 3 + 1; }

/// Smallest faulty-endorser count that fails a group, ceil(n/3).
constexpr std::size_t failing_faulty_count(std::size_t n) { return (n + 2) / 3; }

struct MonteCarloResult {
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double rate = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;   // 95% Wilson interval
  double ci_high = 0.0;
};

/// Empirical endorsement-group failure rate. Each trial places
/// round(ratio * N) adversaries uniformly at random, partitions the N
/// candidates, picks a uniformly random candidate and assigns its endorsers;
/// the trial fails when at least ceil(n/3) endorsers are adversarial.
/// Trial t uses the stream derive_seed(seed, t), so the result is the same
/// for any thread count. Throws Error(BadRange) for fewer than 10^4 trials.
MonteCarloResult monte_carlo_group_failure(const SelectionConfig& config, std::uint64_t trials,
                                           unsigned threads = 1);

}  // namespace endorse::selection
