#pragma once

// Independent reference computations used to freeze expected values.

#include <cmath>
#include <cstdint>

namespace endorse::testing {

/// ln C(n, k)
inline long double log_choose(long double n, long double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

/// P(X >= c) for X ~ Hypergeometric(population, successes, draws).
inline long double hypergeometric_tail(std::int64_t population, std::int64_t successes, std::int64_t draws,
                                       std::int64_t c) {
  long double total = 0;
  const long double denom = log_choose(population, draws);
  for (std::int64_t k = c; k <= draws && k <= successes; ++k) {
    if (draws - k > population - successes) continue;
    total += std::exp(log_choose(successes, k) + log_choose(population - successes, draws - k) - denom);
  }
  return total;
}

/// Exact failure probability of the Monte Carlo selection model: a uniformly
/// random candidate among N (A adversarial) receives one endorser from each of
/// n other subgroups of a uniformly random partition. By symmetry the endorser
/// set is a uniform n-subset of the other N - 1 nodes.
inline long double exact_selection_failure(std::int64_t nodes, std::int64_t adversaries, std::int64_t n) {
  const std::int64_t fail_at = (n + 2) / 3;
  const long double p_adv = static_cast<long double>(adversaries) / nodes;
  long double out = (1 - p_adv) * hypergeometric_tail(nodes - 1, adversaries, n, fail_at);
  if (adversaries > 0) out += p_adv * hypergeometric_tail(nodes - 1, adversaries - 1, n, fail_at);
  return out;
}

/// Closed form of the real-exponent failure sum as a geometric series:
/// p^(n/3) (1-p)^(2n/3) * sum_{i=1}^{K} r^i with r = p/(1-p), K = floor(2n/3).
inline long double failure_sum_closed_form(int n, long double p) {
  const long double r = p / (1 - p);
  const int k = (2 * n) / 3;
  const long double base = std::pow(p, n / 3.0L) * std::pow(1 - p, 2.0L * n / 3.0L);
  const long double series = (r == 1) ? k : r * (1 - std::pow(r, k)) / (1 - r);
  return base * series;
}

}  // namespace endorse::testing
