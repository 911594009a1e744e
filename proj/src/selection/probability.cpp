#include "endorse/selection/probability.hpp"

#include <cmath>
#include <numeric>
#include <thread>

#include "endorse/common/error.hpp"
#include "endorse/common/rng.hpp"

namespace endorse::selection {

double failure_probability(int n, double p) {
  if (n < 1) throw Error(ErrorCode::BadRange, "n must be at least 1");
  if (!(p > 0.0 && p <= 0.5)) throw Error(ErrorCode::BadRatio, "adversary ratio must lie in (0, 1/2]");
  const double third = n / 3.0;
  const double two_thirds = 2.0 * n / 3.0;
  const int upper = (2 * n) / 3;
  double sum = 0.0;
  for (int i = 1; i <= upper; ++i) sum += std::pow(p, third + i) * std::pow(1.0 - p, two_thirds - i);
  return sum;
}

int min_group_count(double target, double p) {
  if (!(target > 0.0 && target < 1.0 + 1e-12)) throw Error(ErrorCode::BadRange, "target must lie in (0, 1]");
  int last_at_or_above = 0;
  for (int n = 1;; ++n) {
    double pr = failure_probability(n, p);
    if (pr >= target) {
      last_at_or_above = n;
    } else if (n >= 2) {
      return last_at_or_above + 1;
    }
    if (n > 100000) throw Error(ErrorCode::BadRange, "target not reachable");
  }
}

namespace {

bool run_trial(const SelectionConfig& cfg, std::uint64_t trial, std::vector<NodeId>& ids,
               std::vector<std::uint8_t>& adversarial) {
  const std::size_t n_nodes = cfg.total_candidates;
  const auto adversaries = static_cast<std::size_t>(std::llround(cfg.adversary_ratio * n_nodes));
  Rng rng(derive_seed(cfg.seed, trial));

  // Uniform adversary placement: partial Fisher-Yates over node ids.
  for (std::size_t i = 0; i < n_nodes; ++i) ids[i] = static_cast<NodeId>(i);
  std::fill(adversarial.begin(), adversarial.end(), 0);
  for (std::size_t i = 0; i < adversaries; ++i) {
    std::size_t j = i + rng.below(n_nodes - i);
    std::swap(ids[i], ids[j]);
    adversarial[to_index(ids[i])] = 1;
  }

  for (std::size_t i = 0; i < n_nodes; ++i) ids[i] = static_cast<NodeId>(i);
  auto groups = partition_candidates(ids, cfg.group_count, rng.next());
  auto candidate = static_cast<NodeId>(rng.below(n_nodes));
  auto group = assign_endorsers(candidate, groups, rng.next());

  std::size_t faulty = 0;
  for (auto e : group.endorsers) faulty += adversarial[to_index(e)];
  return faulty >= failing_faulty_count(group.endorsers.size());
}

}  // namespace

MonteCarloResult monte_carlo_group_failure(const SelectionConfig& config, std::uint64_t trials, unsigned threads) {
  config.validate();
  if (trials < 10000) throw Error(ErrorCode::BadRange, "at least 10^4 trials required");
  threads = std::max(1u, threads);

  std::vector<std::uint64_t> failures(threads, 0);
  auto worker = [&](unsigned w) {
    std::vector<NodeId> ids(config.total_candidates);
    std::vector<std::uint8_t> adversarial(config.total_candidates);
    for (std::uint64_t t = w; t < trials; t += threads) failures[w] += run_trial(config, t, ids, adversarial);
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  }

  MonteCarloResult r;
  r.trials = trials;
  r.failures = std::accumulate(failures.begin(), failures.end(), std::uint64_t{0});
  r.rate = static_cast<double>(r.failures) / static_cast<double>(trials);
  r.standard_error = std::sqrt(r.rate * (1.0 - r.rate) / static_cast<double>(trials));
  const double z = 1.959963984540054;
  const double nt = static_cast<double>(trials);
  const double denom = 1.0 + z * z / nt;
  const double centre = (r.rate + z * z / (2.0 * nt)) / denom;
  const double half = z * std::sqrt(r.rate * (1.0 - r.rate) / nt + z * z / (4.0 * nt * nt)) / denom;
  r.ci_low = std::max(0.0, centre - half);
  r.ci_high = std::min(1.0, centre + half);
  return r;
}

}  // namespace endorse::selection
